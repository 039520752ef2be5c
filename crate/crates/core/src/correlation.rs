//! Four-qubit effective state, bipartite reductions, and correlation measures.
//!
//! Each emitter n and its reservoir r_n share one excitation, so the pair is
//! described by b(t)|+⟩|0̄⟩ + b̃(t)|−⟩|1̄⟩, where |1̄⟩ collects the emitted
//! photon. Starting from α|−,−⟩ + β|+,+⟩ the four two-level factors
//! (N1, N2, r1, r2) carry a pure state with five nonzero amplitudes, and every
//! two-party reduction of it is an X state.
//!
//! Entropies are in bits. Discord is optimised over rank-one projective
//! measurements on one side.

use crate::amplitude::AmplitudeTrajectory;
use crate::error::{Error, Result};
use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

type C = Complex64;

const ZERO: C = C { re: 0.0, im: 0.0 };

/// Eigenvalues above −CLAMP are clamped to zero before entropies and roots.
pub const EIGEN_CLAMP: f64 = 1e-12;
/// Eigenvalues below −UNPHYSICAL make the matrix an error.
pub const UNPHYSICAL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialWeights {
    alpha: C,
    beta: C,
}

impl InitialWeights {
    pub fn new(alpha: C, beta: C) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::param("alpha", format!("|α|² + |β|² = {norm}, expected 1")));
        }
        Ok(Self { alpha, beta })
    }

    /// Real α with β = √(1 − α²).
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha.abs()) {
            return Err(Error::param("alpha", format!("|α| must not exceed 1, got {alpha}")));
        }
        Self::new(C::new(alpha, 0.0), C::new((1.0 - alpha * alpha).sqrt(), 0.0))
    }

    pub fn alpha(&self) -> C {
        self.alpha
    }

    pub fn beta(&self) -> C {
        self.beta
    }
}

/// The four two-level factors, in tensor order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    N1,
    N2,
    R1,
    R2,
}

impl Subsystem {
    /// Bit position in the basis index (N1 is the most significant).
    fn shift(self) -> usize {
        match self {
            Subsystem::N1 => 3,
            Subsystem::N2 => 2,
            Subsystem::R1 => 1,
            Subsystem::R2 => 0,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Subsystem::N1 => "n1",
            Subsystem::N2 => "n2",
            Subsystem::R1 => "r1",
            Subsystem::R2 => "r2",
        }
    }

    const ALL: [Subsystem; 4] = [Subsystem::N1, Subsystem::N2, Subsystem::R1, Subsystem::R2];
}

/// Ordered pair of distinct subsystems; `b` is the measured side by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Partition {
    pub a: Subsystem,
    pub b: Subsystem,
}

impl Partition {
    pub const N1N2: Partition = Partition { a: Subsystem::N1, b: Subsystem::N2 };
    pub const R1R2: Partition = Partition { a: Subsystem::R1, b: Subsystem::R2 };
    pub const N1R1: Partition = Partition { a: Subsystem::N1, b: Subsystem::R1 };
    pub const N1R2: Partition = Partition { a: Subsystem::N1, b: Subsystem::R2 };
    pub const N2R1: Partition = Partition { a: Subsystem::N2, b: Subsystem::R1 };
    pub const N2R2: Partition = Partition { a: Subsystem::N2, b: Subsystem::R2 };

    pub const ALL: [Partition; 6] = [
        Self::N1N2,
        Self::R1R2,
        Self::N1R1,
        Self::N1R2,
        Self::N2R1,
        Self::N2R2,
    ];

    /// The four partitions labelled 1–4 in the correlation-distribution figure.
    pub const FIGURE: [Partition; 4] = [Self::N1N2, Self::R1R2, Self::N1R1, Self::N1R2];

    pub fn new(a: Subsystem, b: Subsystem) -> Result<Self> {
        if a == b {
            return Err(Error::param("partition", "subsystems must be distinct"));
        }
        Ok(Self { a, b })
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.a.label(), self.b.label())
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown partition `{name}`")))
    }
}

impl TryFrom<String> for Partition {
    type Error = Error;

    fn try_from(name: String) -> Result<Self> {
        Self::parse(&name)
    }
}

impl From<Partition> for String {
    fn from(p: Partition) -> String {
        p.name()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// 16 amplitudes over |N1 N2 r1 r2⟩ with level 1 = excited / one photon.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    pub amplitudes: [C; 16],
}

impl CompositeState {
    pub fn index(n1: usize, n2: usize, r1: usize, r2: usize) -> usize {
        (n1 << 3) | (n2 << 2) | (r1 << 1) | r2
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// α|−−00⟩ + βb²|++00⟩ + βbb̃|+−01⟩ + βb̃b|−+10⟩ + βb̃²|−−11⟩ with b̃ = √(1 − |b|²).
pub fn assemble_state(w: &InitialWeights, b: C) -> Result<CompositeState> {
    let m2 = b.norm_sqr();
    if m2 > 1.0 + 1e-8 {
        return Err(Error::param("b", format!("|b| must not exceed 1, got {}", m2.sqrt())));
    }
    let bt = (1.0 - m2).max(0.0).sqrt();
    let beta = w.beta();
    let mut amplitudes = [ZERO; 16];
    amplitudes[CompositeState::index(0, 0, 0, 0)] = w.alpha();
    amplitudes[CompositeState::index(1, 1, 0, 0)] = beta * b * b;
    amplitudes[CompositeState::index(1, 0, 0, 1)] = beta * b * bt;
    amplitudes[CompositeState::index(0, 1, 1, 0)] = beta * bt * b;
    amplitudes[CompositeState::index(0, 0, 1, 1)] = beta * bt * bt;
    Ok(CompositeState { amplitudes })
}

/// Which party a discord measurement acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    #[default]
    B,
}

/// Two-qubit density matrix in the basis |a b⟩, index 2a + b.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix2Q {
    pub matrix: Matrix4<C>,
    pub partition: Partition,
}

/// Partial trace onto `partition`.
pub fn reduce(state: &CompositeState, partition: Partition) -> DensityMatrix2Q {
    let (sa, sb) = (partition.a.shift(), partition.b.shift());
    let rest: Vec<usize> = Subsystem::ALL
        .iter()
        .filter(|s| **s != partition.a && **s != partition.b)
        .map(|s| s.shift())
        .collect();
    let mut m = Matrix4::<C>::zeros();
    for env in 0..4usize {
        let env_bits = ((env >> 1) & 1) << rest[0] | (env & 1) << rest[1];
        for i in 0..4usize {
            let ii = env_bits | ((i >> 1) << sa) | ((i & 1) << sb);
            let ai = state.amplitudes[ii];
            if ai == ZERO {
                continue;
            }
            for j in 0..4usize {
                let jj = env_bits | ((j >> 1) << sa) | ((j & 1) << sb);
                m[(i, j)] += ai * state.amplitudes[jj].conj();
            }
        }
    }
    DensityMatrix2Q { matrix: m, partition }
}

fn hermitian_eigenvalues4(m: &Matrix4<C>) -> [f64; 4] {
    let eig = SymmetricEigen::new(*m);
    let mut v = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2], eig.eigenvalues[3]];
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

fn hermitian_eigenvalues2(m: &Matrix2<C>) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let c = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + c.norm_sqr()).sqrt();
    [mean + r, mean - r]
}

fn clamp_spectrum(values: &mut [f64]) -> Result<()> {
    for v in values.iter_mut() {
        if *v < -UNPHYSICAL {
            return Err(Error::NotPhysical { eigenvalue: *v });
        }
        if *v < EIGEN_CLAMP {
            *v = 0.0;
        }
    }
    Ok(())
}

fn entropy_of(values: &[f64]) -> f64 {
    let s: f64 = values
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    // a pure spectrum sums to −0.0
    s.max(0.0)
}

/// Binary entropy H(x) in bits, with 0·log 0 = 0.
pub fn binary_entropy(x: f64) -> f64 {
    entropy_of(&[x, 1.0 - x])
}

impl DensityMatrix2Q {
    pub fn trace(&self) -> C {
        self.matrix.trace()
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigenvalues4(&self.matrix)
    }

    /// Largest |ρ − ρ†| entry.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.matrix - self.matrix.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry outside the diagonal and anti-diagonal.
    pub fn x_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                if i != j && i + j != 3 {
                    worst = worst.max(self.matrix[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn reduced_a(&self) -> Matrix2<C> {
        let m = &self.matrix;
        Matrix2::new(
            m[(0, 0)] + m[(1, 1)],
            m[(0, 2)] + m[(1, 3)],
            m[(2, 0)] + m[(3, 1)],
            m[(2, 2)] + m[(3, 3)],
        )
    }

    pub fn reduced_b(&self) -> Matrix2<C> {
        let m = &self.matrix;
        Matrix2::new(
            m[(0, 0)] + m[(2, 2)],
            m[(0, 1)] + m[(2, 3)],
            m[(1, 0)] + m[(3, 2)],
            m[(1, 1)] + m[(3, 3)],
        )
    }

    pub fn entropy(&self) -> Result<f64> {
        let mut v = self.eigenvalues();
        clamp_spectrum(&mut v)?;
        Ok(entropy_of(&v))
    }

    /// I(A:B) = S(A) + S(B) − S(AB).
    pub fn mutual_information(&self) -> Result<f64> {
        Ok(entropy2(&self.reduced_a())? + entropy2(&self.reduced_b())? - self.entropy()?)
    }

    /// Wootters concurrence from the eigenvalues λᵢ of √ρ ρ̃ √ρ, with
    /// ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y).
    ///
    /// √λᵢ are the singular values of √ρ √ρ̃, which is what is computed: it
    /// avoids taking square roots of eigenvalues that are zero up to rounding.
    pub fn concurrence(&self) -> Result<f64> {
        let rho = &self.matrix;
        let eig = SymmetricEigen::new(*rho);
        for &v in eig.eigenvalues.iter() {
            if v < -UNPHYSICAL {
                return Err(Error::NotPhysical { eigenvalue: v });
            }
        }
        let sqrt_vals = eig
            .eigenvalues
            .map(|v| C::new(if v < EIGEN_CLAMP { 0.0 } else { v.sqrt() }, 0.0));
        let sqrt_rho = eig.eigenvectors * Matrix4::from_diagonal(&sqrt_vals) * eig.eigenvectors.adjoint();
        let yy = sigma_yy();
        let sqrt_tilde = yy * sqrt_rho.map(|z| z.conj()) * yy;
        let mut sv: Vec<f64> = (sqrt_rho * sqrt_tilde).singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        Ok((sv[0] - sv[1] - sv[2] - sv[3]).max(0.0))
    }

    /// Entanglement of formation in bits.
    pub fn eof(&self) -> Result<f64> {
        Ok(eof_from_concurrence(self.concurrence()?))
    }

    /// Post-measurement state of the unmeasured party for outcome |n⟩ on
    /// `side`, unnormalised: ⟨n|ρ|n⟩ over the measured factor.
    fn conditional(&self, side: Side, n: [C; 2]) -> Matrix2<C> {
        let m = &self.matrix;
        let mut out = Matrix2::<C>::zeros();
        for u in 0..2 {
            for v in 0..2 {
                let mut acc = ZERO;
                for p in 0..2 {
                    for q in 0..2 {
                        let (i, j) = match side {
                            Side::B => (2 * u + p, 2 * v + q),
                            Side::A => (2 * p + u, 2 * q + v),
                        };
                        acc += n[p].conj() * m[(i, j)] * n[q];
                    }
                }
                out[(u, v)] = acc;
            }
        }
        out
    }

    /// Σ_k p_k S(ρ_k) for the projective measurement along Bloch angles (θ, φ).
    pub fn conditional_entropy(&self, side: Side, theta: f64, phi: f64) -> f64 {
        let (s, c) = (0.5 * theta).sin_cos();
        let phase = C::from_polar(1.0, phi);
        let up = [C::new(c, 0.0), phase * s];
        let down = [C::new(s, 0.0), -phase * c];
        let mut total = 0.0;
        for n in [up, down] {
            let sigma = self.conditional(side, n);
            let p = sigma[(0, 0)].re + sigma[(1, 1)].re;
            if p <= 1e-15 {
                continue;
            }
            let ev = hermitian_eigenvalues2(&(sigma / C::new(p, 0.0)));
            total += p * entropy_of(&[ev[0].clamp(0.0, 1.0), ev[1].clamp(0.0, 1.0)]);
        }
        total
    }

    /// Quantum discord in bits with the measurement on `opt.side`.
    pub fn discord(&self, opt: &DiscordOptions) -> Result<DiscordResult> {
        let mi = self.mutual_information()?;
        let s_unmeasured = match opt.side {
            Side::B => entropy2(&self.reduced_a())?,
            Side::A => entropy2(&self.reduced_b())?,
        };
        let objective = |x: [f64; 2]| self.conditional_entropy(opt.side, x[0], x[1]);

        let g = opt.grid.max(2);
        let mut best = ([0.0, 0.0], f64::INFINITY);
        for i in 0..g {
            let theta = PI * i as f64 / (g - 1) as f64;
            for j in 0..g {
                let phi = 2.0 * PI * j as f64 / g as f64;
                let v = objective([theta, phi]);
                if v < best.1 {
                    best = ([theta, phi], v);
                }
            }
        }
        let step = [PI / (g - 1) as f64, 2.0 * PI / g as f64];
        let refined = nelder_mead(objective, best.0, step, opt.tolerance, 2000);
        if refined.1 > best.1 + 1e-14 {
            return Err(Error::OptimizerRegression { grid: best.1, refined: refined.1 });
        }
        let min_cond = refined.1.min(best.1);
        let classical = s_unmeasured - min_cond;
        let classical_grid = s_unmeasured - best.1;
        Ok(DiscordResult {
            discord: (mi - classical).max(0.0),
            grid_discord: (mi - classical_grid).max(0.0),
            mutual_information: mi,
            classical,
            angles: refined.0,
        })
    }
}

fn entropy2(m: &Matrix2<C>) -> Result<f64> {
    let mut v = hermitian_eigenvalues2(m);
    clamp_spectrum(&mut v)?;
    Ok(entropy_of(&v))
}

fn sigma_yy() -> Matrix4<C> {
    // σ_y ⊗ σ_y is real: anti-diagonal (−1, 1, 1, −1).
    let mut m = Matrix4::<C>::zeros();
    m[(0, 3)] = C::new(-1.0, 0.0);
    m[(1, 2)] = C::new(1.0, 0.0);
    m[(2, 1)] = C::new(1.0, 0.0);
    m[(3, 0)] = C::new(-1.0, 0.0);
    m
}

/// E = H[(1 + √(1 − C²)) / 2].
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscordOptions {
    /// Coarse grid points per Bloch angle.
    pub grid: usize,
    /// Simplex stopping tolerance on the objective.
    pub tolerance: f64,
    pub side: Side,
}

impl Default for DiscordOptions {
    fn default() -> Self {
        Self {
            grid: 64,
            tolerance: 1e-8,
            side: Side::B,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscordResult {
    pub discord: f64,
    /// Discord from the coarse grid alone (an upper bound on `discord`).
    pub grid_discord: f64,
    pub mutual_information: f64,
    /// Maximal measured classical correlation.
    pub classical: f64,
    /// Optimal (θ, φ).
    pub angles: [f64; 2],
}

/// Two-parameter Nelder–Mead; returns the best vertex seen.
fn nelder_mead<F: Fn([f64; 2]) -> f64>(f: F, start: [f64; 2], step: [f64; 2], tol: f64, max_iter: usize) -> ([f64; 2], f64) {
    let mut simplex = [
        start,
        [start[0] + step[0], start[1]],
        [start[0], start[1] + step[1]],
    ];
    let mut values = simplex.map(&f);
    for _ in 0..max_iter {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        let diameter = (1..3)
            .map(|k| (simplex[k][0] - simplex[0][0]).abs().max((simplex[k][1] - simplex[0][1]).abs()))
            .fold(0.0, f64::max);
        // a flat spread alone is not enough: the first simplex can straddle a minimum symmetrically
        if (values[2] - values[0]).abs() <= tol && diameter <= 1e-6 {
            break;
        }
        let centroid = [0.5 * (simplex[0][0] + simplex[1][0]), 0.5 * (simplex[0][1] + simplex[1][1])];
        let along = |t: f64| [centroid[0] + t * (simplex[2][0] - centroid[0]), centroid[1] + t * (simplex[2][1] - centroid[1])];
        let reflected = along(-1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] { along(-0.5) } else { along(0.5) };
            let fc = f(contracted);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = [
                        simplex[0][0] + 0.5 * (simplex[k][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[k][1] - simplex[0][1]),
                    ];
                    values[k] = f(simplex[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap()).unwrap();
    (simplex[best], values[best])
}

/// Correlations of one partition at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionValues {
    pub partition: Partition,
    pub qd: f64,
    pub eof: f64,
    pub mi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRecord {
    pub t: f64,
    pub values: Vec<PartitionValues>,
}

impl CorrelationRecord {
    pub fn get(&self, partition: Partition) -> Option<&PartitionValues> {
        self.values.iter().find(|v| v.partition == partition)
    }
}

/// Correlations of one partition of the state built from amplitude `b`.
pub fn partition_values(w: &InitialWeights, b: C, partition: Partition, opt: &DiscordOptions) -> Result<PartitionValues> {
    let state = assemble_state(w, b)?;
    let rho = reduce(&state, partition);
    let d = rho.discord(opt)?;
    Ok(PartitionValues {
        partition,
        qd: d.discord,
        eof: rho.eof()?,
        mi: d.mutual_information,
    })
}

/// Correlation time series over every `stride`-th grid point.
pub fn correlation_timeseries(
    traj: &AmplitudeTrajectory,
    w: &InitialWeights,
    partitions: &[Partition],
    opt: &DiscordOptions,
    stride: usize,
) -> Result<Vec<CorrelationRecord>> {
    let stride = stride.max(1);
    let indices: Vec<usize> = (0..traj.len()).step_by(stride).collect();
    indices
        .par_iter()
        .map(|&i| {
            let values = partitions
                .iter()
                .map(|&p| partition_values(w, traj.b[i], p, opt))
                .collect::<Result<Vec<_>>>()?;
            Ok(CorrelationRecord { t: traj.t[i], values })
        })
        .collect()
}
