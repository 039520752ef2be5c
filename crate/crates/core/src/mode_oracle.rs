//! Brute-force reference: the reservoir cut into N discrete modes and the
//! single-excitation Hamiltonian diagonalised exactly.
//!
//! With midpoints k_j = (j + ½)Δk on (0, k_max] and real couplings
//! g_j = √(η k_j² Δk / ω_j), the Hamiltonian in the basis (|+,0⟩, |−,1_j⟩) is
//! the real symmetric arrowhead matrix
//!
//! ```text
//! H = [ ω₀  gᵀ ]
//!     [ g   diag(ω_j) ]
//! ```
//!
//! so b(t) = Σ_n V₀ₙ² e^{−iλₙt} and b_j(t) = Σ_n V_jn V₀ₙ e^{−iλₙt}.
//! A discrete bath revives after roughly 2π/Δω; compare against it only well
//! before [`DiscretizedBath::recurrence_time`].

use crate::amplitude::{derive_rates, AmplitudeTrajectory};
use crate::error::{Error, Result};
use crate::reservoir::{EmitterParams, ReservoirParams};
use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Allowed drift of |b|² + Σ|b_j|² from 1.
pub const NORM_TOL: f64 = 1e-8;
/// Number of times at which [`OracleSpectrum::evolve_exact`] audits the norm.
const NORM_SAMPLES: usize = 8;

#[derive(Debug, Clone)]
pub struct DiscretizedBath {
    pub n_modes: usize,
    pub k_max: f64,
    pub dk: f64,
    pub k_grid: Vec<f64>,
    pub omega_grid: Vec<f64>,
    pub g_grid: Vec<f64>,
}

impl DiscretizedBath {
    pub fn new(reservoir: &ReservoirParams, n_modes: usize) -> Result<Self> {
        reservoir.validate()?;
        if n_modes == 0 {
            return Err(Error::param("oracle_modes", "need at least one mode"));
        }
        let dk = reservoir.k_max / n_modes as f64;
        let k_grid: Vec<f64> = (0..n_modes).map(|j| (j as f64 + 0.5) * dk).collect();
        let omega_grid = k_grid
            .iter()
            .map(|&k| reservoir.dispersion(k))
            .collect::<Result<Vec<_>>>()?;
        let g_grid = k_grid
            .iter()
            .zip(&omega_grid)
            .map(|(&k, &w)| (reservoir.eta * k * k * dk / w).sqrt())
            .collect();
        Ok(Self {
            n_modes,
            k_max: reservoir.k_max,
            dk,
            k_grid,
            omega_grid,
            g_grid,
        })
    }

    /// Σ_j g_j² e^{−iω_j s}, the bath's own memory kernel.
    pub fn kernel(&self, s: f64) -> Complex64 {
        self.g_grid
            .iter()
            .zip(&self.omega_grid)
            .map(|(g, &w)| g * g * Complex64::from_polar(1.0, -w * s))
            .sum()
    }

    /// 2π over the widest gap between neighbouring grid frequencies; the
    /// earliest time at which some part of the bath rephases.
    pub fn recurrence_time(&self) -> f64 {
        let widest = self
            .omega_grid
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        if widest > 0.0 {
            2.0 * PI / widest
        } else {
            f64::INFINITY
        }
    }

    /// Level spacing at the band edge, ≈ 2AΔk² for a quadratic band
    /// (the smallest nonzero |ω_{j+1} − ω_j| near k₀).
    pub fn edge_spacing(&self) -> f64 {
        let (edge, _) = self
            .omega_grid
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (j, &w)| if w < acc.1 { (j, w) } else { acc });
        let lo = edge.saturating_sub(2);
        let hi = (edge + 3).min(self.n_modes);
        self.omega_grid[lo..hi]
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .filter(|d| *d > 0.0)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Eigen-decomposition of the arrowhead Hamiltonian.
#[derive(Debug, Clone)]
pub struct OracleSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Column n is the eigenvector of `eigenvalues[n]`; row 0 is the emitter.
    pub vectors: Mat<f64>,
    omega_c: f64,
    edge_spacing: f64,
}

pub fn diagonalize(bath: &DiscretizedBath, emitter: &EmitterParams, reservoir: &ReservoirParams) -> OracleSpectrum {
    let n = bath.n_modes + 1;
    let mut h = Mat::<f64>::zeros(n, n);
    h.write(0, 0, emitter.omega_0());
    for j in 0..bath.n_modes {
        h.write(j + 1, j + 1, bath.omega_grid[j]);
        h.write(j + 1, 0, bath.g_grid[j]);
        h.write(0, j + 1, bath.g_grid[j]);
    }
    let evd = h.selfadjoint_eigendecomposition(faer::Side::Lower);
    let s = evd.s().column_vector();
    let eigenvalues = (0..n).map(|i| s.read(i)).collect();
    OracleSpectrum {
        eigenvalues,
        vectors: evd.u().to_owned(),
        omega_c: reservoir.omega_c,
        edge_spacing: bath.edge_spacing(),
    }
}

/// Sub-band eigenstate and its weight on the bare excited emitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOverlap {
    pub energy: f64,
    /// |⟨+,0|ψ_bound⟩|², the discrete counterpart of the residue Z.
    pub overlap_sqr: f64,
}

impl OracleSpectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn emitter_weights(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.vectors.read(0, n).powi(2)).collect()
    }

    /// b(t) and ḃ(t) at one time.
    pub fn amplitude(&self, t: f64) -> (Complex64, Complex64) {
        let mut b = Complex64::new(0.0, 0.0);
        let mut b_dot = Complex64::new(0.0, 0.0);
        for (n, &lam) in self.eigenvalues.iter().enumerate() {
            let term = self.vectors.read(0, n).powi(2) * Complex64::from_polar(1.0, -lam * t);
            b += term;
            b_dot += Complex64::new(0.0, -lam) * term;
        }
        (b, b_dot)
    }

    /// Mode amplitudes b_j(t), j = 1..N.
    pub fn mode_amplitudes(&self, t: f64) -> Vec<Complex64> {
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(n, &lam)| self.vectors.read(0, n) * Complex64::from_polar(1.0, -lam * t))
            .collect();
        (1..self.dim())
            .into_par_iter()
            .map(|j| {
                phases
                    .iter()
                    .enumerate()
                    .map(|(n, p)| self.vectors.read(j, n) * p)
                    .sum()
            })
            .collect()
    }

    /// |1 − (|b|² + Σ|b_j|²)| at time t.
    pub fn norm_drift(&self, t: f64) -> f64 {
        let (b, _) = self.amplitude(t);
        let modes: f64 = self.mode_amplitudes(t).iter().map(|z| z.norm_sqr()).sum();
        (1.0 - b.norm_sqr() - modes).abs()
    }

    /// b(t) on `t_grid`, in the same trajectory form as the Volterra solver.
    /// The total norm is checked at a handful of the grid times.
    pub fn evolve_exact(&self, t_grid: &[f64]) -> Result<AmplitudeTrajectory> {
        if t_grid.is_empty() {
            return Err(Error::param("t_grid", "empty time grid"));
        }
        let weights = self.emitter_weights();
        let pairs: Vec<(Complex64, Complex64)> = t_grid
            .par_iter()
            .map(|&t| {
                let mut b = Complex64::new(0.0, 0.0);
                let mut b_dot = Complex64::new(0.0, 0.0);
                for (&w, &lam) in weights.iter().zip(&self.eigenvalues) {
                    let term = w * Complex64::from_polar(1.0, -lam * t);
                    b += term;
                    b_dot += Complex64::new(0.0, -lam) * term;
                }
                (b, b_dot)
            })
            .collect();

        let samples = NORM_SAMPLES.min(t_grid.len());
        for i in 0..samples {
            let idx = if samples == 1 { 0 } else { i * (t_grid.len() - 1) / (samples - 1) };
            let drift = self.norm_drift(t_grid[idx]);
            if drift > NORM_TOL {
                return Err(Error::NormDrift { drift });
            }
        }

        let (b, b_dot): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let b_tilde = b.iter().map(|z| (1.0 - z.norm_sqr()).max(0.0).sqrt()).collect();
        let mut traj = AmplitudeTrajectory {
            t: t_grid.to_vec(),
            b,
            b_dot,
            b_tilde,
            omega_shift: Vec::new(),
            gamma_rate: Vec::new(),
            convergence_deviation: None,
        };
        derive_rates(&mut traj);
        Ok(traj)
    }

    /// Lowest eigenstate if it lies below ω_c − 3Δω_edge, else `None`.
    pub fn bound_state_overlap(&self) -> Option<BoundOverlap> {
        let threshold = self.omega_c - 3.0 * self.edge_spacing;
        let (n, &energy) = self
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))?;
        (energy < threshold).then(|| BoundOverlap {
            energy,
            overlap_sqr: self.vectors.read(0, n).powi(2),
        })
    }
}

/// Uniform grid 0, dt, …, t_max.
pub fn time_grid(dt: f64, t_max: f64) -> Vec<f64> {
    let n = (t_max / dt).round() as usize;
    (0..=n).map(|i| i as f64 * dt).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_emitter_oscillates_freely() {
        let r = ReservoirParams::with_eta(0.0);
        let e = EmitterParams::new(0.3, &r).unwrap();
        let bath = DiscretizedBath::new(&r, 50).unwrap();
        let spectrum = diagonalize(&bath, &e, &r);
        let traj = spectrum.evolve_exact(&time_grid(0.1, 5.0)).unwrap();
        for (t, b) in traj.t.iter().zip(&traj.b) {
            assert!((b - Complex64::from_polar(1.0, -0.3 * t)).norm() < 1e-12);
        }
    }

    #[test]
    fn small_bath_conserves_norm() {
        let r = ReservoirParams::default();
        let e = EmitterParams::new(0.1, &r).unwrap();
        let bath = DiscretizedBath::new(&r, 200).unwrap();
        let spectrum = diagonalize(&bath, &e, &r);
        for t in [0.0, 1.0, 7.5, 30.0] {
            assert!(spectrum.norm_drift(t) < 1e-10);
        }
    }

    #[test]
    fn grid_is_midpoint() {
        let r = ReservoirParams::default();
        let bath = DiscretizedBath::new(&r, 4000).unwrap();
        assert!((bath.k_grid[0] - 0.00125).abs() < 1e-15);
        assert!((bath.dk - 0.0025).abs() < 1e-15);
        // widest spacing sits at k_max where dω/dk = 18
        assert!((bath.recurrence_time() - 2.0 * PI / (18.0 * 0.0025)).abs() < 0.5);
    }
}
