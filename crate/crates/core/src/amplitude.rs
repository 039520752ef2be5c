//! Excited-state amplitude b(t) from the memory-kernel equation
//!
//! ```text
//! ḃ(t) + i ω₀ b(t) + ∫₀ᵗ f(t − τ) b(τ) dτ = 0,   b(0) = 1,
//! ```
//!
//! and the time-local rates Ω(t) = −Im[ḃ/b], γ(t) = −Re[ḃ/b].
//!
//! The history integral uses product integration: b is interpolated piecewise
//! linearly on the grid and each hat function is integrated against the
//! kernel exactly (for spectral kernels) or with a Gauss rule (for closed-form
//! kernels). The kernel is therefore never sampled pointwise, which matters
//! because its high-frequency content (ω up to ω(k_max)) is barely resolved
//! by practical time steps. The local term is advanced with the trapezoidal
//! rule; the scheme is linear in the new value, so the implicit step is solved
//! exactly instead of by predictor–corrector iteration.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::reservoir::{EmitterParams, ReservoirParams, SpectralNodes};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Below this |b| the rates are reported as undefined.
pub const RATE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMode {
    /// Full cutoff kernel integral.
    #[default]
    FullIntegral,
    /// Stationary-phase band-edge approximation.
    BandEdge,
    /// Delta-correlated baseline decaying at the natural rate η·ω₀.
    Markovian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_max: f64,
    pub kernel_mode: KernelMode,
    /// Re-run at dt/2 and record the largest deviation on the coarse grid.
    pub convergence_check: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_max: 50.0,
            kernel_mode: KernelMode::FullIntegral,
            convergence_check: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_max > self.dt && self.t_max.is_finite()) {
            return Err(Error::param(
                "t_max",
                format!("must exceed dt = {}, got {}", self.dt, self.t_max),
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

/// Product-integration weights of a kernel on the grid s = m·dt.
///
/// With hat functions φ_j centred on the grid,
/// `descending[m] = ∫_{m dt}^{(m+1) dt} f(s) (1 − (s − m dt)/dt) ds` and
/// `ascending[m] = ∫_{(m−1) dt}^{m dt} f(s) (s − (m−1) dt)/dt ds`, so the
/// convolution at t_n is
/// `ascending[n]·b₀ + Σ_{j=1}^{n−1} (descending[n−j] + ascending[n−j])·b_j + descending[0]·b_n`.
#[derive(Debug, Clone)]
pub struct ConvolutionWeights {
    dt: f64,
    descending: Vec<Complex64>,
    ascending: Vec<Complex64>,
    /// Extra local decay added to iω₀ (Markovian baseline only).
    local_rate: f64,
}

impl ConvolutionWeights {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.descending.len() - 1
    }

    /// Weights for a kernel given as Σ_j w_j exp(−i ω_j s), integrated exactly
    /// against each hat function.
    pub fn from_spectral(nodes: &SpectralNodes, dt: f64, steps: usize) -> Self {
        // H(ω) = ∫₀^dt (1 − s/dt) e^{−iωs} ds; descending uses H(ω), ascending H(−ω) = H(ω)*.
        let n = nodes.len();
        let mut a_re = Vec::with_capacity(n);
        let mut a_im = Vec::with_capacity(n);
        for (&w, &c) in nodes.omega.iter().zip(&nodes.weight) {
            let h = half_hat_moment(w * dt) * dt;
            a_re.push(c * h.re);
            a_im.push(c * h.im);
        }
        // P_m = Σ c Re H e^{−iω m dt}, Q_m = Σ c Im H e^{−iω m dt}
        // descending = P + iQ, ascending = P − iQ.
        let mut descending = vec![Complex64::new(0.0, 0.0); steps + 1];
        let mut ascending = vec![Complex64::new(0.0, 0.0); steps + 1];
        let (rot_re, rot_im): (Vec<f64>, Vec<f64>) = nodes
            .omega
            .iter()
            .map(|&w| {
                let (s, c) = (w * dt).sin_cos();
                (c, -s)
            })
            .unzip();
        let mut z_re = vec![0.0; n];
        let mut z_im = vec![0.0; n];
        const RESEED: usize = 256;
        for m in 0..=steps {
            if m % RESEED == 0 {
                let t = m as f64 * dt;
                for j in 0..n {
                    let (s, c) = (nodes.omega[j] * t).sin_cos();
                    z_re[j] = c;
                    z_im[j] = -s;
                }
            }
            let (p, q) = phasor_step(&mut z_re, &mut z_im, &rot_re, &rot_im, &a_re, &a_im);
            descending[m] = p + I * q;
            ascending[m] = p - I * q;
        }
        ascending[0] = Complex64::new(0.0, 0.0);
        Self {
            dt,
            descending,
            ascending,
            local_rate: 0.0,
        }
    }

    /// Weights for a closed-form kernel, integrated with a Gauss rule on each
    /// step. The first interval uses s = dt·v² so integrable s^{−1/2}
    /// singularities at the origin are handled.
    pub fn from_fn<F: Fn(f64) -> Complex64>(kernel: F, dt: f64, steps: usize) -> Self {
        let rule = GaussLegendre::new(12);
        let mut descending = vec![Complex64::new(0.0, 0.0); steps + 1];
        let mut ascending = vec![Complex64::new(0.0, 0.0); steps + 1];
        for m in 0..steps.max(1) {
            let lo = m as f64 * dt;
            // M0 = ∫ f, M1 = ∫ f·(s − lo)/dt over [lo, lo + dt].
            let (m0, m1) = if m == 0 {
                rule.mapped(0.0, 1.0).fold(
                    (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
                    |(a, b), (v, w)| {
                        let x = v * v;
                        let f = kernel(dt * x) * (2.0 * dt * v * w);
                        (a + f, b + f * x)
                    },
                )
            } else {
                rule.mapped(0.0, 1.0).fold(
                    (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
                    |(a, b), (x, w)| {
                        let f = kernel(lo + dt * x) * (dt * w);
                        (a + f, b + f * x)
                    },
                )
            };
            descending[m] = m0 - m1;
            ascending[m + 1] = m1;
        }
        if steps > 0 {
            // descending[steps] is only needed past the horizon; fill for completeness.
            let lo = steps as f64 * dt;
            let d: Complex64 = rule
                .mapped(0.0, 1.0)
                .map(|(x, w)| kernel(lo + dt * x) * (dt * w * (1.0 - x)))
                .sum();
            descending[steps] = d;
        }
        Self {
            dt,
            descending,
            ascending,
            local_rate: 0.0,
        }
    }

    /// No memory: ḃ = −(iω₀ + Γ/2) b with Γ = η·ω₀ the population decay rate.
    pub fn markovian(population_rate: f64, dt: f64, steps: usize) -> Self {
        Self {
            dt,
            descending: vec![Complex64::new(0.0, 0.0); steps + 1],
            ascending: vec![Complex64::new(0.0, 0.0); steps + 1],
            local_rate: 0.5 * population_rate,
        }
    }

    /// Builds the weights the configured kernel mode calls for.
    pub fn for_config(reservoir: &ReservoirParams, emitter: &EmitterParams, cfg: &SolverConfig) -> Result<Self> {
        reservoir.validate()?;
        cfg.validate()?;
        let steps = cfg.steps();
        Ok(match cfg.kernel_mode {
            KernelMode::FullIntegral => {
                let nodes = reservoir.kernel_nodes(steps as f64 * cfg.dt, reservoir.n_quad);
                Self::from_spectral(&nodes, cfg.dt, steps)
            }
            KernelMode::BandEdge => {
                let r = reservoir.clone();
                Self::from_fn(
                    move |s| {
                        if s > 0.0 {
                            r.band_edge_kernel(s).unwrap_or_default()
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    },
                    cfg.dt,
                    steps,
                )
            }
            KernelMode::Markovian => Self::markovian(emitter.gamma_natural(), cfg.dt, steps),
        })
    }
}

/// ∫₀¹ (1 − σ) e^{−ixσ} dσ = (1 − ix − e^{−ix}) / x².
fn half_hat_moment(x: f64) -> Complex64 {
    if x.abs() < 1e-2 {
        // Series to O(x⁶); truncation error below 1e-16 here.
        let x2 = x * x;
        Complex64::new(
            0.5 - x2 / 24.0 + x2 * x2 / 720.0 - x2 * x2 * x2 / 40320.0,
            -x / 6.0 + x * x2 / 120.0 - x * x2 * x2 / 5040.0,
        )
    } else {
        let (s, c) = x.sin_cos();
        // e^{−ix} = cos x − i sin x
        Complex64::new(1.0 - c, -x + s) / (x * x)
    }
}

/// Rotates every phasor by its per-step factor and returns the two weighted sums
/// taken before the rotation.
#[inline]
fn phasor_step(
    z_re: &mut [f64],
    z_im: &mut [f64],
    r_re: &[f64],
    r_im: &[f64],
    a_re: &[f64],
    a_im: &[f64],
) -> (Complex64, Complex64) {
    const LANES: usize = 4;
    let mut p_re = [0.0; LANES];
    let mut p_im = [0.0; LANES];
    let mut q_re = [0.0; LANES];
    let mut q_im = [0.0; LANES];
    let n = z_re.len();
    let chunks = n / LANES;
    for c in 0..chunks {
        for l in 0..LANES {
            let j = c * LANES + l;
            let (x, y) = (z_re[j], z_im[j]);
            p_re[l] += a_re[j] * x;
            p_im[l] += a_re[j] * y;
            q_re[l] += a_im[j] * x;
            q_im[l] += a_im[j] * y;
            z_re[j] = x * r_re[j] - y * r_im[j];
            z_im[j] = x * r_im[j] + y * r_re[j];
        }
    }
    for j in chunks * LANES..n {
        let (x, y) = (z_re[j], z_im[j]);
        p_re[0] += a_re[j] * x;
        p_im[0] += a_re[j] * y;
        q_re[0] += a_im[j] * x;
        q_im[0] += a_im[j] * y;
        z_re[j] = x * r_re[j] - y * r_im[j];
        z_im[j] = x * r_im[j] + y * r_re[j];
    }
    (
        Complex64::new(p_re.iter().sum(), p_im.iter().sum()),
        Complex64::new(q_re.iter().sum(), q_im.iter().sum()),
    )
}

/// Time-gridded amplitude with its derivative and derived rates.
#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    pub t: Vec<f64>,
    pub b: Vec<Complex64>,
    /// ḃ from the right-hand side of the equation of motion.
    pub b_dot: Vec<Complex64>,
    pub b_tilde: Vec<f64>,
    /// Ω(t); `None` where |b| < [`RATE_FLOOR`].
    pub omega_shift: Vec<Option<f64>>,
    /// γ(t); `None` where |b| < [`RATE_FLOOR`].
    pub gamma_rate: Vec<Option<f64>>,
    /// Largest |b_dt − b_{dt/2}| on the coarse grid, when requested.
    pub convergence_deviation: Option<f64>,
}

impl AmplitudeTrajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn population(&self) -> Vec<f64> {
        self.b.iter().map(|b| b.norm_sqr()).collect()
    }

    /// exp(−2 ∫₀ᵗ γ dτ) with the trapezoidal rule; `None` from the first
    /// undefined rate onwards.
    pub fn population_from_rates(&self) -> Vec<Option<f64>> {
        let mut out = Vec::with_capacity(self.len());
        let mut acc = Some(0.0);
        for i in 0..self.len() {
            if i > 0 {
                acc = match (acc, self.gamma_rate[i - 1], self.gamma_rate[i]) {
                    (Some(a), Some(g0), Some(g1)) => Some(a + 0.5 * (g0 + g1) * (self.t[i] - self.t[i - 1])),
                    _ => None,
                };
            }
            out.push(acc.map(|a| (-2.0 * a).exp()));
        }
        out
    }
}

/// Solves for b(t) with the kernel selected by `cfg.kernel_mode`, then fills
/// the rates.
pub fn solve_amplitude(
    reservoir: &ReservoirParams,
    emitter: &EmitterParams,
    cfg: &SolverConfig,
) -> Result<AmplitudeTrajectory> {
    let weights = ConvolutionWeights::for_config(reservoir, emitter, cfg)?;
    let mut traj = solve_with_weights(&weights, emitter.omega_0())?;
    if cfg.convergence_check {
        let half = SolverConfig {
            dt: 0.5 * cfg.dt,
            convergence_check: false,
            ..cfg.clone()
        };
        let fine_weights = ConvolutionWeights::for_config(reservoir, emitter, &half)?;
        let fine = solve_with_weights(&fine_weights, emitter.omega_0())?;
        let dev = traj
            .b
            .iter()
            .zip(fine.b.iter().step_by(2))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        traj.convergence_deviation = Some(dev);
    }
    Ok(traj)
}

/// Marches the equation of motion with precomputed convolution weights.
pub fn solve_with_weights(weights: &ConvolutionWeights, omega_0: f64) -> Result<AmplitudeTrajectory> {
    let n = weights.steps();
    let dt = weights.dt;
    // Full-hat weights, stored reversed so the history sum is a contiguous dot product.
    let full_rev: Vec<Complex64> = (0..=n)
        .rev()
        .map(|m| weights.descending[m] + weights.ascending[m])
        .collect();
    let d0 = weights.descending[0];
    let local = I * omega_0 + weights.local_rate;

    let mut b = Vec::with_capacity(n + 1);
    let mut b_dot = Vec::with_capacity(n + 1);
    b.push(Complex64::new(1.0, 0.0));
    b_dot.push(-local);
    let denom = 1.0 + 0.5 * dt * (local + d0);
    for m in 0..n {
        // History part of the convolution at t_{m+1}, excluding the b_{m+1} term.
        let mut hist = weights.ascending[m + 1] * b[0];
        if m > 0 {
            hist += dot(&full_rev[n - m..n], &b[1..=m]);
        }
        let next = (b[m] + 0.5 * dt * (b_dot[m] - hist)) / denom;
        let modulus = next.norm();
        if modulus > 1.0 + 1e-6 || !modulus.is_finite() {
            return Err(Error::StepSize {
                t: (m + 1) as f64 * dt,
                modulus,
            });
        }
        b_dot.push(-local * next - hist - d0 * next);
        b.push(next);
    }

    let t: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
    let b_tilde = b.iter().map(|z| (1.0 - z.norm_sqr()).max(0.0).sqrt()).collect();
    let mut traj = AmplitudeTrajectory {
        t,
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

/// Fills Ω(t) = −Im[ḃ/b] and γ(t) = −Re[ḃ/b] from the stored ḃ.
pub fn derive_rates(traj: &mut AmplitudeTrajectory) {
    let (omega, gamma): (Vec<_>, Vec<_>) = traj
        .b
        .iter()
        .zip(&traj.b_dot)
        .map(|(&b, &bd)| {
            if b.norm() < RATE_FLOOR {
                (None, None)
            } else {
                let r = bd / b;
                (Some(-r.im), Some(-r.re))
            }
        })
        .unzip();
    traj.omega_shift = omega;
    traj.gamma_rate = gamma;
}

#[inline]
fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut re = [0.0; 4];
    let mut im = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            let x = a[4 * c + l];
            let y = b[4 * c + l];
            re[l] += x.re * y.re - x.im * y.im;
            im[l] += x.re * y.im + x.im * y.re;
        }
    }
    for j in 4 * chunks..a.len() {
        let (x, y) = (a[j], b[j]);
        re[0] += x.re * y.re - x.im * y.im;
        im[0] += x.re * y.im + x.im * y.re;
    }
    Complex64::new(re.iter().sum(), im.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed form of b̈ + iω₀ḃ + c₀b = 0, b(0) = 1, ḃ(0) = −iω₀.
    fn constant_kernel_exact(c0: f64, w0: f64, t: f64) -> Complex64 {
        // r² + iω₀ r + c₀ = 0
        let disc = (Complex64::new(-w0 * w0 - 4.0 * c0, 0.0)).sqrt();
        let r1 = (-I * w0 + disc) / 2.0;
        let r2 = (-I * w0 - disc) / 2.0;
        // A + B = 1, A r1 + B r2 = −iω₀
        let a = (-I * w0 - r2) / (r1 - r2);
        let b = 1.0 - a;
        a * (r1 * t).exp() + b * (r2 * t).exp()
    }

    #[test]
    fn half_hat_series_matches_closed_form() {
        for x in [0.009, -0.009, 0.0099] {
            let (s, c) = f64::sin_cos(x);
            let direct = Complex64::new(1.0 - c, -x + s) / (x * x);
            assert!((half_hat_moment(x) - direct).norm() < 1e-9);
        }
        assert!((half_hat_moment(0.0) - Complex64::new(0.5, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn decoupled_emitter_rotates_freely() {
        let res = ReservoirParams::with_eta(0.0);
        let em = EmitterParams::new(0.1, &res).unwrap();
        let cfg = SolverConfig { t_max: 20.0, ..Default::default() };
        let traj = solve_amplitude(&res, &em, &cfg).unwrap();
        for (&t, &b) in traj.t.iter().zip(&traj.b) {
            assert!((b.norm() - 1.0).abs() < 1e-12);
            // trapezoidal rotation by the Cayley factor per step
            let n = (t / cfg.dt).round() as i32;
            let x = 0.1 * cfg.dt;
            let cayley = ((1.0 - 0.5 * I * x) / (1.0 + 0.5 * I * x)).powi(n);
            assert!((b - cayley).norm() < 1e-12, "t = {t}");
            assert!((b - (-I * 0.1 * t).exp()).norm() < 0.1f64.powi(3) * cfg.dt.powi(2) * t / 12.0 * 1.01 + 1e-14);
        }
        for (g, o) in traj.gamma_rate.iter().zip(&traj.omega_shift) {
            assert!(g.unwrap().abs() < 1e-12);
            assert!((o.unwrap() - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_kernel_matches_closed_form() {
        let (c0, w0, dt) = (0.04, 0.1, 1e-3);
        let steps = 50_000;
        let weights = ConvolutionWeights::from_fn(|_| Complex64::new(c0, 0.0), dt, steps);
        let traj = solve_with_weights(&weights, w0).unwrap();
        let worst = traj
            .t
            .iter()
            .zip(&traj.b)
            .map(|(&t, &b)| (b - constant_kernel_exact(c0, w0, t)).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "max error {worst:e}");
    }

    #[test]
    fn spectral_and_quadrature_weights_agree() {
        // Same single-mode kernel through both weight constructors.
        let nodes = SpectralNodes { omega: vec![3.0, 0.4], weight: vec![0.7, 0.2] };
        let dt = 0.05;
        let a = ConvolutionWeights::from_spectral(&nodes, dt, 400);
        let b = ConvolutionWeights::from_fn(|s| nodes.evaluate(s), dt, 400);
        for m in 0..400 {
            assert!((a.descending[m] - b.descending[m]).norm() < 1e-13, "m = {m}");
            assert!((a.ascending[m] - b.ascending[m]).norm() < 1e-13, "m = {m}");
        }
    }

    #[test]
    fn markovian_baseline_decays_monotonically() {
        let res = ReservoirParams::default();
        let em = EmitterParams::new(0.1, &res).unwrap();
        let cfg = SolverConfig { kernel_mode: KernelMode::Markovian, ..Default::default() };
        let traj = solve_amplitude(&res, &em, &cfg).unwrap();
        let pop = traj.population();
        assert!(pop.windows(2).all(|w| w[1] < w[0]));
        let t_end = *traj.t.last().unwrap();
        let expected = (-em.gamma_natural() * t_end).exp();
        assert!((pop.last().unwrap() - expected).abs() < 1e-6);
    }

    #[test]
    fn oversized_steps_are_reported() {
        // Strongly coupled kernel with a step far too coarse for it.
        let weights = ConvolutionWeights::from_fn(|s| Complex64::new(-400.0 * (1.0 + s), 0.0), 0.5, 50);
        match solve_with_weights(&weights, 0.1) {
            Err(Error::StepSize { .. }) => {}
            other => panic!("expected a step-size failure, got {other:?}"),
        }
    }

    #[test]
    fn rates_flag_small_amplitudes() {
        let mut traj = AmplitudeTrajectory {
            t: vec![0.0, 1.0],
            b: vec![Complex64::new(1.0, 0.0), Complex64::new(1e-7, 0.0)],
            b_dot: vec![Complex64::new(-0.5, 0.0), Complex64::new(-1.0, 0.0)],
            b_tilde: vec![0.0, 1.0],
            omega_shift: vec![],
            gamma_rate: vec![],
            convergence_deviation: None,
        };
        derive_rates(&mut traj);
        assert_eq!(traj.gamma_rate, vec![Some(0.5), None]);
        assert_eq!(traj.omega_shift[1], None);
    }
}
