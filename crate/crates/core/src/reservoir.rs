//! Band-gap reservoir: dispersion, memory kernel, and static spectral integrals.
//!
//! Units: the band-edge frequency ω_c and the speed of light are both 1 by
//! default, so k₀ = 1 and the curvature A = 1. Time is measured in 1/ω_c.
//!
//! The memory kernel
//!
//! ```text
//! f(s) = η ∫₀^{k_max} k² / ω_k · exp(-i ω_k s) dk,    ω_k = ω_c + A (k − k₀)²
//! ```
//!
//! has an integrand of constant magnitude at large k, so it only exists with
//! the hard cutoff `k_max`. Short-time transients depend on that cutoff. The
//! static integral behind the bound-state condition decays like k⁻² and is
//! evaluated without a cutoff unless [`SpectralCutoff::AtKmax`] is requested.

use crate::error::{Error, Result};
use crate::quadrature::{Adaptive, GaussLegendre};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

/// Dispersion and coupling parameters of the structured bath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReservoirParams {
    /// Band-edge frequency ω_c.
    pub omega_c: f64,
    /// Dispersion curvature A (units ω_c·k₀⁻²).
    pub curvature: f64,
    /// Band-edge wave vector k₀.
    pub k0: f64,
    /// Dimensionless coupling η.
    pub eta: f64,
    /// Ultraviolet cutoff of the kernel integral.
    pub k_max: f64,
    /// Gauss–Legendre nodes per phase-resolved panel.
    pub n_quad: usize,
    /// Relative change tolerated when the kernel rule is doubled.
    pub kernel_rel_tol: f64,
    /// Absolute tolerance of the static spectral integrals.
    pub spectral_abs_tol: f64,
}

impl Default for ReservoirParams {
    fn default() -> Self {
        Self {
            omega_c: 1.0,
            curvature: 1.0,
            k0: 1.0,
            eta: 0.2,
            k_max: 10.0,
            n_quad: 8,
            kernel_rel_tol: 1e-6,
            spectral_abs_tol: 1e-9,
        }
    }
}

/// Which upper limit the static spectral integrals use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralCutoff {
    /// Integrate to k = ∞.
    #[default]
    Unbounded,
    /// Truncate at the reservoir's `k_max`, matching the dynamical model.
    AtKmax,
}

/// Two-level emitter coupled to the reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterParams {
    omega_0: f64,
    gamma_natural: f64,
}

impl EmitterParams {
    pub fn new(omega_0: f64, reservoir: &ReservoirParams) -> Result<Self> {
        if !(omega_0 > 0.0 && omega_0.is_finite()) {
            return Err(Error::param("omega_0", format!("must be positive and finite, got {omega_0}")));
        }
        Ok(Self {
            omega_0,
            gamma_natural: reservoir.eta * omega_0,
        })
    }

    /// Transition frequency ω₀.
    pub fn omega_0(&self) -> f64 {
        self.omega_0
    }

    /// Natural spontaneous emission rate η·ω₀.
    pub fn gamma_natural(&self) -> f64 {
        self.gamma_natural
    }
}

impl ReservoirParams {
    /// Parameters with the default units and the given coupling.
    pub fn with_eta(eta: f64) -> Self {
        Self {
            eta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive and finite, got {v}")))
            }
        };
        positive("omega_c", self.omega_c)?;
        positive("curvature", self.curvature)?;
        positive("k0", self.k0)?;
        positive("kernel_rel_tol", self.kernel_rel_tol)?;
        positive("spectral_abs_tol", self.spectral_abs_tol)?;
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::param("eta", format!("must be non-negative, got {}", self.eta)));
        }
        if !(self.k_max > self.k0) || self.k_max.is_nan() {
            return Err(Error::param(
                "k_max",
                format!("must exceed k0 = {}, got {}", self.k0, self.k_max),
            ));
        }
        if self.n_quad < 8 {
            return Err(Error::param("n_quad", format!("must be at least 8, got {}", self.n_quad)));
        }
        Ok(())
    }

    /// ω_k = ω_c + A (k − k₀)².
    pub fn dispersion(&self, k: f64) -> Result<f64> {
        if !(k >= 0.0) {
            return Err(Error::param("k", format!("wave vector must be non-negative, got {k}")));
        }
        Ok(self.omega_at(k))
    }

    #[inline]
    pub(crate) fn omega_at(&self, k: f64) -> f64 {
        let u = k - self.k0;
        self.omega_c + self.curvature * u * u
    }

    /// Kernel spectral weight η k² / ω_k (c = 1).
    #[inline]
    pub(crate) fn kernel_weight(&self, k: f64) -> f64 {
        self.eta * k * k / self.omega_at(k)
    }

    /// Memory kernel f(s) by phase-resolved panel quadrature.
    ///
    /// The rule is evaluated with `n_quad` and `2·n_quad` nodes per panel and
    /// the finer value is returned; a relative disagreement above
    /// `kernel_rel_tol` is reported as non-convergence.
    pub fn memory_kernel(&self, s: f64) -> Result<Complex64> {
        self.validate()?;
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::param("s", format!("elapsed time must be non-negative, got {s}")));
        }
        let coarse = self.kernel_nodes(s, self.n_quad).evaluate(s);
        let fine = self.kernel_nodes(s, 2 * self.n_quad).evaluate(s);
        let change = (fine - coarse).norm();
        let floor = 1e-14 * self.eta * self.k_max;
        if change > self.kernel_rel_tol * fine.norm() + floor {
            return Err(Error::KernelNonConvergence {
                s,
                change: change / fine.norm().max(f64::MIN_POSITIVE),
                tol: self.kernel_rel_tol,
            });
        }
        Ok(fine)
    }

    /// Quadrature nodes of the kernel integral whose panels resolve the phase
    /// ω_k·s for every s ≤ `s_max`: no panel accumulates more than π/4 of
    /// phase at the largest |dω_k/dk| inside it.
    pub fn kernel_nodes(&self, s_max: f64, n_quad: usize) -> SpectralNodes {
        let rule = GaussLegendre::new(n_quad);
        let mut omega = Vec::new();
        let mut weight = Vec::new();
        for (a, b) in self.kernel_panels(s_max) {
            for (k, w) in rule.mapped(a, b) {
                omega.push(self.omega_at(k));
                weight.push(w * self.kernel_weight(k));
            }
        }
        SpectralNodes { omega, weight }
    }

    fn kernel_panels(&self, s_max: f64) -> Vec<(f64, f64)> {
        // Amplitude k²/ω_k varies on the scale √(ω_c/A); keep panels well below it.
        let h_cap = 0.25 * (self.omega_c / self.curvature).sqrt().min(self.k0);
        // Phase budget: 2·A·s·|k − k₀|·h ≤ π/4.
        let phase_c = if s_max > 0.0 {
            FRAC_PI_4 / (2.0 * self.curvature * s_max)
        } else {
            f64::INFINITY
        };
        let width = |dist: f64| -> f64 {
            if phase_c.is_infinite() {
                return h_cap;
            }
            // h (dist + h) = phase_c
            let h = 0.5 * (-dist + (dist * dist + 4.0 * phase_c).sqrt());
            h.min(h_cap)
        };
        let mut panels = Vec::new();
        // Below k₀, marching down to k = 0.
        let mut dist = 0.0;
        while dist < self.k0 {
            let h = width(dist).min(self.k0 - dist);
            panels.push((self.k0 - dist - h, self.k0 - dist));
            dist += h;
            if self.k0 - dist < 1e-14 * self.k0 {
                break;
            }
        }
        panels.reverse();
        let span = self.k_max - self.k0;
        let mut dist = 0.0;
        while dist < span {
            let h = width(dist).min(span - dist);
            panels.push((self.k0 + dist, self.k0 + dist + h));
            dist += h;
            if span - dist < 1e-14 * span {
                break;
            }
        }
        panels
    }

    /// Stationary-phase approximation of the kernel around k = k₀:
    /// η √(π/s) e^{−i(ω_c s + π/4)} k₀² / (ω_c √A).
    ///
    /// Only valid for large s, where the band edge dominates; it is a cross
    /// check, not what the dynamics use by default.
    pub fn band_edge_kernel(&self, s: f64) -> Result<Complex64> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::param("s", format!("band-edge kernel needs s > 0, got {s}")));
        }
        let magnitude = self.eta * (PI / s).sqrt() * self.k0 * self.k0 / (self.omega_c * self.curvature.sqrt());
        Ok(Complex64::from_polar(magnitude, -(self.omega_c * s + FRAC_PI_4)))
    }

    /// η ∫₀^∞ k² / ((E − ω_k) ω_k) dk for E < ω_c.
    pub fn spectral_integral(&self, energy: f64) -> Result<f64> {
        self.spectral_integral_with(energy, SpectralCutoff::Unbounded)
    }

    /// [`spectral_integral`](Self::spectral_integral) with an explicit upper limit.
    pub fn spectral_integral_with(&self, energy: f64, cutoff: SpectralCutoff) -> Result<f64> {
        self.static_integral(energy, cutoff, 1)
    }

    /// η ∫ k² / ((E − ω_k)² ω_k) dk, i.e. −dy/dE, for E < ω_c.
    pub fn spectral_slope(&self, energy: f64, cutoff: SpectralCutoff) -> Result<f64> {
        self.static_integral(energy, cutoff, 2)
    }

    fn static_integral(&self, energy: f64, cutoff: SpectralCutoff, power: i32) -> Result<f64> {
        self.validate()?;
        if !(energy < self.omega_c) {
            return Err(Error::param(
                "E",
                format!("trial energy must lie below the band edge {}, got {energy}", self.omega_c),
            ));
        }
        if self.eta == 0.0 {
            return Ok(0.0);
        }
        let delta = self.omega_c - energy;
        let integrand = |k: f64| {
            let w = self.omega_at(k);
            // E − ω_k formed without cancellation against ω_c
            let gap = -(delta + self.curvature * (k - self.k0) * (k - self.k0));
            k * k / (gap.powi(power) * w)
        };
        // Breakpoints bracket the Lorentzian-like peak of width √(δ/A) at k₀.
        let width = (delta / self.curvature).sqrt();
        let far = match cutoff {
            SpectralCutoff::AtKmax => self.k_max,
            SpectralCutoff::Unbounded => 2.0 * self.k0 + 10.0 * (self.omega_c / self.curvature).sqrt(),
        };
        let mut cuts = vec![0.0, self.k0, far];
        for m in [1.0, 10.0, 100.0] {
            cuts.push(self.k0 - m * width);
            cuts.push(self.k0 + m * width);
        }
        cuts.retain(|&c| (0.0..=far).contains(&c));
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();

        let tol = self.spectral_abs_tol / self.eta;
        let pieces = cuts.len() as f64;
        let adaptive = Adaptive::default();
        let mut total = 0.0;
        for pair in cuts.windows(2) {
            total += adaptive.integrate(&integrand, pair[0], pair[1], tol / pieces)?;
        }
        if cutoff == SpectralCutoff::Unbounded {
            // k = far / x maps [far, ∞) onto (0, 1]; the integrand decays like k⁻²
            // (or faster), so the mapped integrand stays bounded as x → 0.
            let mapped = |x: f64| {
                if x <= 0.0 {
                    return 0.0;
                }
                let k = far / x;
                integrand(k) * far / (x * x)
            };
            total += adaptive.integrate(&mapped, 0.0, 1.0, tol / pieces)?;
        }
        Ok(self.eta * total)
    }
}

/// Discrete spectral representation f(s) = Σ_j w_j exp(−i ω_j s).
#[derive(Debug, Clone, Default)]
pub struct SpectralNodes {
    pub omega: Vec<f64>,
    pub weight: Vec<f64>,
}

impl SpectralNodes {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn evaluate(&self, s: f64) -> Complex64 {
        self.sum_with_phase(-s)
    }

    /// Same rule with exp(+i ω_j s).
    pub fn evaluate_advanced(&self, s: f64) -> Complex64 {
        self.sum_with_phase(s)
    }

    fn sum_with_phase(&self, s: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (&w, &a) in self.omega.iter().zip(&self.weight) {
            let (sin, cos) = (w * s).sin_cos();
            re += a * cos;
            im += a * sin;
        }
        Complex64::new(re, im)
    }
}
