//! Emitter–field bound state in the single-excitation sector.
//!
//! A bound state is a root E₁ < ω_c of
//!
//! ```text
//! y(E) = ω₀ + η ∫ k² / ((E − ω_k) ω_k) dk = E.
//! ```
//!
//! y is strictly decreasing below the band edge, so y(E) − E has at most one
//! root there. Its overlap with the bare excited state is the resolvent
//! residue
//!
//! ```text
//! Z = [1 + η ∫ k² / ((E₁ − ω_k)² ω_k) dk]⁻¹,
//! ```
//!
//! which is also the long-time modulus |b(∞)| of the amplitude.
//!
//! With a quadratic band edge the integrand near k₀ behaves like
//! −1/(δ + A(k − k₀)²) with δ = ω_c − E, so y(E) diverges to −∞ like
//! −η π k₀² / (ω_c √(A δ)) as E → ω_c⁻. The edge test therefore finds a root
//! for every finite ω₀; for ω₀ far above the band the root sits just below
//! ω_c with a residue that is tiny but nonzero.

use crate::error::{Error, Result};
use crate::reservoir::{EmitterParams, ReservoirParams, SpectralCutoff};

/// Distance below ω_c at which the existence test evaluates y.
pub const EDGE_OFFSET: f64 = 1e-6;
/// Root acceptance: |y(E₁) − E₁| below this.
pub const ROOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateResult {
    pub exists: bool,
    /// y(ω_c − ε) − (ω_c − ε) vanished to within [`ROOT_TOL`]; reported with `exists = false`.
    pub marginal: bool,
    pub energy: Option<f64>,
    pub residue: Option<f64>,
    /// y(ω_c − ε) with ε = [`EDGE_OFFSET`].
    pub y_at_edge: f64,
    /// Coefficient c of the fitted edge behaviour y ≈ y_reg + c/√δ, from δ = ε
    /// and 4ε. A negative value means y → −∞ at the band edge.
    pub edge_coefficient: f64,
}

/// Bound-state search over y(E) with a configurable spectral cutoff.
#[derive(Debug, Clone)]
pub struct BoundStateSolver<'a> {
    reservoir: &'a ReservoirParams,
    omega_0: f64,
    cutoff: SpectralCutoff,
}

impl<'a> BoundStateSolver<'a> {
    pub fn new(reservoir: &'a ReservoirParams, emitter: &EmitterParams) -> Self {
        Self {
            reservoir,
            omega_0: emitter.omega_0(),
            cutoff: SpectralCutoff::Unbounded,
        }
    }

    pub fn with_cutoff(mut self, cutoff: SpectralCutoff) -> Self {
        self.cutoff = cutoff;
        self
    }

    /// y(E) for E < ω_c.
    pub fn y(&self, energy: f64) -> Result<f64> {
        Ok(self.omega_0 + self.reservoir.spectral_integral_with(energy, self.cutoff)?)
    }

    pub fn y_minus_e(&self, energy: f64) -> Result<f64> {
        Ok(self.y(energy)? - energy)
    }

    pub fn find(&self) -> Result<BoundStateResult> {
        let r = self.reservoir;
        r.validate()?;
        let upper = r.omega_c - EDGE_OFFSET;
        let y_edge = self.y(upper)?;
        let g_upper = y_edge - upper;
        let y_far = self.y(r.omega_c - 4.0 * EDGE_OFFSET)?;
        let edge_coefficient = 2.0 * EDGE_OFFSET.sqrt() * (y_edge - y_far);

        if g_upper >= 0.0 || g_upper.abs() < ROOT_TOL {
            return Ok(BoundStateResult {
                exists: false,
                marginal: g_upper.abs() < ROOT_TOL,
                energy: None,
                residue: None,
                y_at_edge: y_edge,
                edge_coefficient,
            });
        }

        // Bracket from below, starting a coupling-sized shift under ω₀.
        let shift = 10.0 * r.eta * self.omega_0;
        let mut lower = (self.omega_0 - shift).min(upper - shift.max(1e-3));
        let mut g_lower = self.y_minus_e(lower)?;
        let mut expansions = 0;
        while g_lower < 0.0 {
            let gap = (r.omega_c - lower).max(1.0);
            lower = r.omega_c - 2.0 * gap;
            g_lower = self.y_minus_e(lower)?;
            expansions += 1;
            if expansions > 200 {
                return Err(Error::Bracket(format!(
                    "y(E) − E stayed negative down to E = {lower}"
                )));
            }
        }
        let energy = self.bisect(lower, g_lower, upper, g_upper)?;
        let residue = self.residue(energy)?;
        Ok(BoundStateResult {
            exists: true,
            marginal: false,
            energy: Some(energy),
            residue: Some(residue),
            y_at_edge: y_edge,
            edge_coefficient,
        })
    }

    fn bisect(&self, mut lo: f64, g_lo: f64, mut hi: f64, g_hi: f64) -> Result<f64> {
        if g_lo == 0.0 {
            return Ok(lo);
        }
        // Illinois false position; (f_lo, f_hi) are the scaled secant values,
        // (g_lo, g_hi) the true ones used for the monotonicity check.
        let (mut g_lo, mut g_hi) = (g_lo, g_hi);
        let (mut f_lo, mut f_hi) = (g_lo, g_hi);
        let mut side = 0i8;
        for _ in 0..400 {
            let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            if !(x > lo && x < hi) {
                x = 0.5 * (lo + hi);
            }
            let g = self.y_minus_e(x)?;
            if g.abs() < ROOT_TOL {
                return Ok(x);
            }
            if g > g_lo || g < g_hi {
                return Err(Error::Bracket(format!(
                    "y(E) − E is not monotone on [{lo}, {hi}]: {g:e} at E = {x}"
                )));
            }
            if g > 0.0 {
                lo = x;
                g_lo = g;
                f_lo = g;
                if side == 1 {
                    f_hi *= 0.5;
                }
                side = 1;
            } else {
                hi = x;
                g_hi = g;
                f_hi = g;
                if side == -1 {
                    f_lo *= 0.5;
                }
                side = -1;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
                break;
            }
        }
        let x = 0.5 * (lo + hi);
        let g = self.y_minus_e(x)?;
        if g.abs() < ROOT_TOL {
            Ok(x)
        } else {
            Err(Error::Bracket(format!(
                "root bracket collapsed at E = {x} with residual {g:e}; quadrature tolerance too loose"
            )))
        }
    }

    /// Z = [1 + η ∫ k² / ((E₁ − ω_k)² ω_k) dk]⁻¹.
    pub fn residue(&self, energy: f64) -> Result<f64> {
        let slope = self.reservoir.spectral_slope(energy, self.cutoff)?;
        Ok(1.0 / (1.0 + slope))
    }

    /// (E, y(E) − E) samples for plotting the graphical root construction.
    pub fn curve(&self, energies: &[f64]) -> Result<Vec<(f64, f64)>> {
        energies
            .iter()
            .map(|&e| self.y_minus_e(e).map(|g| (e, g)))
            .collect()
    }
}

/// Bound state with the cutoff-free spectral integral.
pub fn find_bound_state(reservoir: &ReservoirParams, emitter: &EmitterParams) -> Result<BoundStateResult> {
    BoundStateSolver::new(reservoir, emitter).find()
}

/// Residue weight at a bound-state energy, cutoff-free.
pub fn residue_weight(reservoir: &ReservoirParams, energy: f64) -> Result<f64> {
    if !(energy < reservoir.omega_c) {
        return Err(Error::param(
            "E1",
            format!("bound-state energy must lie below ω_c = {}, got {energy}", reservoir.omega_c),
        ));
    }
    Ok(1.0 / (1.0 + reservoir.spectral_slope(energy, SpectralCutoff::Unbounded)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solver_for(eta: f64, w0: f64) -> (ReservoirParams, EmitterParams) {
        let r = ReservoirParams::with_eta(eta);
        let e = EmitterParams::new(w0, &r).unwrap();
        (r, e)
    }

    #[test]
    fn weak_coupling_root_sits_at_omega_0() {
        let (r, e) = solver_for(1e-7, 0.1);
        let bs = find_bound_state(&r, &e).unwrap();
        assert!(bs.exists);
        assert!((bs.energy.unwrap() - 0.1).abs() < 1e-5);
        assert!((bs.residue.unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn in_gap_emitter_is_bound() {
        let (r, e) = solver_for(0.2, 0.1);
        let bs = find_bound_state(&r, &e).unwrap();
        assert!(bs.exists);
        let e1 = bs.energy.unwrap();
        assert!(e1 < 1.0);
        let s = BoundStateSolver::new(&r, &e);
        assert!(s.y_minus_e(e1).unwrap().abs() < ROOT_TOL);
        let z = bs.residue.unwrap();
        assert!(z > 0.0 && z <= 1.0);
    }

    #[test]
    fn band_edge_divergence_is_detected() {
        let (r, e) = solver_for(0.2, 1.0);
        let bs = find_bound_state(&r, &e).unwrap();
        // y ~ −η π / √δ near the edge: coefficient ≈ −0.2 π
        assert!((bs.edge_coefficient + 0.2 * std::f64::consts::PI).abs() < 1e-2, "{}", bs.edge_coefficient);
    }

    #[test]
    fn residue_rejects_band_energies() {
        let r = ReservoirParams::default();
        assert!(residue_weight(&r, 1.0).is_err());
        assert!(residue_weight(&r, 0.5).unwrap() > 0.0);
    }

    #[test]
    fn deeper_in_gap_binds_more_strongly() {
        let z_at = |w0| {
            let (r, e) = solver_for(0.2, w0);
            find_bound_state(&r, &e).unwrap().residue.unwrap()
        };
        assert!(z_at(0.5) < z_at(0.1));
    }
}
