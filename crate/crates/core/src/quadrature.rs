//! Gauss–Legendre rules and a small adaptive integrator.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Gauss–Legendre rule on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Adaptive bisection driven by a fixed Gauss–Legendre rule.
///
/// A panel is accepted once the rule on the panel and the rule on its two
/// halves agree to within the panel's share of `abs_tol`.
#[derive(Debug, Clone)]
pub struct Adaptive {
    rule: GaussLegendre,
    max_panels: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self::new(10, 200_000)
    }
}

impl Adaptive {
    pub fn new(order: usize, max_panels: usize) -> Self {
        Self {
            rule: GaussLegendre::new(order),
            max_panels,
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let width = (b - a).abs();
        let mut total = 0.0;
        let mut panels = 0usize;
        let whole = self.rule.integrate(a, b, f);
        let mut stack = vec![(a, b, whole)];
        while let Some((lo, hi, coarse)) = stack.pop() {
            panels += 1;
            if panels > self.max_panels {
                return Err(Error::QuadratureBudget { a, b });
            }
            let mid = 0.5 * (lo + hi);
            let left = self.rule.integrate(lo, mid, f);
            let right = self.rule.integrate(mid, hi, f);
            let fine = left + right;
            let share = abs_tol * (hi - lo).abs() / width;
            let tiny = (hi - lo).abs() <= 1e-15 * (1.0 + lo.abs());
            if (fine - coarse).abs() <= share.max(f64::EPSILON * fine.abs()) || tiny {
                total += fine;
            } else {
                stack.push((lo, mid, left));
                stack.push((mid, hi, right));
            }
        }
        Ok(total)
    }
}
