//! Quadrature building blocks: Gauss–Legendre rules, adaptive panel
//! integration on intervals and compactified integration over the plane.

use crate::bubble_core::Point2;
use crate::error::{Error, Result};
use gauss_quad::GaussLegendre;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

/// Gauss–Legendre nodes and weights mapped to `[a, b]`, ordered by increasing node.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n.max(1)).expect("n >= 1");
    let rule = GaussLegendre::new(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut out: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect();
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out
}

/// Result of an adaptive quadrature: value and an estimate of the absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

const PANEL_ORDER: usize = 15;
const MAX_DEPTH: usize = 40;

/// Adaptive Gauss–Legendre integration of `f` over `[a, b]`.
///
/// Each panel is integrated with a 15-point rule and compared with the sum of
/// the two half-panels; panels are bisected until the difference falls below
/// their share of `tol`. Returns an error carrying the achieved bound if the
/// recursion depth is exhausted.
pub fn adaptive_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    let rule = gauss_legendre(PANEL_ORDER, -1.0, 1.0);
    let panel = |lo: f64, hi: f64| -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
    };
    let mut value = 0.0;
    let mut error = 0.0;
    let mut failed = false;
    // Explicit stack keeps the summation order deterministic.
    let mut stack = vec![(a, b, panel(a, b), 0usize)];
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(lo, mid);
        let right = panel(mid, hi);
        let diff = (left + right - whole).abs();
        let share = tol * (hi - lo) / (b - a);
        if diff <= share || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH && diff > share {
                failed = true;
            }
            value += left + right;
            error += diff;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    if failed && error > tol {
        return Err(Error::Accuracy { bound: error, tol });
    }
    Ok(QuadResult { value, error })
}

/// Integral of `f` over the whole plane.
///
/// Polar coordinates with the compactifying substitution `r = tan s`
/// (`s ∈ [0, π/2)`): adaptive Gauss–Legendre in `s` and a uniform trapezoid
/// rule with `n_angle` nodes in the angle. Suitable for integrands decaying
/// like `|ξ|⁻⁴`.
pub fn plane_integral<F: Fn(Point2) -> f64>(f: F, n_angle: usize, tol: f64) -> Result<QuadResult> {
    let n_angle = n_angle.max(1);
    let dtheta = 2.0 * PI / n_angle as f64;
    let radial = |s: f64| -> f64 {
        if s >= 0.5 * PI {
            return 0.0;
        }
        let r = s.tan();
        let jac = r / (s.cos() * s.cos());
        let mut acc = 0.0;
        for j in 0..n_angle {
            let t = j as f64 * dtheta;
            acc += f(Point2::new(r * t.cos(), r * t.sin()));
        }
        acc * dtheta * jac
    };
    adaptive_integrate(radial, 0.0, 0.5 * PI, tol)
}

/// Integral of `f` over the angular sector `[t0, t1]` of the plane
/// (same compactification as [`plane_integral`]).
pub fn sector_integral<F: Fn(Point2) -> f64>(
    f: F,
    t0: f64,
    t1: f64,
    n_angle: usize,
    tol: f64,
) -> Result<QuadResult> {
    let rule = gauss_legendre(n_angle.max(1), t0, t1);
    let radial = |s: f64| -> f64 {
        if s >= 0.5 * PI {
            return 0.0;
        }
        let r = s.tan();
        let jac = r / (s.cos() * s.cos());
        rule.iter()
            .map(|&(t, w)| w * f(Point2::new(r * t.cos(), r * t.sin())))
            .sum::<f64>()
            * jac
    };
    adaptive_integrate(radial, 0.0, 0.5 * PI, tol)
}
