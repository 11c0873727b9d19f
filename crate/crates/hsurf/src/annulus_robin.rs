//! The concentration function `H̃` and the Robin quantity `2e^{2H(a,a)}` on
//! the round annulus `A_ρ = {1/ρ < |ξ| < ρ}` via the deck-transformation
//! series of its universal covering.
//!
//! Notation: `L = log ρ`, `s = log x` for the radius `x = |a|`,
//! `t = tan(π s/(4L))`, `M_k = tanh(kπ²/(2L))`, `u = 1 − t²`, `v = 4M_k²t²`.
//! The covering map is `f(z) = exp((2L/π) i log((1+z)/(1−z)))` from the unit
//! disk, `z₀ = −it` is a preimage of `x`, and the deck group consists of the
//! Möbius maps `T_k(z) = (z + M_k)/(1 + M_k z)`, `k ∈ Z` (`M_{−k} = −M_k`).
//! Then, with the common prefactor `P(x) = π²/(8L² x² cos²(π s/(2L)))`,
//!
//! * `H̃ = P · (1 + 2 Σ_{k≥1} W(k,x))`, `W = (1−M²) u² (u² − v)/(u² + v)²`,
//! * `2e^{2H(a,a)} = P · Π_{k≥1} Z(k,x)²`, `Z = M² (1+t²)²/(u² + v)`.
//!
//! `|W(k,x)| ≤ 1 − M_k² ≤ 4e^{−kπ²/L}` and `M_k² ≤ Z(k,x) ≤ 1`, which give
//! rigorous truncation bounds.

use crate::error::{Error, Result};
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default requested tolerance for the truncated series (relative).
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;

/// A round annulus `1/ρ < |ξ| < ρ` together with the series truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusModel {
    /// Outer radius `ρ > 1`.
    pub rho: f64,
    /// Number of retained deck terms `K ≥ 1` (indices `1..=K`).
    pub k_terms: usize,
    /// `M_k = tanh(kπ²/(2 log ρ))` for `k = 1..=K`.
    pub m: Vec<f64>,
    /// `1 − M_k² = sech²(kπ²/(2 log ρ))`, computed without cancellation.
    pub one_minus_m2: Vec<f64>,
}

impl AnnulusModel {
    /// Annulus with the default truncation `K = ⌈40 log ρ/π²⌉ + 2`, which
    /// makes the first neglected term smaller than `e^{−40}`.
    pub fn new(rho: f64) -> Result<Self> {
        Self::with_terms(rho, Self::default_terms(rho))
    }

    /// Default number of deck terms for `ρ`.
    pub fn default_terms(rho: f64) -> usize {
        let l = rho.ln();
        if !(l > 0.0) || !l.is_finite() {
            return 1;
        }
        (40.0 * l / (PI * PI)).ceil() as usize + 2
    }

    /// Annulus with an explicit truncation `K ≥ 1`.
    pub fn with_terms(rho: f64, k_terms: usize) -> Result<Self> {
        if !(rho > 1.0) || !rho.is_finite() {
            return Err(Error::InvalidInput(format!("annulus requires ρ > 1, got {rho}")));
        }
        if k_terms == 0 {
            return Err(Error::InvalidInput("truncation K must be at least 1".into()));
        }
        let l = rho.ln();
        let mut m = Vec::with_capacity(k_terms);
        let mut om = Vec::with_capacity(k_terms);
        for k in 1..=k_terms {
            let y = k as f64 * PI * PI / (2.0 * l);
            m.push(y.tanh());
            let c = y.cosh();
            om.push(if c.is_finite() { 1.0 / (c * c) } else { 0.0 });
        }
        Ok(Self { rho, k_terms, m, one_minus_m2: om })
    }

    /// `log ρ`.
    pub fn log_rho(&self) -> f64 {
        self.rho.ln()
    }

    /// The common prefactor `π²/(8 (log ρ)²)`.
    pub fn prefactor_constant(&self) -> f64 {
        let l = self.log_rho();
        PI * PI / (8.0 * l * l)
    }

    fn check_radius(&self, x: f64) -> Result<()> {
        if !(x > 1.0 / self.rho && x < self.rho) {
            return Err(Error::InvalidInput(format!(
                "radius {x} outside ({}, {})",
                1.0 / self.rho,
                self.rho
            )));
        }
        Ok(())
    }

    /// `e^{−π²/L}`, the geometric ratio of the deck-term bounds.
    fn decay(&self) -> f64 {
        (-PI * PI / self.log_rho()).exp()
    }

    /// Bound on `2 Σ_{k>K} |W(k,x)|`.
    pub fn h_tilde_tail_bound(&self) -> f64 {
        let q = self.decay();
        8.0 * q.powi(self.k_terms as i32 + 1) / (1.0 - q)
    }

    /// Bound on `−log Π_{k>K} Z(k,x)²` (so the relative error of the
    /// truncated product is at most this value).
    pub fn product_tail_bound(&self) -> f64 {
        let q = self.decay();
        8.0 * q.powi(self.k_terms as i32 + 1) / (self.m[0] * (1.0 - q))
    }
}

/// A series value together with its rigorous relative truncation bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// Local radial variables `(t, β)` with `t = tan(β s)`, `β = π/(4L)`.
fn radial_t(x: f64, l: f64) -> (f64, f64) {
    let beta = PI / (4.0 * l);
    ((beta * x.ln()).tan(), beta)
}

fn w_from(om2: f64, m: f64, t: f64) -> f64 {
    let u = 1.0 - t * t;
    let u2 = u * u;
    let v = 4.0 * m * m * t * t;
    let den = u2 + v;
    om2 * u2 * (u2 - v) / (den * den)
}

fn dw_dt(om2: f64, m: f64, t: f64) -> f64 {
    let u = 1.0 - t * t;
    let u2 = u * u;
    let v = 4.0 * m * m * t * t;
    let du2 = -4.0 * t * u;
    let dv = 8.0 * m * m * t;
    let n = u2 * (u2 - v);
    let dn = du2 * (u2 - v) + u2 * (du2 - dv);
    let d = (u2 + v) * (u2 + v);
    let dd = 2.0 * (u2 + v) * (du2 + dv);
    om2 * (dn * d - n * dd) / (d * d)
}

fn z_from(m: f64, t: f64) -> f64 {
    let u = 1.0 - t * t;
    let s = 1.0 + t * t;
    m * m * s * s / (u * u + 4.0 * m * m * t * t)
}

fn dlogz_dt(m: f64, t: f64) -> f64 {
    let u = 1.0 - t * t;
    let u2 = u * u;
    let v = 4.0 * m * m * t * t;
    4.0 * t / (1.0 + t * t) - (-4.0 * t * u + 8.0 * m * m * t) / (u2 + v)
}

fn deck_coeff(k: usize, rho: f64) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::InvalidInput("deck index k must be at least 1".into()));
    }
    if !(rho > 1.0) {
        return Err(Error::InvalidInput("annulus requires ρ > 1".into()));
    }
    let y = k as f64 * PI * PI / (2.0 * rho.ln());
    let c = y.cosh();
    Ok((y.tanh(), if c.is_finite() { 1.0 / (c * c) } else { 0.0 }))
}

fn check_x(x: f64, rho: f64) -> Result<()> {
    if !(x > 1.0 / rho && x < rho) {
        return Err(Error::InvalidInput(format!("radius {x} outside (1/ρ, ρ) for ρ = {rho}")));
    }
    Ok(())
}

/// The deck term `W(k, x)` of the `H̃` series.
pub fn w_term(k: usize, x: f64, rho: f64) -> Result<f64> {
    let (m, om2) = deck_coeff(k, rho)?;
    check_x(x, rho)?;
    let (t, _) = radial_t(x, rho.ln());
    Ok(w_from(om2, m, t))
}

/// The deck factor `Z(k, x)` of the Robin product.
pub fn z_term(k: usize, x: f64, rho: f64) -> Result<f64> {
    let (m, _) = deck_coeff(k, rho)?;
    check_x(x, rho)?;
    let (t, _) = radial_t(x, rho.ln());
    Ok(z_from(m, t))
}

/// The common prefactor `P(x) = π²/(8L² x² cos²(π log x/(2L)))`.
pub fn prefactor(x: f64, m: &AnnulusModel) -> Result<f64> {
    m.check_radius(x)?;
    let l = m.log_rho();
    let c = (PI * x.ln() / (2.0 * l)).cos();
    Ok(m.prefactor_constant() / (c * c * x * x))
}

/// The bracket `1 + 2 Σ_{k=1}^K W(k,x)`.
fn h_bracket(x: f64, m: &AnnulusModel) -> f64 {
    let (t, _) = radial_t(x, m.log_rho());
    1.0 + 2.0 * (0..m.k_terms).map(|i| w_from(m.one_minus_m2[i], m.m[i], t)).sum::<f64>()
}

fn z_product(x: f64, m: &AnnulusModel) -> f64 {
    let (t, _) = radial_t(x, m.log_rho());
    (0..m.k_terms).map(|i| z_from(m.m[i], t).powi(2)).product()
}

/// `H̃` at radius `x` with the default tolerance.
pub fn h_tilde_annulus(x: f64, m: &AnnulusModel) -> Result<SeriesValue> {
    h_tilde_annulus_with_tol(x, m, DEFAULT_SERIES_TOL)
}

/// `H̃` at radius `x`; fails with an accuracy error if the relative tail
/// bound exceeds `tol`.
pub fn h_tilde_annulus_with_tol(x: f64, m: &AnnulusModel, tol: f64) -> Result<SeriesValue> {
    let p = prefactor(x, m)?;
    let b = h_bracket(x, m);
    let bound = m.h_tilde_tail_bound() / b;
    if !(bound <= tol) {
        return Err(Error::Accuracy { bound, tol });
    }
    Ok(SeriesValue { value: p * b, tail_bound: bound })
}

/// `2e^{2H(a,a)}` at radius `x` with the default tolerance.
pub fn robin_exp_annulus(x: f64, m: &AnnulusModel) -> Result<SeriesValue> {
    robin_exp_annulus_with_tol(x, m, DEFAULT_SERIES_TOL)
}

/// `2e^{2H(a,a)}` at radius `x`; fails with an accuracy error if the
/// multiplicative tail bound exceeds `tol`.
pub fn robin_exp_annulus_with_tol(x: f64, m: &AnnulusModel, tol: f64) -> Result<SeriesValue> {
    let p = prefactor(x, m)?;
    let bound = m.product_tail_bound();
    if !(bound <= tol) {
        return Err(Error::Accuracy { bound, tol });
    }
    Ok(SeriesValue { value: p * z_product(x, m), tail_bound: bound })
}

/// `(H̃, dH̃/ds)` with `s = log x`, by term-wise differentiation.
pub fn h_tilde_annulus_log_derivative(x: f64, m: &AnnulusModel) -> Result<(f64, f64)> {
    let v = h_tilde_annulus(x, m)?.value;
    Ok((v, v * log_derivatives(x, m)?.0))
}

/// `(d log H̃/ds, d log(2e^{2H})/ds)` with `s = log x`.
pub fn log_derivatives(x: f64, m: &AnnulusModel) -> Result<(f64, f64)> {
    m.check_radius(x)?;
    let l = m.log_rho();
    let (t, beta) = radial_t(x, l);
    let dt_ds = beta * (1.0 + t * t);
    let s = x.ln();
    let dlogp = -2.0 + 4.0 * beta * (2.0 * beta * s).tan();
    let mut wsum = 0.0;
    let mut dwsum = 0.0;
    let mut dz = 0.0;
    for i in 0..m.k_terms {
        wsum += w_from(m.one_minus_m2[i], m.m[i], t);
        dwsum += dw_dt(m.one_minus_m2[i], m.m[i], t);
        dz += dlogz_dt(m.m[i], t);
    }
    let gh = dlogp + 2.0 * dwsum / (1.0 + 2.0 * wsum) * dt_ds;
    let ge = dlogp + 2.0 * dz * dt_ds;
    Ok((gh, ge))
}

/// Hyperbolic radius `|f'(z₀)|(1 − |z₀|²) = (4L/π) x cos(π log x/(2L))`.
pub fn hyperbolic_radius(x: f64, m: &AnnulusModel) -> Result<f64> {
    m.check_radius(x)?;
    let l = m.log_rho();
    Ok(4.0 * l / PI * x * (PI * x.ln() / (2.0 * l)).cos())
}

/// Sampled radial curves of both functions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialCurve {
    pub rho: f64,
    pub k_terms: usize,
    /// If true, `h_tilde` and `two_e2h` have the constant `π²/(8(log ρ)²)`
    /// divided out (the full `x`-dependent prefactor is kept).
    pub constant_factored: bool,
    pub x: Vec<f64>,
    pub h_tilde: Vec<f64>,
    pub two_e2h: Vec<f64>,
}

impl RadialCurve {
    /// `max_i |H̃ − 2e^{2H}| / 2e^{2H}` over the grid.
    pub fn max_relative_difference(&self) -> f64 {
        self.h_tilde
            .iter()
            .zip(&self.two_e2h)
            .map(|(a, b)| (a - b).abs() / b.abs())
            .fold(0.0, f64::max)
    }
}

/// Samples both functions on the log-uniform grid
/// `log x_i = L(−1 + 2(i+1)/(n+1))`, `i = 0..n`, with the constant
/// `π²/(8L²)` factored out. The grid is symmetric under `x ↦ 1/x`.
pub fn compare_scan(m: &AnnulusModel, n_grid: usize) -> Result<RadialCurve> {
    if n_grid < 16 {
        return Err(Error::InvalidInput("compare_scan needs at least 16 grid points".into()));
    }
    let l = m.log_rho();
    let c = m.prefactor_constant();
    let rows: Vec<Result<(f64, f64, f64)>> = (0..n_grid)
        .into_par_iter()
        .map(|i| {
            let x = (l * (-1.0 + 2.0 * (i + 1) as f64 / (n_grid + 1) as f64)).exp();
            let h = h_tilde_annulus(x, m)?.value / c;
            let e = robin_exp_annulus(x, m)?.value / c;
            Ok((x, h, e))
        })
        .collect();
    let mut curve = RadialCurve {
        rho: m.rho,
        k_terms: m.k_terms,
        constant_factored: true,
        x: Vec::with_capacity(n_grid),
        h_tilde: Vec::with_capacity(n_grid),
        two_e2h: Vec::with_capacity(n_grid),
    };
    for r in rows {
        let (x, h, e) = r?;
        curve.x.push(x);
        curve.h_tilde.push(h);
        curve.two_e2h.push(e);
    }
    Ok(curve)
}

/// Which radial function to analyse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadialFunction {
    HTilde,
    TwoE2H,
}

/// Critical radii of the chosen function on `(1/ρ, ρ)`, returned as values
/// of `log x` sorted increasingly; located by sign changes of the
/// term-wise differentiated log-derivative on a dense grid and refined by
/// bisection to `1e−12` in `log x`.
pub fn critical_points_radial(which: RadialFunction, m: &AnnulusModel) -> Result<Vec<f64>> {
    let l = m.log_rho();
    let n = 4000;
    let g = |s: f64| -> Result<f64> {
        let d = log_derivatives(s.exp(), m)?;
        Ok(match which {
            RadialFunction::HTilde => d.0,
            RadialFunction::TwoE2H => d.1,
        })
    };
    let grid: Vec<f64> = (0..=n).map(|i| l * (-0.999 + 1.998 * i as f64 / n as f64)).collect();
    let vals: Vec<f64> = grid.iter().map(|&s| g(s)).collect::<Result<_>>()?;
    let mut roots = Vec::new();
    for i in 0..n {
        let (mut a, mut b) = (grid[i], grid[i + 1]);
        let (mut fa, fb) = (vals[i], vals[i + 1]);
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        while b - a > 1e-12 {
            let mid = 0.5 * (a + b);
            let fm = g(mid)?;
            if fa * fm <= 0.0 {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(roots)
}

/// Deck data `(T_k(z₀), T_k'(z₀))` for `k = −K..=K`.
pub fn annulus_decks(m: &AnnulusModel, z0: C) -> Vec<(C, C)> {
    let mut out = Vec::with_capacity(2 * m.k_terms + 1);
    out.push((z0, C::new(1.0, 0.0)));
    for i in 0..m.k_terms {
        for sign in [1.0, -1.0] {
            let mk = sign * m.m[i];
            let den = 1.0 + mk * z0;
            out.push(((z0 + mk) / den, m.one_minus_m2[i] / (den * den)));
        }
    }
    out
}

/// The preimage `z₀ = −i tan(π log x/(4L))` of the radius `x` and
/// `|f'(z₀)| = (4L/π) x/(1 + t²)`.
pub fn covering_point(x: f64, m: &AnnulusModel) -> Result<(C, f64)> {
    m.check_radius(x)?;
    let l = m.log_rho();
    let (t, _) = radial_t(x, l);
    Ok((C::new(0.0, -t), 4.0 * l / PI * x / (1.0 + t * t)))
}

/// General covering-map formula
/// `H̃ = 1/(|f'(z₀)|²(1−|z₀|²)²) Σ_k 2 Re[T_k'(z₀)(1−|z₀|²)²/(1 − z_k z̄₀)²]`,
/// with `decks` the pairs `(z_k, T_k'(z₀))` (the identity included).
pub fn covering_h_tilde(decks: &[(C, C)], z0: C, fprime_abs: f64) -> Result<f64> {
    if decks.is_empty() {
        return Err(Error::InvalidInput("deck list must not be empty".into()));
    }
    let s = 1.0 - z0.norm_sqr();
    if !(s > 0.0) {
        return Err(Error::InvalidInput("z₀ must lie in the unit disk".into()));
    }
    let sum: f64 = decks
        .iter()
        .map(|&(zk, dk)| {
            let den = 1.0 - zk * z0.conj();
            2.0 * (dk * s * s / (den * den)).re
        })
        .sum();
    Ok(sum / (fprime_abs * fprime_abs * s * s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms_at_unit_radius() {
        let rho = std::f64::consts::E;
        let m1 = (PI * PI / 2.0).tanh();
        assert!((z_term(1, 1.0, rho).unwrap() - m1 * m1).abs() < 1e-15);
        assert!((w_term(1, 1.0, rho).unwrap() - (1.0 - m1 * m1)).abs() < 1e-15);
    }

    #[test]
    fn log_derivatives_match_fd() {
        let m = AnnulusModel::new(3.5f64.exp()).unwrap();
        for &s in &[-2.0, 0.3, 1.7] {
            let (gh, ge) = log_derivatives(f64::exp(s), &m).unwrap();
            let h = 1e-6;
            let f = |s: f64| h_tilde_annulus(s.exp(), &m).unwrap().value.ln();
            let e = |s: f64| robin_exp_annulus(s.exp(), &m).unwrap().value.ln();
            assert!((gh - (f(s + h) - f(s - h)) / (2.0 * h)).abs() < 1e-6);
            assert!((ge - (e(s + h) - e(s - h)) / (2.0 * h)).abs() < 1e-6);
        }
    }

    #[test]
    fn covering_formula_with_identity_is_disk_formula() {
        let z0 = C::new(0.3, -0.2);
        let v = covering_h_tilde(&[(z0, C::new(1.0, 0.0))], z0, 1.0).unwrap();
        let s = 1.0 - z0.norm_sqr();
        assert!((v - 2.0 / (s * s)).abs() < 1e-13);
    }

    #[test]
    fn hyperbolic_radius_matches_covering_derivative() {
        let m = AnnulusModel::new(3.0).unwrap();
        let (z0, fp) = covering_point(1.4, &m).unwrap();
        let r = hyperbolic_radius(1.4, &m).unwrap();
        assert!((r - fp * (1.0 - z0.norm_sqr())).abs() < 1e-13);
    }
}
