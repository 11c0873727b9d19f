//! Reduced energy functionals of concentrating bubbles: the one-bubble
//! functional `F_{Ω,g}`, the pairwise interaction `F_Ω`, the k-bubble sum
//! `Σ_{Ω,g}` with analytic gradients in (position, scale, rotation chart), and
//! the closed-form extremisations over scales and rotations.
//!
//! * `F_{Ω,g}(ε, a, λ, R) = 8A₀ (H̃(a)/λ² − (ε/λ) d_{R⁻¹}g(a))` with
//!   `d_N g(a) = ∂ₓ(N g)₁(a) + ∂_y(N g)₂(a)`.
//! * `F_Ω(p_i, p_j, R_i, R_j) = 16A₀ Σ_{m,n≤2} (R_i⁻¹R_j)_{mn} B_{mn}(p_i, p_j)`
//!   with the bracket `B` of [`h_bracket_terms`](crate::domain_green::h_bracket_terms);
//!   equivalently `B = −∂G_m/∂x_n`.
//! * `Σ = Σ_i F_{Ω,g}(p_i, λ_i, R_i) + Σ_{i<j} F_Ω(p_i, p_j, R_i, R_j)/(λ_i λ_j)`.

use crate::bubble_core::{chart_matrix, chart_matrix_derivatives, AngleTriple, BubbleParams, Point2, Rotation3, Vec3, A0};
use crate::domain_green::{self, h_bracket_terms, h_tilde, h_tilde_with_gradient, DiskHarmonic, DomainModel};
use crate::error::{Error, Result};
use crate::optimize::nelder_mead;
use nalgebra::Matrix3;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

/// A harmonic boundary datum `g`, given through its harmonic extension with
/// first and second derivatives.
pub trait BoundaryDatum: Debug + Send + Sync {
    /// `g(p)`.
    fn value(&self, p: Point2) -> Vec3;
    /// `[g_x(p), g_y(p)]`.
    fn jacobian(&self, p: Point2) -> [Vec3; 2];
    /// `[g_xx(p), g_xy(p), g_yy(p)]`.
    fn hessian(&self, p: Point2) -> [Vec3; 3];
    /// Boundary value `g̃` at angle `t` of the unit circle.
    fn boundary_value(&self, t: f64) -> Vec3 {
        self.value(Point2::new(t.cos(), t.sin()))
    }
    /// True if the datum vanishes identically.
    fn is_zero(&self) -> bool {
        false
    }
}

/// The zero datum.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroDatum;

impl BoundaryDatum for ZeroDatum {
    fn value(&self, _p: Point2) -> Vec3 {
        Vec3::zeros()
    }
    fn jacobian(&self, _p: Point2) -> [Vec3; 2] {
        [Vec3::zeros(); 2]
    }
    fn hessian(&self, _p: Point2) -> [Vec3; 3] {
        [Vec3::zeros(); 3]
    }
    fn is_zero(&self) -> bool {
        true
    }
}

/// The affine datum `g(x, y) = x·col_x + y·col_y + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearDatum {
    pub col_x: [f64; 3],
    pub col_y: [f64; 3],
    pub offset: [f64; 3],
}

impl LinearDatum {
    /// The planar identity `g(x, y) = (x, y, 0)`.
    pub fn identity() -> Self {
        Self { col_x: [1.0, 0.0, 0.0], col_y: [0.0, 1.0, 0.0], offset: [0.0; 3] }
    }
}

impl BoundaryDatum for LinearDatum {
    fn value(&self, p: Point2) -> Vec3 {
        Vec3::from(self.col_x) * p.x + Vec3::from(self.col_y) * p.y + Vec3::from(self.offset)
    }
    fn jacobian(&self, _p: Point2) -> [Vec3; 2] {
        [Vec3::from(self.col_x), Vec3::from(self.col_y)]
    }
    fn hessian(&self, _p: Point2) -> [Vec3; 3] {
        [Vec3::zeros(); 3]
    }
    fn is_zero(&self) -> bool {
        self.col_x == [0.0; 3] && self.col_y == [0.0; 3] && self.offset == [0.0; 3]
    }
}

/// The concentrating datum `g_ω = (Re w, Im w, 0)` with `w = z/(1 − ωz)`,
/// i.e. `g_ω(x,y) = ((x − ω(x²+y²)), y, 0)/((1−ωx)² + ω²y²)`, the harmonic
/// extension of the Kelvin datum `((x−ω), y, 0)/((x−ω)² + y²)` on `∂D`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GOmega {
    pub omega: f64,
}

impl GOmega {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega < 1.0) {
            return Err(Error::InvalidInput(format!("ω must lie in (0, 1), got {omega}")));
        }
        Ok(Self { omega })
    }

    fn w_derivs(&self, p: Point2) -> (C, C, C) {
        let z = p.to_complex();
        let d = 1.0 - self.omega * z;
        (z / d, 1.0 / (d * d), 2.0 * self.omega / (d * d * d))
    }
}

impl BoundaryDatum for GOmega {
    fn value(&self, p: Point2) -> Vec3 {
        let (w, _, _) = self.w_derivs(p);
        Vec3::new(w.re, w.im, 0.0)
    }
    fn jacobian(&self, p: Point2) -> [Vec3; 2] {
        let (_, w1, _) = self.w_derivs(p);
        [Vec3::new(w1.re, w1.im, 0.0), Vec3::new(-w1.im, w1.re, 0.0)]
    }
    fn hessian(&self, p: Point2) -> [Vec3; 3] {
        let (_, _, w2) = self.w_derivs(p);
        [Vec3::new(w2.re, w2.im, 0.0), Vec3::new(-w2.im, w2.re, 0.0), Vec3::new(-w2.re, -w2.im, 0.0)]
    }
    fn boundary_value(&self, t: f64) -> Vec3 {
        let (x, y) = (t.cos() - self.omega, t.sin());
        let r2 = x * x + y * y;
        Vec3::new(x / r2, y / r2, 0.0)
    }
}

/// `R·g(Q_α ξ)` with `Q_α(x, y) = (cos α x + sin α y, −sin α x + cos α y)`.
#[derive(Clone, Debug)]
pub struct TransformedDatum {
    pub outer: Rotation3,
    pub planar_angle: f64,
    pub inner: Arc<dyn BoundaryDatum>,
}

impl TransformedDatum {
    fn q(&self) -> (f64, f64) {
        self.planar_angle.sin_cos()
    }
    fn inner_point(&self, p: Point2) -> Point2 {
        p.rotate(-self.planar_angle)
    }
}

impl BoundaryDatum for TransformedDatum {
    fn value(&self, p: Point2) -> Vec3 {
        self.outer.apply(&self.inner.value(self.inner_point(p)))
    }
    fn jacobian(&self, p: Point2) -> [Vec3; 2] {
        let (s, c) = self.q();
        let [gx, gy] = self.inner.jacobian(self.inner_point(p));
        // ∂_x = c ∂_1 − s ∂_2, ∂_y = s ∂_1 + c ∂_2 (chain rule through Q_α).
        [self.outer.apply(&(gx * c - gy * s)), self.outer.apply(&(gx * s + gy * c))]
    }
    fn hessian(&self, p: Point2) -> [Vec3; 3] {
        let (s, c) = self.q();
        let [gxx, gxy, gyy] = self.inner.hessian(self.inner_point(p));
        let xx = gxx * (c * c) - gxy * (2.0 * c * s) + gyy * (s * s);
        let xy = gxx * (c * s) + gxy * (c * c - s * s) - gyy * (c * s);
        let yy = gxx * (s * s) + gxy * (2.0 * c * s) + gyy * (c * c);
        [self.outer.apply(&xx), self.outer.apply(&xy), self.outer.apply(&yy)]
    }
    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }
}

/// A finite sum of data.
#[derive(Clone, Debug, Default)]
pub struct SumDatum {
    pub terms: Vec<Arc<dyn BoundaryDatum>>,
}

impl BoundaryDatum for SumDatum {
    fn value(&self, p: Point2) -> Vec3 {
        self.terms.iter().map(|g| g.value(p)).sum()
    }
    fn jacobian(&self, p: Point2) -> [Vec3; 2] {
        self.terms.iter().fold([Vec3::zeros(); 2], |acc, g| {
            let j = g.jacobian(p);
            [acc[0] + j[0], acc[1] + j[1]]
        })
    }
    fn hessian(&self, p: Point2) -> [Vec3; 3] {
        self.terms.iter().fold([Vec3::zeros(); 3], |acc, g| {
            let h = g.hessian(p);
            [acc[0] + h[0], acc[1] + h[1], acc[2] + h[2]]
        })
    }
    fn boundary_value(&self, t: f64) -> Vec3 {
        self.terms.iter().map(|g| g.boundary_value(t)).sum()
    }
    fn is_zero(&self) -> bool {
        self.terms.iter().all(|g| g.is_zero())
    }
}

/// Boundary values on the unit circle extended spectrally into the disk.
#[derive(Clone, Debug)]
pub struct SampledDatum {
    pub extension: DiskHarmonic,
}

impl SampledDatum {
    /// Samples `boundary` at `n` angles and extends harmonically.
    pub fn from_boundary<B: Fn(f64) -> Vec3>(boundary: B, n: usize) -> Result<Self> {
        Ok(Self { extension: DiskHarmonic::from_boundary(boundary, n)? })
    }
}

impl BoundaryDatum for SampledDatum {
    fn value(&self, p: Point2) -> Vec3 {
        self.extension.eval(p).0
    }
    fn jacobian(&self, p: Point2) -> [Vec3; 2] {
        let (_, x, y) = self.extension.eval(p);
        [x, y]
    }
    fn hessian(&self, p: Point2) -> [Vec3; 3] {
        self.extension.eval2(p).3
    }
}

/// `d_N g(a) = Σ_{m ≤ 2} (N ∂_m g(a))_m` for an arbitrary 3×3 matrix `N`.
pub fn d_matrix_g(g: &dyn BoundaryDatum, n: &Matrix3<f64>, a: Point2) -> f64 {
    let [gx, gy] = g.jacobian(a);
    (n * gx)[0] + (n * gy)[1]
}

/// Gradient of `a ↦ d_N g(a)`.
pub fn d_matrix_g_gradient(g: &dyn BoundaryDatum, n: &Matrix3<f64>, a: Point2) -> [f64; 2] {
    let [gxx, gxy, gyy] = g.hessian(a);
    [(n * gxx)[0] + (n * gxy)[1], (n * gxy)[0] + (n * gyy)[1]]
}

/// `d_R g(a) = ∂ₓ(R∘g)₁(a) + ∂_y(R∘g)₂(a)`.
pub fn d_r_g(g: &dyn BoundaryDatum, r: &Rotation3, a: Point2) -> f64 {
    d_matrix_g(g, r.matrix(), a)
}

/// One-bubble reduced functional
/// `F_{Ω,g} = 8A₀(H̃(a)/λ² − (ε/λ) d_{R⁻¹}g(a))`.
pub fn f_single(eps: f64, b: &BubbleParams, d: &DomainModel, g: &dyn BoundaryDatum) -> Result<f64> {
    let ht = h_tilde(d, b.center)?;
    let dg = d_r_g(g, &b.rotation.inverse(), b.center);
    let l = b.scale;
    Ok(8.0 * A0 * (ht / (l * l) - eps / l * dg))
}

/// The critical scale `λ = (2/ε) H̃(a)/d_{R⁻¹}g(a)` of `F_{Ω,g}` in `λ`.
pub fn optimal_lambda(eps: f64, a: Point2, r: &Rotation3, d: &DomainModel, g: &dyn BoundaryDatum) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("ε must be positive".into()));
    }
    let dg = d_r_g(g, &r.inverse(), a);
    if !(dg > 0.0) {
        return Err(Error::NoCriticalScale(dg));
    }
    Ok(2.0 / eps * h_tilde(d, a)? / dg)
}

/// `∂F_{Ω,g}/∂λ`.
pub fn f_single_dlambda(eps: f64, b: &BubbleParams, d: &DomainModel, g: &dyn BoundaryDatum) -> Result<f64> {
    let ht = h_tilde(d, b.center)?;
    let dg = d_r_g(g, &b.rotation.inverse(), b.center);
    let l = b.scale;
    Ok(8.0 * A0 * (-2.0 * ht / (l * l * l) + eps * dg / (l * l)))
}

/// Upper-left 2×2 entries `[r11, r12, r21, r22]` of a matrix.
fn block2(m: &Matrix3<f64>) -> [f64; 4] {
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

fn check_pair(p_i: Point2, p_j: Point2) -> Result<()> {
    if p_i.dist(p_j) < 1e-12 {
        return Err(Error::SingularInput("interaction of coincident bubble centres".into()));
    }
    Ok(())
}

/// Pairwise interaction `F_Ω(p_i, p_j, R_i, R_j)` through the h-function
/// bracket.
pub fn interaction_pair(p_i: Point2, p_j: Point2, r_i: &Rotation3, r_j: &Rotation3, d: &DomainModel) -> Result<f64> {
    check_pair(p_i, p_j)?;
    let b = h_bracket_terms(d, p_i, p_j)?;
    let r = block2(&(r_i.inverse().matrix() * r_j.matrix()));
    Ok(16.0 * A0 * (0..4).map(|k| r[k] * b[k]).sum::<f64>())
}

/// Pairwise interaction through the mixed Green derivatives:
/// `−16A₀ Σ (R_i⁻¹R_j)_{mn} ∂G_m/∂x_n(p_i, p_j)`.
pub fn interaction_pair_green(p_i: Point2, p_j: Point2, r_i: &Rotation3, r_j: &Rotation3, d: &DomainModel) -> Result<f64> {
    check_pair(p_i, p_j)?;
    let k = domain_green::green_grad_derivatives(d, p_i, p_j)?;
    let r = block2(&(r_i.inverse().matrix() * r_j.matrix()));
    Ok(-16.0 * A0 * (r[0] * k.g1x + r[1] * k.g1y + r[2] * k.g2x + r[3] * k.g2y))
}

/// A k-bubble configuration in the manifold of admissible parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub epsilon: f64,
    pub bubbles: Vec<BubbleParams>,
    /// Separation constant `C̄`.
    pub c_bar: f64,
}

impl Configuration {
    pub fn new(epsilon: f64, bubbles: Vec<BubbleParams>, c_bar: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidConfiguration(format!("ε must be positive, got {epsilon}")));
        }
        if !(c_bar > 0.0) {
            return Err(Error::InvalidConfiguration(format!("C̄ must be positive, got {c_bar}")));
        }
        if bubbles.is_empty() {
            return Err(Error::InvalidConfiguration("configuration needs at least one bubble".into()));
        }
        Ok(Self { epsilon, bubbles, c_bar })
    }

    /// Checks `dist(p_i, ∂Ω) ≥ 1/C̄`, `|p_i − p_j| ≥ 1/C̄` and
    /// `λ_i ε ∈ [1/C̄, C̄]`, naming the first violated bound.
    pub fn validate(&self, d: &DomainModel) -> Result<()> {
        let inv = 1.0 / self.c_bar;
        for (i, b) in self.bubbles.iter().enumerate() {
            if !d.contains(b.center) {
                return Err(Error::InvalidConfiguration(format!("bubble {i}: centre outside the domain")));
            }
            let dist = d.boundary_distance(b.center);
            if dist < inv {
                return Err(Error::InvalidConfiguration(format!(
                    "bubble {i}: dist(p, ∂Ω) = {dist} < 1/C̄ = {inv}"
                )));
            }
            let le = b.scale * self.epsilon;
            if le < inv || le > self.c_bar {
                return Err(Error::InvalidConfiguration(format!(
                    "bubble {i}: λε = {le} outside [1/C̄, C̄] = [{inv}, {}]",
                    self.c_bar
                )));
            }
            for (j, o) in self.bubbles.iter().enumerate().skip(i + 1) {
                let s = b.center.dist(o.center);
                if s < inv {
                    return Err(Error::InvalidConfiguration(format!(
                        "bubbles {i},{j}: separation {s} < 1/C̄ = {inv}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Magnitudes of the modelled error scales.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorScales {
    /// `ε² + Σ ε|log λ_i|/λ_i + Σ_{i≠j} 1/(λ_iλ_j)`.
    pub e_tilde: f64,
    /// `ε² + ε/λ_i` per bubble.
    pub e_eps_lambda: Vec<f64>,
    /// `(log λ_i + log λ_j)(λ_i⁻³ + λ_j⁻³ + λ_i⁻²λ_j⁻¹ + λ_i⁻¹λ_j⁻²)` per pair `i < j`.
    pub e_pairs: Vec<f64>,
}

/// Error-scale diagnostics for scales `lambdas` at parameter `eps`.
pub fn error_scales(eps: f64, lambdas: &[f64]) -> ErrorScales {
    let mut e_tilde = eps * eps;
    let mut e_pairs = Vec::new();
    for (i, &li) in lambdas.iter().enumerate() {
        e_tilde += eps * li.ln().abs() / li;
        for (j, &lj) in lambdas.iter().enumerate() {
            if i != j {
                e_tilde += 1.0 / (li * lj);
            }
            if j > i {
                e_pairs.push((li.ln() + lj.ln()) * (li.powi(-3) + lj.powi(-3) + 1.0 / (li * li * lj) + 1.0 / (li * lj * lj)));
            }
        }
    }
    ErrorScales { e_tilde, e_eps_lambda: lambdas.iter().map(|l| eps * eps + eps / l).collect(), e_pairs }
}

/// Value of `Σ_{Ω,g}` with its parts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaBreakdown {
    pub value: f64,
    pub singles: Vec<f64>,
    /// `(i, j, F_Ω/(λ_iλ_j))` for `i < j`.
    pub pairs: Vec<(usize, usize, f64)>,
    /// `(8k/9)A₀ + Σ`, the modelled total energy with the stated constant.
    pub modeled_total: f64,
    /// `k·4π/3 + Σ`, the same with the directly computed one-bubble level.
    pub direct_level_total: f64,
}

/// `Σ_{Ω,g}` after validating the configuration.
pub fn sigma_total(c: &Configuration, d: &DomainModel, g: &dyn BoundaryDatum) -> Result<f64> {
    Ok(sigma_breakdown(c, d, g)?.value)
}

/// `Σ_{Ω,g}` with its single and pair contributions.
pub fn sigma_breakdown(c: &Configuration, d: &DomainModel, g: &dyn BoundaryDatum) -> Result<SigmaBreakdown> {
    c.validate(d)?;
    let singles: Vec<f64> = c.bubbles.iter().map(|b| f_single(c.epsilon, b, d, g)).collect::<Result<_>>()?;
    let idx: Vec<(usize, usize)> = (0..c.bubbles.len())
        .flat_map(|i| (i + 1..c.bubbles.len()).map(move |j| (i, j)))
        .collect();
    let pairs: Vec<(usize, usize, f64)> = idx
        .par_iter()
        .map(|&(i, j)| {
            let (bi, bj) = (&c.bubbles[i], &c.bubbles[j]);
            let f = interaction_pair_green(bi.center, bj.center, &bi.rotation, &bj.rotation, d)?;
            Ok((i, j, f / (bi.scale * bj.scale)))
        })
        .collect::<Result<_>>()?;
    let value = singles.iter().sum::<f64>() + pairs.iter().map(|p| p.2).sum::<f64>();
    let k = c.bubbles.len() as f64;
    Ok(SigmaBreakdown {
        value,
        singles,
        pairs,
        modeled_total: 8.0 * k / 9.0 * A0 + value,
        direct_level_total: k * 4.0 * PI / 3.0 + value,
    })
}

/// A local chart of SO(3): `R(t) = left · M(t)ᵀ · right`, with `M` the
/// chart matrix of [`chart_matrix`]; `R(center) = left · right`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationChart {
    pub left: Rotation3,
    pub right: Rotation3,
}

impl RotationChart {
    /// Chart centred at `base` (`left = base`, `right = I`).
    pub fn centered_at(base: Rotation3) -> Self {
        Self { left: base, right: Rotation3::identity() }
    }

    pub fn rotation(&self, t: AngleTriple) -> Rotation3 {
        Rotation3::from_matrix_unchecked(self.left.matrix() * chart_matrix(t).transpose() * self.right.matrix())
    }

    /// `R(t)⁻¹ = rightᵀ M(t) leftᵀ`.
    pub fn inverse_matrix(&self, t: AngleTriple) -> Matrix3<f64> {
        self.right.matrix().transpose() * chart_matrix(t) * self.left.matrix().transpose()
    }

    /// Derivatives of `R(t)⁻¹` in `(θ, ψ, φ)`.
    pub fn inverse_derivatives(&self, t: AngleTriple) -> [Matrix3<f64>; 3] {
        let rt = self.right.matrix().transpose();
        let lt = self.left.matrix().transpose();
        chart_matrix_derivatives(t).map(|dm| rt * dm * lt)
    }

    /// Derivatives of `R(t)` in `(θ, ψ, φ)`.
    pub fn derivatives(&self, t: AngleTriple) -> [Matrix3<f64>; 3] {
        chart_matrix_derivatives(t).map(|dm| self.left.matrix() * dm.transpose() * self.right.matrix())
    }

    /// Re-centres the chart at `R(t)`, so that the chart centre represents the
    /// same rotation: `left ← left·M(t)ᵀ`.
    pub fn recentered(&self, t: AngleTriple) -> Self {
        Self {
            left: Rotation3::from_matrix_unchecked(self.left.matrix() * chart_matrix(t).transpose()),
            right: self.right,
        }
    }
}

/// A bubble expressed in local coordinates: position `q` in a frame rotated
/// by `frame_angle` (`p = rot(frame_angle)·q`), scale, and chart angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartedBubble {
    pub frame_angle: f64,
    pub q: Point2,
    pub scale: f64,
    pub chart: RotationChart,
    pub angles: AngleTriple,
}

impl ChartedBubble {
    /// A bubble in the trivial frame with its chart centred at its rotation.
    pub fn from_bubble(b: &BubbleParams) -> Self {
        Self {
            frame_angle: 0.0,
            q: b.center,
            scale: b.scale,
            chart: RotationChart::centered_at(b.rotation),
            angles: AngleTriple::CENTER,
        }
    }

    pub fn position(&self) -> Point2 {
        self.q.rotate(self.frame_angle)
    }

    pub fn rotation(&self) -> Rotation3 {
        self.chart.rotation(self.angles)
    }

    pub fn to_bubble(&self) -> Result<BubbleParams> {
        BubbleParams::new(self.position(), self.scale, self.rotation())
    }

    /// Local coordinates `(q₁, q₂, λ, θ, ψ, φ)`.
    pub fn coords(&self) -> [f64; 6] {
        [self.q.x, self.q.y, self.scale, self.angles.theta, self.angles.psi, self.angles.phi]
    }

    /// Copy with new local coordinates.
    pub fn with_coords(&self, c: &[f64]) -> Self {
        Self {
            q: Point2::new(c[0], c[1]),
            scale: c[2],
            angles: AngleTriple::new(c[3], c[4], c[5]),
            ..*self
        }
    }
}

/// Gradient of `Σ` with respect to one bubble's local coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradientBlock {
    pub position: [f64; 2],
    pub scale: f64,
    /// `(∂/∂θ, ∂/∂ψ, ∂/∂φ)`.
    pub angles: [f64; 3],
}

impl GradientBlock {
    pub fn to_array(&self) -> [f64; 6] {
        [self.position[0], self.position[1], self.scale, self.angles[0], self.angles[1], self.angles[2]]
    }
    fn from_array(a: [f64; 6]) -> Self {
        Self { position: [a[0], a[1]], scale: a[2], angles: [a[3], a[4], a[5]] }
    }
}

/// Value, gradient blocks and error-scale diagnostics of `Σ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducedEnergyReport {
    pub value: f64,
    pub gradient: Vec<GradientBlock>,
    pub gradient_norm: f64,
    pub diagnostics: ErrorScales,
}

/// `Σ` and its analytic gradient in the local coordinates of each charted
/// bubble (no admissibility validation).
pub fn sigma_charted(eps: f64, bubbles: &[ChartedBubble], d: &DomainModel, g: &dyn BoundaryDatum) -> Result<(f64, Vec<[f64; 6]>)> {
    let k = bubbles.len();
    let pos: Vec<Point2> = bubbles.iter().map(|b| b.position()).collect();
    let rinv: Vec<Matrix3<f64>> = bubbles.iter().map(|b| b.chart.inverse_matrix(b.angles)).collect();
    let rmat: Vec<Matrix3<f64>> = rinv.iter().map(|m| m.transpose()).collect();
    let mut value = 0.0;
    // Gradients in global position coordinates first, rotated to local frames at the end.
    let mut grad = vec![[0.0f64; 6]; k];
    let c = 8.0 * A0;
    for i in 0..k {
        let b = &bubbles[i];
        let l = b.scale;
        let (ht, dht) = h_tilde_with_gradient(d, pos[i])?;
        let dg = d_matrix_g(g, &rinv[i], pos[i]);
        let dgp = d_matrix_g_gradient(g, &rinv[i], pos[i]);
        value += c * (ht / (l * l) - eps / l * dg);
        grad[i][0] += c * (dht[0] / (l * l) - eps / l * dgp[0]);
        grad[i][1] += c * (dht[1] / (l * l) - eps / l * dgp[1]);
        grad[i][2] += c * (-2.0 * ht / (l * l * l) + eps * dg / (l * l));
        if !g.is_zero() {
            for (a, dm) in b.chart.inverse_derivatives(b.angles).iter().enumerate() {
                grad[i][3 + a] += -c * eps / l * d_matrix_g(g, dm, pos[i]);
            }
        }
    }
    let cp = -16.0 * A0;
    for i in 0..k {
        for j in (i + 1)..k {
            check_pair(pos[i], pos[j])?;
            let kd = domain_green::green_grad_with_derivatives(d, pos[i], pos[j])?;
            let kv = kd.value;
            let kvec = [kv.g1x, kv.g1y, kv.g2x, kv.g2y];
            let r = block2(&(rinv[i] * rmat[j]));
            let dot = |r: &[f64; 4], kk: &[f64; 4]| (0..4).map(|m| r[m] * kk[m]).sum::<f64>();
            let f = cp * dot(&r, &kvec);
            let lij = bubbles[i].scale * bubbles[j].scale;
            value += f / lij;
            for (s, dk) in kd.d.iter().enumerate() {
                let dvec = [dk.g1x, dk.g1y, dk.g2x, dk.g2y];
                let v = cp * dot(&r, &dvec) / lij;
                if s < 2 {
                    grad[i][s] += v;
                } else {
                    grad[j][s - 2] += v;
                }
            }
            grad[i][2] += -f / (lij * bubbles[i].scale);
            grad[j][2] += -f / (lij * bubbles[j].scale);
            let di = bubbles[i].chart.inverse_derivatives(bubbles[i].angles);
            let dj = bubbles[j].chart.derivatives(bubbles[j].angles);
            for a in 0..3 {
                grad[i][3 + a] += cp * dot(&block2(&(di[a] * rmat[j])), &kvec) / lij;
                grad[j][3 + a] += cp * dot(&block2(&(rinv[i] * dj[a])), &kvec) / lij;
            }
        }
    }
    for (i, b) in bubbles.iter().enumerate() {
        // p = rot(α) q ⇒ ∂/∂q = rot(−α) ∂/∂p.
        let gq = Point2::new(grad[i][0], grad[i][1]).rotate(-b.frame_angle);
        grad[i][0] = gq.x;
        grad[i][1] = gq.y;
    }
    Ok((value, grad))
}

/// Value, analytic gradient (positions, scale, chart angles centred at each
/// bubble's rotation) and diagnostics of `Σ` for a validated configuration.
pub fn sigma_gradient(c: &Configuration, d: &DomainModel, g: &dyn BoundaryDatum) -> Result<ReducedEnergyReport> {
    c.validate(d)?;
    let charted: Vec<ChartedBubble> = c.bubbles.iter().map(ChartedBubble::from_bubble).collect();
    let (value, grad) = sigma_charted(c.epsilon, &charted, d, g)?;
    let lambdas: Vec<f64> = c.bubbles.iter().map(|b| b.scale).collect();
    let norm = grad.iter().flat_map(|g| g.iter()).map(|v| v * v).sum::<f64>().sqrt();
    Ok(ReducedEnergyReport {
        value,
        gradient: grad.into_iter().map(GradientBlock::from_array).collect(),
        gradient_norm: norm,
        diagnostics: error_scales(c.epsilon, &lambdas),
    })
}

/// Central finite-difference gradient of `Σ` in the same local coordinates
/// as [`sigma_charted`]; steps `1e−5` for positions/angles and `1e−5·λ` for scales.
pub fn sigma_charted_fd(eps: f64, bubbles: &[ChartedBubble], d: &DomainModel, g: &dyn BoundaryDatum) -> Result<Vec<[f64; 6]>> {
    let mut out = vec![[0.0; 6]; bubbles.len()];
    for i in 0..bubbles.len() {
        let base = bubbles[i].coords();
        for s in 0..6 {
            let h = if s == 2 { 1e-5 * base[2] } else { 1e-5 };
            let eval = |sign: f64| -> Result<f64> {
                let mut c = base;
                c[s] += sign * h;
                let mut bs = bubbles.to_vec();
                bs[i] = bubbles[i].with_coords(&c);
                Ok(sigma_charted(eps, &bs, d, g)?.0)
            };
            out[i][s] = (eval(1.0)? - eval(-1.0)?) / (2.0 * h);
        }
    }
    Ok(out)
}

/// Extremal values `((|∇g|² + 2|g_x∧g_y|)^{1/2}, (|∇g|² − 2|g_x∧g_y|)^{1/2})` of
/// `d_{R⁻¹}g(a)` over `R ∈ SO(3)` (the first is the maximum).
pub fn rotation_extremal_datum(g: &dyn BoundaryDatum, a: Point2) -> Result<(f64, f64)> {
    let [gx, gy] = g.jacobian(a);
    let n2 = gx.norm_squared() + gy.norm_squared();
    if !(n2 > 1e-28) {
        return Err(Error::DegenerateDatum);
    }
    let w = gx.cross(&gy).norm();
    Ok(((n2 + 2.0 * w).sqrt(), (n2 - 2.0 * w).max(0.0).sqrt()))
}

/// ZYZ Euler rotation `R_z(α) R_y(β) R_z(γ)`.
pub fn euler_zyz(alpha: f64, beta: f64, gamma: f64) -> Rotation3 {
    let z = Vec3::new(0.0, 0.0, 1.0);
    let y = Vec3::new(0.0, 1.0, 0.0);
    Rotation3::about_axis(z, alpha)
        .compose(&Rotation3::about_axis(y, beta))
        .compose(&Rotation3::about_axis(z, gamma))
}

/// Minimises `f` over SO(3): a 32³ Euler-angle grid followed by Nelder–Mead
/// refinement (50 restarts' worth of iterations from the best grid point).
pub fn so3_minimize<F: Fn(&Rotation3) -> f64 + Sync>(f: F) -> (f64, Rotation3) {
    let n = 32usize;
    let grid: Vec<(f64, [f64; 3])> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
            let e = [
                2.0 * PI * i as f64 / n as f64,
                PI * (j as f64 + 0.5) / n as f64,
                2.0 * PI * k as f64 / n as f64,
            ];
            (f(&euler_zyz(e[0], e[1], e[2])), e)
        })
        .collect();
    let best = grid.iter().min_by(|a, b| a.0.total_cmp(&b.0)).map(|b| b.1).unwrap_or([0.0; 3]);
    let obj = |x: &[f64]| f(&euler_zyz(x[0], x[1], x[2]));
    let mut x = best.to_vec();
    let mut step = 0.1;
    for _ in 0..50 {
        let m = nelder_mead(obj, &x, step, 400, 1e-15);
        let moved = x.iter().zip(&m.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = m.x;
        step = (step * 0.5).max(1e-4);
        if moved < 1e-12 {
            break;
        }
    }
    let r = euler_zyz(x[0], x[1], x[2]);
    (f(&r), r)
}

/// Grid-plus-refinement maximum of `d_{R⁻¹}g(a)` over SO(3) and the
/// maximising `R`.
pub fn rotation_extremal_search(g: &dyn BoundaryDatum, a: Point2) -> (f64, Rotation3) {
    let (v, r) = so3_minimize(|rinv| -d_r_g(g, rinv, a));
    (-v, r.inverse())
}

/// `W(a) = ((|∇g|² + 2|g_x∧g_y|)/H̃(a))^{1/2}`.
pub fn concentration_w(g: &dyn BoundaryDatum, d: &DomainModel, a: Point2) -> Result<f64> {
    let (plus, _) = rotation_extremal_datum(g, a)?;
    Ok(plus / h_tilde(d, a)?.sqrt())
}

/// The extremal pair coefficient
/// `−16A₀ max_± [(∂G₁/∂x ± ∂G₂/∂y)² + (∂G₂/∂x ∓ ∂G₁/∂y)²]^{1/2}`,
/// the minimum of `F_Ω(a, b, R_i, R_j)` over the relative rotation.
pub fn two_bubble_extremal(a: Point2, b: Point2, d: &DomainModel) -> Result<f64> {
    check_pair(a, b)?;
    let k = domain_green::green_grad_derivatives(d, a, b)?;
    let s1 = ((k.g1x + k.g2y).powi(2) + (k.g2x - k.g1y).powi(2)).sqrt();
    let s2 = ((k.g1x - k.g2y).powi(2) + (k.g2x + k.g1y).powi(2)).sqrt();
    Ok(-16.0 * A0 * s1.max(s2))
}

/// Grid-plus-refinement minimum of `F_Ω(a, b, I, R)` over `R ∈ SO(3)` and
/// the minimising relative rotation.
pub fn two_bubble_extremal_search(a: Point2, b: Point2, d: &DomainModel) -> Result<(f64, Rotation3)> {
    check_pair(a, b)?;
    let k = domain_green::green_grad_derivatives(d, a, b)?;
    let kv = [k.g1x, k.g1y, k.g2x, k.g2y];
    Ok(so3_minimize(|r| {
        let m = block2(r.matrix());
        -16.0 * A0 * (0..4).map(|i| m[i] * kv[i]).sum::<f64>()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_r_g_examples() {
        let g = LinearDatum::identity();
        assert!((d_r_g(&g, &Rotation3::identity(), Point2::new(0.2, 0.1)) - 2.0).abs() < 1e-15);
        let flip = Rotation3::planar(PI);
        assert!((d_r_g(&g, &flip, Point2::ORIGIN) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn g_omega_derivatives_match_fd() {
        let g = GOmega::new(0.7).unwrap();
        let p = Point2::new(0.3, -0.4);
        let h = 1e-6;
        let [gx, gy] = g.jacobian(p);
        let fdx = (g.value(Point2::new(p.x + h, p.y)) - g.value(Point2::new(p.x - h, p.y))) / (2.0 * h);
        let fdy = (g.value(Point2::new(p.x, p.y + h)) - g.value(Point2::new(p.x, p.y - h))) / (2.0 * h);
        assert!((gx - fdx).norm() < 1e-8 && (gy - fdy).norm() < 1e-8);
        let [hxx, hxy, hyy] = g.hessian(p);
        let jx = |q: Point2| g.jacobian(q);
        let fxx = (jx(Point2::new(p.x + h, p.y))[0] - jx(Point2::new(p.x - h, p.y))[0]) / (2.0 * h);
        let fxy = (jx(Point2::new(p.x, p.y + h))[0] - jx(Point2::new(p.x, p.y - h))[0]) / (2.0 * h);
        let fyy = (jx(Point2::new(p.x, p.y + h))[1] - jx(Point2::new(p.x, p.y - h))[1]) / (2.0 * h);
        assert!((hxx - fxx).norm() < 1e-7 && (hxy - fxy).norm() < 1e-7 && (hyy - fyy).norm() < 1e-7);
    }

    #[test]
    fn transformed_datum_derivatives_match_fd() {
        let g = TransformedDatum {
            outer: Rotation3::about_axis(Vec3::new(1.0, 2.0, -0.5), 0.8),
            planar_angle: 2.0 * PI / 3.0,
            inner: Arc::new(GOmega::new(0.6).unwrap()),
        };
        let p = Point2::new(-0.2, 0.35);
        let h = 1e-6;
        let [gx, gy] = g.jacobian(p);
        let fdx = (g.value(Point2::new(p.x + h, p.y)) - g.value(Point2::new(p.x - h, p.y))) / (2.0 * h);
        let fdy = (g.value(Point2::new(p.x, p.y + h)) - g.value(Point2::new(p.x, p.y - h))) / (2.0 * h);
        assert!((gx - fdx).norm() < 1e-8 && (gy - fdy).norm() < 1e-8);
        let [_, hxy, hyy] = g.hessian(p);
        let fxy = (g.jacobian(Point2::new(p.x + h, p.y))[1] - g.jacobian(Point2::new(p.x - h, p.y))[1]) / (2.0 * h);
        let fyy = (g.jacobian(Point2::new(p.x, p.y + h))[1] - g.jacobian(Point2::new(p.x, p.y - h))[1]) / (2.0 * h);
        assert!((hxy - fxy).norm() < 1e-7 && (hyy - fyy).norm() < 1e-7);
    }

    #[test]
    fn error_scales_two_bubbles() {
        let e = error_scales(0.1, &[10.0, 20.0]);
        assert_eq!(e.e_pairs.len(), 1);
        let expected = 0.01 + 0.1 * (10f64.ln() / 10.0 + 20f64.ln() / 20.0) + 2.0 / 200.0;
        assert!((e.e_tilde - expected).abs() < 1e-15);
    }
}
