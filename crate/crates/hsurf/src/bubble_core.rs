//! The bubble family, rotations and their angle charts, wedge calculus,
//! universal constants and pointwise algebraic identities.
//!
//! A bubble is `δ_{a,λ,R}(ξ) = R π(λ(ξ − a))` where
//! `π(ξ) = (2x, 2y, |ξ|² − 1)/(1 + |ξ|²)` is the inverse stereographic
//! projection. Every bubble solves `Δδ = 2 δ_x ∧ δ_y` on the whole plane.

use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::quadrature::{plane_integral, sector_integral, QuadResult};
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Vectors in R³.
pub type Vec3 = Vector3<f64>;

/// A planar point `ξ = (x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, c: f64) -> Point2 {
        Point2::new(self.x * c, self.y * c)
    }

    pub fn dist(self, o: Point2) -> f64 {
        self.sub(o).norm()
    }

    /// The point as a complex number `x + iy`.
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Point2::new(z.re, z.im)
    }

    /// Planar rotation by angle `t` (counter-clockwise).
    pub fn rotate(self, t: f64) -> Point2 {
        let (s, c) = t.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// A rotation of R³, stored as its matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation3(Matrix3<f64>);

impl Rotation3 {
    /// Tolerance used to validate orthogonality and unit determinant.
    pub const TOL: f64 = 1e-12;

    pub fn identity() -> Self {
        Rotation3(Matrix3::identity())
    }

    /// Validates `RᵀR = I` and `det R = 1` within [`Rotation3::TOL`].
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let err = (m.transpose() * m - Matrix3::identity()).abs().max();
        let det = m.determinant();
        if !(err <= Self::TOL) || !((det - 1.0).abs() <= Self::TOL) {
            return Err(Error::InvalidInput(format!(
                "matrix is not a rotation (orthogonality defect {err:e}, det {det})"
            )));
        }
        Ok(Rotation3(m))
    }

    /// Wraps a matrix known to be a rotation up to rounding (no validation).
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation3(m)
    }

    /// Rotation by angle `t` about the unit axis `k` (Rodrigues formula).
    pub fn about_axis(k: Vec3, t: f64) -> Self {
        let k = k.normalize();
        let kx = k.cross_matrix();
        Rotation3(Matrix3::identity() + kx * t.sin() + kx * kx * (1.0 - t.cos()))
    }

    /// The block-diagonal rotation acting as a planar rotation by `t` on the
    /// first two coordinates and fixing `e₃`.
    pub fn planar(t: f64) -> Self {
        let (s, c) = t.sin_cos();
        Rotation3(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        Rotation3(self.0.transpose())
    }

    pub fn compose(&self, o: &Rotation3) -> Self {
        Rotation3(self.0 * o.0)
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// Rows of the matrix, for serialization.
    pub fn rows(&self) -> [[f64; 3]; 3] {
        let m = &self.0;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }

    pub fn from_rows(r: [[f64; 3]; 3]) -> Result<Self> {
        Rotation3::new(Matrix3::new(
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
        ))
    }
}

impl Serialize for Rotation3 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rotation3 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = <[[f64; 3]; 3]>::deserialize(d)?;
        Rotation3::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Angle coordinates `(θ, ψ, φ)` of the rotation chart centred at the identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleTriple {
    pub theta: f64,
    pub psi: f64,
    pub phi: f64,
}

impl AngleTriple {
    /// The chart centre `(π/2, 0, 0)`, which corresponds to the identity.
    pub const CENTER: AngleTriple = AngleTriple { theta: PI / 2.0, psi: 0.0, phi: 0.0 };

    pub const fn new(theta: f64, psi: f64, phi: f64) -> Self {
        Self { theta, psi, phi }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.theta, self.psi, self.phi]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl Default for AngleTriple {
    fn default() -> Self {
        Self::CENTER
    }
}

/// One bubble: centre `a`, scale `λ > 0` and rotation `R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub center: Point2,
    pub scale: f64,
    pub rotation: Rotation3,
}

impl BubbleParams {
    pub fn new(center: Point2, scale: f64, rotation: Rotation3) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidInput(format!("bubble scale must be positive, got {scale}")));
        }
        if !center.is_finite() {
            return Err(Error::InvalidInput("bubble centre must be finite".into()));
        }
        Ok(Self { center, scale, rotation })
    }

    /// Unrotated bubble `π(λ(ξ − a))`.
    pub fn unrotated(center: Point2, scale: f64) -> Result<Self> {
        Self::new(center, scale, Rotation3::identity())
    }
}

/// Inverse stereographic projection `π(ξ) = (2x, 2y, |ξ|² − 1)/(1 + |ξ|²)`.
pub fn stereographic(xi: Point2) -> Vec3 {
    let r2 = xi.norm_sq();
    let s = 1.0 + r2;
    Vec3::new(2.0 * xi.x / s, 2.0 * xi.y / s, (r2 - 1.0) / s)
}

/// Value of the bubble at `ξ`: `R π(λ(ξ − a))`.
pub fn bubble_value(b: &BubbleParams, xi: Point2) -> Vec3 {
    let z = xi.sub(b.center).scale(b.scale);
    b.rotation.apply(&stereographic(z))
}

/// Closed-form first derivatives `(δ_x, δ_y)` of the unrotated bubble at
/// relative position `(x, y) = ξ − a`.
fn derivatives_unrotated(lambda: f64, x: f64, y: f64) -> (Vec3, Vec3) {
    let l2 = lambda * lambda;
    let q = 1.0 + l2 * (x * x + y * y);
    let q2 = q * q;
    let dx = Vec3::new(
        2.0 * lambda * (1.0 + l2 * (y * y - x * x)) / q2,
        -4.0 * l2 * lambda * x * y / q2,
        4.0 * l2 * x / q2,
    );
    let dy = Vec3::new(
        -4.0 * l2 * lambda * x * y / q2,
        2.0 * lambda * (1.0 + l2 * (x * x - y * y)) / q2,
        4.0 * l2 * y / q2,
    );
    (dx, dy)
}

/// First derivatives `(∂δ/∂x, ∂δ/∂y)` of the bubble, from the closed-form
/// table for `R = I` rotated by `R`.
pub fn bubble_derivatives(b: &BubbleParams, xi: Point2) -> (Vec3, Vec3) {
    let d = xi.sub(b.center);
    let (dx, dy) = derivatives_unrotated(b.scale, d.x, d.y);
    (b.rotation.apply(&dx), b.rotation.apply(&dy))
}

/// Closed form of `δ_x ∧ δ_y`:
/// `(−8λ³x, −8λ³y, 4λ²(1 − λ²r²))/(1 + λ²r²)³`, rotated by `R`.
pub fn wedge_xy(b: &BubbleParams, xi: Point2) -> Vec3 {
    let d = xi.sub(b.center);
    let l = b.scale;
    let l2 = l * l;
    let r2 = d.norm_sq();
    let q = 1.0 + l2 * r2;
    let q3 = q * q * q;
    let w = Vec3::new(
        -8.0 * l2 * l * d.x / q3,
        -8.0 * l2 * l * d.y / q3,
        4.0 * l2 * (1.0 - l2 * r2) / q3,
    );
    b.rotation.apply(&w)
}

/// Exact Laplacian of the bubble at `ξ`, computed by propagating second
/// derivatives through the stereographic formula (independent of the
/// closed-form first-derivative table).
pub fn bubble_laplacian(b: &BubbleParams, xi: Point2) -> Vec3 {
    let x = Jet2::var_x(xi.x);
    let y = Jet2::var_y(xi.y);
    let u = (x - b.center.x) * b.scale;
    let v = (y - b.center.y) * b.scale;
    let r2 = u * u + v * v;
    let inv = (r2 + 1.0).recip();
    let comps = [u * inv * 2.0, v * inv * 2.0, (r2 - 1.0) * inv];
    let lap = Vec3::new(comps[0].laplacian(), comps[1].laplacian(), comps[2].laplacian());
    b.rotation.apply(&lap)
}

/// Laplacian of the bubble by second-order central differences of the
/// analytic first derivatives, with step `1e−4·max(1, 1/λ)`.
pub fn bubble_laplacian_fd(b: &BubbleParams, xi: Point2) -> Vec3 {
    let h = 1e-4 * (1.0f64).max(1.0 / b.scale);
    let (xp, _) = bubble_derivatives(b, Point2::new(xi.x + h, xi.y));
    let (xm, _) = bubble_derivatives(b, Point2::new(xi.x - h, xi.y));
    let (_, yp) = bubble_derivatives(b, Point2::new(xi.x, xi.y + h));
    let (_, ym) = bubble_derivatives(b, Point2::new(xi.x, xi.y - h));
    (xp - xm + yp - ym) / (2.0 * h)
}

/// Pointwise residual `Δδ − 2 δ_x ∧ δ_y` of the bubble equation (exact Laplacian).
pub fn bubble_pde_residual(b: &BubbleParams, xi: Point2) -> Vec3 {
    bubble_laplacian(b, xi) - 2.0 * wedge_xy(b, xi)
}

/// Default absolute tolerance of the universal-constant quadratures.
pub const CONSTANT_TOL: f64 = 1e-12;

/// `A₀ = ∫_{R²} |ξ|²/(1 + |ξ|²)³ dξ` by adaptive polar quadrature (exact value π/2).
pub fn constant_a0() -> Result<QuadResult> {
    constant_a0_with_tol(CONSTANT_TOL)
}

/// [`constant_a0`] with an explicit absolute tolerance.
pub fn constant_a0_with_tol(tol: f64) -> Result<QuadResult> {
    plane_integral(a0_integrand, 4, tol)
}

/// The integrand of `A₀`.
pub fn a0_integrand(p: Point2) -> f64 {
    let r2 = p.norm_sq();
    let s = 1.0 + r2;
    r2 / (s * s * s)
}

/// The integrand `(1 − |ξ|²)/(1 + |ξ|²)³` whose integral over the plane vanishes.
pub fn identity_integrand(p: Point2) -> f64 {
    let r2 = p.norm_sq();
    let s = 1.0 + r2;
    (1.0 - r2) / (s * s * s)
}

/// `∫_{R²} (1 − |ξ|²)/(1 + |ξ|²)³ dξ`, which vanishes identically.
pub fn identity_integral_zero() -> Result<QuadResult> {
    plane_integral(identity_integrand, 4, CONSTANT_TOL)
}

/// [`identity_integral_zero`] restricted to an angular sector `[t0, t1]`.
pub fn identity_integral_sector(t0: f64, t1: f64) -> Result<QuadResult> {
    sector_integral(identity_integrand, t0, t1, 8, CONSTANT_TOL)
}

/// The universal constant `A₀ = π/2` (closed form; [`constant_a0`] verifies it).
pub const A0: f64 = PI / 2.0;

/// A smooth map `R² → R³` exposing values and first derivatives.
pub trait SmoothField {
    fn value(&self, p: Point2) -> Vec3;
    /// `(∂v/∂x, ∂v/∂y)`.
    fn jacobian(&self, p: Point2) -> (Vec3, Vec3);
}

impl SmoothField for BubbleParams {
    fn value(&self, p: Point2) -> Vec3 {
        bubble_value(self, p)
    }
    fn jacobian(&self, p: Point2) -> (Vec3, Vec3) {
        bubble_derivatives(self, p)
    }
}

/// `Σᵢ (ξ·∇vᵢ)(v_x ∧ v_y)ᵢ`, which vanishes for every field because
/// `ξ·∇v = x v_x + y v_y` is orthogonal to `v_x ∧ v_y`.
pub fn pohozaev_residual<F: SmoothField + ?Sized>(v: &F, xi: Point2) -> f64 {
    let (vx, vy) = v.jacobian(xi);
    let radial = vx * xi.x + vy * xi.y;
    radial.dot(&vx.cross(&vy))
}

/// The chart matrix `M(θ, ψ, φ)`, equal to `R⁻¹` in the chart centred at the identity.
pub fn chart_matrix(t: AngleTriple) -> Matrix3<f64> {
    let (st, ct) = t.theta.sin_cos();
    let (sp, cp) = t.psi.sin_cos();
    let (sf, cf) = t.phi.sin_cos();
    Matrix3::new(
        cp * cf - ct * sf * sp,
        cp * sf + ct * cf * sp,
        sp * st,
        -st * sf,
        st * cf,
        -ct,
        -sp * cf - ct * sf * cp,
        -sp * sf + ct * cf * cp,
        cp * st,
    )
}

/// Partial derivatives `(∂M/∂θ, ∂M/∂ψ, ∂M/∂φ)` of [`chart_matrix`].
pub fn chart_matrix_derivatives(t: AngleTriple) -> [Matrix3<f64>; 3] {
    let (st, ct) = t.theta.sin_cos();
    let (sp, cp) = t.psi.sin_cos();
    let (sf, cf) = t.phi.sin_cos();
    let d_theta = Matrix3::new(
        st * sf * sp,
        -st * cf * sp,
        sp * ct,
        -ct * sf,
        ct * cf,
        st,
        st * sf * cp,
        -st * cf * cp,
        cp * ct,
    );
    let d_psi = Matrix3::new(
        -sp * cf - ct * sf * cp,
        -sp * sf + ct * cf * cp,
        cp * st,
        0.0,
        0.0,
        0.0,
        -cp * cf + ct * sf * sp,
        -cp * sf - ct * cf * sp,
        -sp * st,
    );
    let d_phi = Matrix3::new(
        -cp * sf - ct * cf * sp,
        cp * cf - ct * sf * sp,
        0.0,
        -st * cf,
        -st * sf,
        0.0,
        sp * sf - ct * cf * cp,
        -sp * cf - ct * sf * cp,
        0.0,
    );
    [d_theta, d_psi, d_phi]
}

/// The rotation `R` whose inverse is the chart matrix `M(θ, ψ, φ)`; the
/// identity at `(π/2, 0, 0)`.
pub fn rotation_from_angles(t: AngleTriple) -> Rotation3 {
    Rotation3::from_matrix_unchecked(chart_matrix(t).transpose())
}

/// Recovers chart angles from a chart matrix (valid near the chart centre,
/// where `θ ∈ (0, π)`).
pub fn angles_from_chart_matrix(m: &Matrix3<f64>) -> AngleTriple {
    let theta = (-m[(1, 2)]).clamp(-1.0, 1.0).acos();
    let phi = (-m[(1, 0)]).atan2(m[(1, 1)]);
    let psi = m[(0, 2)].atan2(m[(2, 2)]);
    AngleTriple::new(theta, psi, phi)
}

/// The rotation `R` solving `R⁻¹·base = M(t)`, i.e. `R = base·M(t)ᵀ`;
/// returns `base` at the chart centre.
pub fn rotation_relative(base: &Rotation3, t: AngleTriple) -> Rotation3 {
    Rotation3::from_matrix_unchecked(base.matrix() * chart_matrix(t).transpose())
}

/// The deterministic rotation taking the south pole `(0, 0, −1)` to `v`:
/// the minimal geodesic rotation, with the antipode `v = (0, 0, 1)` resolved
/// as the rotation by π about the x-axis.
pub fn rotation_aligning(v: &Vec3) -> Result<Rotation3> {
    let n = v.norm();
    if !((n - 1.0).abs() <= 1e-10) {
        return Err(Error::InvalidInput(format!("target must be a unit vector, |v| = {n}")));
    }
    let v = v / n;
    let s = Vec3::new(0.0, 0.0, -1.0);
    let c = s.dot(&v);
    if 1.0 + c < 1e-14 {
        return Ok(Rotation3::from_matrix_unchecked(Matrix3::new(
            1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0,
        )));
    }
    let k = s.cross(&v);
    let kx = k.cross_matrix();
    Ok(Rotation3::from_matrix_unchecked(Matrix3::identity() + kx + kx * kx / (1.0 + c)))
}
