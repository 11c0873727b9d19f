//! Green's function, Robin function, the harmonic corrections `h₁, h₂, h₃`,
//! the concentration function `H̃` and harmonic extension on the unit disk,
//! transported to simply connected domains through a conformal map.
//!
//! Conventions: `G(a, ξ) = −log|a − ξ| − H(a, ξ)` vanishes for `ξ ∈ ∂Ω`. With
//! `f : Ω → D` conformal,
//!
//! * `G(a, ξ) = −log|f(ξ) − f(a)| + log|1 − conj(f(a)) f(ξ)|`,
//! * `H(a, a) = log|f'(a)| − log(1 − |f(a)|²)`,
//! * `H̃(a) = ∂h₁/∂x + ∂h₂/∂y |_{ξ=a} = 2|f'(a)|²/(1 − |f(a)|²)² = 2e^{2H(a,a)}`.
//!
//! The mixed derivatives `∂²G/∂a_i∂ξ_j` are expressed through the two
//! holomorphic kernels `P = −f'(ξ)f'(a)/(f(ξ) − f(a))²` and
//! `Q = −conj(f'(a)) f'(ξ)/(1 − conj(f(a)) f(ξ))²`.

use crate::annulus_robin::{self, AnnulusModel};
use crate::bubble_core::{bubble_value, BubbleParams, Point2, Vec3};
use crate::error::{Error, Result};
use num_complex::Complex64 as C;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

/// A conformal map `f : Ω → D` with its first two complex derivatives.
pub trait ConformalMap: Debug + Send + Sync {
    fn f(&self, z: C) -> C;
    fn df(&self, z: C) -> C;
    fn d2f(&self, z: C) -> C;
}

/// The Möbius map `f(z) = (αz + β)/(γz + δ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub alpha: C,
    pub beta: C,
    pub gamma: C,
    pub delta: C,
}

impl Mobius {
    /// General Möbius map; rejects degenerate coefficients (`αδ − βγ = 0`).
    pub fn new(alpha: C, beta: C, gamma: C, delta: C) -> Result<Self> {
        let det = alpha * delta - beta * gamma;
        if det.norm() < 1e-14 {
            return Err(Error::InvalidInput("degenerate Möbius coefficients".into()));
        }
        Ok(Self { alpha, beta, gamma, delta })
    }

    /// Disk automorphism `f(z) = e^{iθ}(z − c)/(1 − c̄z)` with `|c| < 1`.
    pub fn disk_automorphism(theta: f64, c: C) -> Result<Self> {
        if c.norm() >= 1.0 {
            return Err(Error::InvalidInput("automorphism centre must lie in the unit disk".into()));
        }
        let e = C::from_polar(1.0, theta);
        Self::new(e, -e * c, -c.conj(), C::new(1.0, 0.0))
    }

    /// The affine map `f(z) = (z − centre)/radius` taking the disk
    /// `|z − centre| < radius` onto the unit disk.
    pub fn from_disk(center: C, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidInput("radius must be positive".into()));
        }
        Self::new(C::new(1.0 / radius, 0.0), -center / radius, C::new(0.0, 0.0), C::new(1.0, 0.0))
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, o: &Mobius) -> Result<Self> {
        Self::new(
            self.alpha * o.alpha + self.beta * o.gamma,
            self.alpha * o.beta + self.beta * o.delta,
            self.gamma * o.alpha + self.delta * o.gamma,
            self.gamma * o.beta + self.delta * o.delta,
        )
    }

    fn det(&self) -> C {
        self.alpha * self.delta - self.beta * self.gamma
    }
}

impl ConformalMap for Mobius {
    fn f(&self, z: C) -> C {
        (self.alpha * z + self.beta) / (self.gamma * z + self.delta)
    }
    fn df(&self, z: C) -> C {
        let den = self.gamma * z + self.delta;
        self.det() / (den * den)
    }
    fn d2f(&self, z: C) -> C {
        let den = self.gamma * z + self.delta;
        -2.0 * self.gamma * self.det() / (den * den * den)
    }
}

/// The identity map of the unit disk.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityMap;

impl ConformalMap for IdentityMap {
    fn f(&self, z: C) -> C {
        z
    }
    fn df(&self, _z: C) -> C {
        C::new(1.0, 0.0)
    }
    fn d2f(&self, _z: C) -> C {
        C::new(0.0, 0.0)
    }
}

/// The domains supported by the Green-function machinery.
#[derive(Clone, Debug)]
pub enum DomainModel {
    /// The unit disk.
    Disk,
    /// `Ω = f⁻¹(D)` for a user-supplied conformal map `f : Ω → D`.
    SimplyConnected(Arc<dyn ConformalMap>),
    /// The round annulus `1/ρ < |z| < ρ`.
    Annulus(AnnulusModel),
}

/// Numerical knobs of the Green-function operations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenOptions {
    /// Interior margin: queries require `dist(a, ∂Ω) ≥ τ₀`.
    pub tau0: f64,
    /// Number of trapezoid nodes for Poisson-kernel quadratures.
    pub poisson_order: usize,
}

impl Default for GreenOptions {
    fn default() -> Self {
        Self { tau0: 0.05, poisson_order: 512 }
    }
}

/// `(h₁, h₂, h₃)` at one pair `(a, ξ)`; `h₃` is provided on the disk only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HFunctions {
    pub h1: f64,
    pub h2: f64,
    pub h3: Option<f64>,
}

/// Mixed second derivatives `∂G₁/∂x, ∂G₁/∂y, ∂G₂/∂x, ∂G₂/∂y` at `(a, b)`,
/// where `G_i = ∂G/∂a_i` and `x, y` are the coordinates of the second argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GreenGrad {
    pub g1x: f64,
    pub g1y: f64,
    pub g2x: f64,
    pub g2y: f64,
}

impl GreenGrad {
    /// Entries as the matrix `[[g1x, g1y], [g2x, g2y]]`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.g1x, self.g1y], [self.g2x, self.g2y]]
    }

    fn from_kernels(p: C, q: C) -> Self {
        GreenGrad {
            g1x: p.re + q.re,
            g1y: -p.im - q.im,
            g2x: -p.im + q.im,
            g2y: -p.re + q.re,
        }
    }
}

/// Derivatives of [`GreenGrad`] with respect to the four coordinates
/// `(a₁, a₂, b₁, b₂)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenGradDerivatives {
    pub value: GreenGrad,
    pub d: [GreenGrad; 4],
}

/// Local values of the conformal map and its derivatives at one point.
#[derive(Clone, Copy, Debug)]
struct MapJet {
    f: C,
    f1: C,
    f2: C,
}

impl DomainModel {
    /// The unit disk.
    pub fn disk() -> Self {
        DomainModel::Disk
    }

    /// A Möbius image of the unit disk.
    pub fn mobius(m: Mobius) -> Self {
        DomainModel::SimplyConnected(Arc::new(m))
    }

    /// Whether `p` lies in the open domain.
    pub fn contains(&self, p: Point2) -> bool {
        match self {
            DomainModel::Disk => p.norm_sq() < 1.0,
            DomainModel::SimplyConnected(f) => f.f(p.to_complex()).norm() < 1.0,
            DomainModel::Annulus(m) => {
                let r = p.norm();
                r > 1.0 / m.rho && r < m.rho
            }
        }
    }

    /// A lower bound proxy for `dist(p, ∂Ω)`: exact for the disk and the
    /// annulus; `(1 − |f(p)|)/|f'(p)|` for conformal images.
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        match self {
            DomainModel::Disk => 1.0 - p.norm(),
            DomainModel::SimplyConnected(f) => {
                let z = p.to_complex();
                (1.0 - f.f(z).norm()) / f.df(z).norm()
            }
            DomainModel::Annulus(m) => {
                let r = p.norm();
                (r - 1.0 / m.rho).min(m.rho - r)
            }
        }
    }

    fn map_jet(&self, z: C) -> Result<MapJet> {
        match self {
            DomainModel::Disk => Ok(MapJet { f: z, f1: C::new(1.0, 0.0), f2: C::new(0.0, 0.0) }),
            DomainModel::SimplyConnected(m) => Ok(MapJet { f: m.f(z), f1: m.df(z), f2: m.d2f(z) }),
            DomainModel::Annulus(_) => Err(Error::Unsupported(
                "off-diagonal Green data on the annulus (use annulus_robin for H̃ and H(a,a))".into(),
            )),
        }
    }

    fn check_inside(&self, p: Point2, what: &str) -> Result<()> {
        if !p.is_finite() || !self.contains(p) {
            return Err(Error::InvalidInput(format!("{what} = ({}, {}) lies outside the domain", p.x, p.y)));
        }
        Ok(())
    }

    fn check_margin(&self, p: Point2, tau0: f64, what: &str) -> Result<()> {
        self.check_inside(p, what)?;
        if self.boundary_distance(p) < tau0 {
            return Err(Error::InvalidInput(format!(
                "{what} = ({}, {}) is closer than τ₀ = {tau0} to the boundary",
                p.x, p.y
            )));
        }
        Ok(())
    }
}

/// Green's function `G(a, ξ)` (disk or simply connected domain).
pub fn green(d: &DomainModel, a: Point2, xi: Point2) -> Result<f64> {
    d.check_inside(a, "a")?;
    d.check_inside(xi, "ξ")?;
    if a == xi {
        return Err(Error::SingularInput("G(a, ξ) is singular at ξ = a".into()));
    }
    let ja = d.map_jet(a.to_complex())?;
    let jb = d.map_jet(xi.to_complex())?;
    Ok(-(jb.f - ja.f).norm().ln() + (1.0 - ja.f.conj() * jb.f).norm().ln())
}

/// Regular part `H(a, ξ) = −log|a − ξ| − G(a, ξ)`, continuous across `ξ = a`.
///
/// For the disk this is `−log|1 − āξ|`. Near coincidence
/// (`|ξ − a| < 1e−6`) the quotient `(f(ξ) − f(a))/(ξ − a)` is replaced by its
/// first-order expansion `f'(a) + f''(a)(ξ − a)/2`.
pub fn regular_part(d: &DomainModel, a: Point2, xi: Point2) -> Result<f64> {
    d.check_inside(a, "a")?;
    d.check_inside(xi, "ξ")?;
    let za = a.to_complex();
    let zb = xi.to_complex();
    let ja = d.map_jet(za)?;
    let jb = d.map_jet(zb)?;
    let h = zb - za;
    let quotient = if h.norm() < 1e-6 { ja.f1 + 0.5 * ja.f2 * h } else { (jb.f - ja.f) / h };
    Ok(quotient.norm().ln() - (1.0 - ja.f.conj() * jb.f).norm().ln())
}

/// Diagonal `H(a, a)` of the Robin function for every domain variant.
pub fn robin_diagonal(d: &DomainModel, a: Point2) -> Result<f64> {
    match d {
        DomainModel::Annulus(m) => {
            d.check_inside(a, "a")?;
            let v = annulus_robin::robin_exp_annulus(a.norm(), m)?;
            Ok(0.5 * (0.5 * v.value).ln())
        }
        _ => regular_part(d, a, a),
    }
}

/// `∂_a H(a, ξ)` (Wirtinger derivative in `a`); `h₁ = 2 Re`, `h₂ = −2 Im`.
fn dh_da(ja: &MapJet, jb: &MapJet, za: C, zb: C) -> C {
    let h = zb - za;
    let singular = if h.norm() < 1e-6 {
        // 1/(ξ − a) − f'(a)/(f(ξ) − f(a)) → f''(a)/(2 f'(a)) as ξ → a.
        ja.f2 / (2.0 * ja.f1)
    } else {
        1.0 / h - ja.f1 / (jb.f - ja.f)
    };
    0.5 * singular + 0.5 * ja.f1 * jb.f.conj() / (1.0 - ja.f * jb.f.conj())
}

/// `(h₁, h₂, h₃)(a, ξ)` with default [`GreenOptions`].
pub fn h_functions(d: &DomainModel, a: Point2, xi: Point2) -> Result<HFunctions> {
    h_functions_with(d, a, xi, &GreenOptions::default())
}

/// `h₁ = ∂H/∂a₁`, `h₂ = ∂H/∂a₂` by analytic differentiation of the regular
/// part; `h₃` (disk only) by Poisson-kernel quadrature of its boundary datum
/// `1/|ξ − a|²`.
pub fn h_functions_with(d: &DomainModel, a: Point2, xi: Point2, opts: &GreenOptions) -> Result<HFunctions> {
    if let DomainModel::Annulus(_) = d {
        return Err(Error::Unsupported("h-functions on the annulus".into()));
    }
    d.check_margin(a, opts.tau0, "a")?;
    d.check_inside(xi, "ξ")?;
    let za = a.to_complex();
    let zb = xi.to_complex();
    let ja = d.map_jet(za)?;
    let jb = d.map_jet(zb)?;
    let s = dh_da(&ja, &jb, za, zb);
    let h3 = match d {
        DomainModel::Disk => {
            let n = opts.poisson_order;
            let datum = |t: f64| {
                let p = Point2::new(t.cos(), t.sin());
                Vec3::new(1.0 / p.sub(a).norm_sq(), 0.0, 0.0)
            };
            Some(poisson_extension(&datum, xi, n)[0])
        }
        _ => None,
    };
    Ok(HFunctions { h1: 2.0 * s.re, h2: -2.0 * s.im, h3 })
}

/// The first derivatives `[[∂ₓh₁, ∂_yh₁], [∂ₓh₂, ∂_yh₂]]` at `(a, ξ)`.
pub fn h_gradients(d: &DomainModel, a: Point2, xi: Point2) -> Result<[[f64; 2]; 2]> {
    d.check_inside(a, "a")?;
    d.check_inside(xi, "ξ")?;
    let za = a.to_complex();
    let zb = xi.to_complex();
    let ja = d.map_jet(za)?;
    let jb = d.map_jet(zb)?;
    let (p, q) = kernels(&ja, &jb);
    let h = zb - za;
    if h.norm() < 1e-6 {
        return Err(Error::SingularInput("h-gradients are evaluated off the diagonal only".into()));
    }
    let s_h = -0.5 / (h * h) - 0.5 * p;
    let t = -0.5 * q;
    let u = s_h + t;
    let v = t - s_h;
    Ok([[2.0 * u.re, -2.0 * u.im], [2.0 * v.im, 2.0 * v.re]])
}

fn kernels(ja: &MapJet, jb: &MapJet) -> (C, C) {
    let diff = jb.f - ja.f;
    let p = -jb.f1 * ja.f1 / (diff * diff);
    let den = 1.0 - ja.f.conj() * jb.f;
    let q = -ja.f1.conj() * jb.f1 / (den * den);
    (p, q)
}

/// Concentration function `H̃(a)`.
///
/// Disk: `2/(1 − |a|²)²`; simply connected: `2|f'(a)|²/(1 − |f(a)|²)²`;
/// annulus: the deck-transformation series of [`annulus_robin`].
pub fn h_tilde(d: &DomainModel, a: Point2) -> Result<f64> {
    d.check_inside(a, "a")?;
    match d {
        DomainModel::Annulus(m) => Ok(annulus_robin::h_tilde_annulus(a.norm(), m)?.value),
        _ => {
            let j = d.map_jet(a.to_complex())?;
            let s = 1.0 - j.f.norm_sqr();
            Ok(2.0 * j.f1.norm_sqr() / (s * s))
        }
    }
}

/// `H̃(a)` together with its gradient `(∂H̃/∂a₁, ∂H̃/∂a₂)`.
pub fn h_tilde_with_gradient(d: &DomainModel, a: Point2) -> Result<(f64, [f64; 2])> {
    d.check_inside(a, "a")?;
    match d {
        DomainModel::Annulus(m) => {
            let r = a.norm();
            let (v, dv_ds) = annulus_robin::h_tilde_annulus_log_derivative(r, m)?;
            // d/dr = (1/r) d/d(log r); radial direction a/r.
            let g = dv_ds / (r * r);
            Ok((v, [g * a.x, g * a.y]))
        }
        _ => {
            let j = d.map_jet(a.to_complex())?;
            let s = 1.0 - j.f.norm_sqr();
            let v = 2.0 * j.f1.norm_sqr() / (s * s);
            let dlog = j.f2 / j.f1 + 2.0 * j.f1 * j.f.conj() / s;
            Ok((v, [2.0 * v * dlog.re, -2.0 * v * dlog.im]))
        }
    }
}

/// `∂G₁/∂x, ∂G₁/∂y, ∂G₂/∂x, ∂G₂/∂y` at `(a, b)` in closed form.
///
/// These satisfy `(σ₁² − σ₂²)/|σ|⁴ + ∂h₁/∂x(a, b) = −∂G₁/∂x(a, b)` and the
/// three analogous identities (σ = b − a); see [`h_bracket_terms`].
pub fn green_grad_derivatives(d: &DomainModel, a: Point2, b: Point2) -> Result<GreenGrad> {
    Ok(green_grad_with_derivatives(d, a, b)?.value)
}

/// [`green_grad_derivatives`] together with its partial derivatives in
/// `(a₁, a₂, b₁, b₂)`.
pub fn green_grad_with_derivatives(d: &DomainModel, a: Point2, b: Point2) -> Result<GreenGradDerivatives> {
    d.check_inside(a, "a")?;
    d.check_inside(b, "b")?;
    if a.dist(b) < 1e-12 {
        return Err(Error::SingularInput("green_grad_derivatives requires a ≠ b".into()));
    }
    let za = a.to_complex();
    let zb = b.to_complex();
    let ja = d.map_jet(za)?;
    let jb = d.map_jet(zb)?;
    let (p, q) = kernels(&ja, &jb);
    let diff = jb.f - ja.f;
    let diff2 = diff * diff;
    let diff3 = diff2 * diff;
    let p_b = -jb.f2 * ja.f1 / diff2 + 2.0 * jb.f1 * jb.f1 * ja.f1 / diff3;
    let p_a = -jb.f1 * ja.f2 / diff2 - 2.0 * jb.f1 * ja.f1 * ja.f1 / diff3;
    let cbar = ja.f.conj();
    let den = 1.0 - cbar * jb.f;
    let den2 = den * den;
    let den3 = den2 * den;
    let q_b = -ja.f1.conj() * (jb.f2 / den2 + 2.0 * cbar * jb.f1 * jb.f1 / den3);
    let q_abar = -ja.f2.conj() * jb.f1 / den2 - 2.0 * ja.f1.conj() * ja.f1.conj() * jb.f1 * jb.f / den3;
    let i = C::new(0.0, 1.0);
    Ok(GreenGradDerivatives {
        value: GreenGrad::from_kernels(p, q),
        d: [
            GreenGrad::from_kernels(p_a, q_abar),
            GreenGrad::from_kernels(i * p_a, -i * q_abar),
            GreenGrad::from_kernels(p_b, q_b),
            GreenGrad::from_kernels(i * p_b, i * q_b),
        ],
    })
}

/// The four bracket entries of the pairwise interaction in terms of the
/// h-functions:
/// `[(σ₁²−σ₂²)/|σ|⁴ + ∂ₓh₁, 2σ₁σ₂/|σ|⁴ + ∂_yh₁, 2σ₁σ₂/|σ|⁴ + ∂ₓh₂, (σ₂²−σ₁²)/|σ|⁴ + ∂_yh₂]`
/// evaluated at `(a, b)`, σ = b − a, ordered as `[11, 12, 21, 22]`.
pub fn h_bracket_terms(d: &DomainModel, a: Point2, b: Point2) -> Result<[f64; 4]> {
    let g = h_gradients(d, a, b)?;
    let s = b.sub(a);
    let n4 = s.norm_sq() * s.norm_sq();
    let diag = (s.x * s.x - s.y * s.y) / n4;
    let off = 2.0 * s.x * s.y / n4;
    Ok([diag + g[0][0], off + g[0][1], off + g[1][0], -diag + g[1][1]])
}

/// Harmonic extension into the unit disk by Poisson-kernel trapezoid
/// quadrature with `n` boundary nodes; `boundary` maps the angle to R³.
pub fn harmonic_extension_disk<B: Fn(f64) -> Vec3>(boundary: &B, xi: Point2, n: usize) -> Result<Vec3> {
    if !(xi.norm_sq() < 1.0) {
        return Err(Error::InvalidInput("harmonic extension is evaluated inside the unit disk".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("quadrature order must be positive".into()));
    }
    Ok(poisson_extension(boundary, xi, n))
}

fn poisson_extension<B: Fn(f64) -> Vec3>(boundary: &B, xi: Point2, n: usize) -> Vec3 {
    let r2 = xi.norm_sq();
    let mut acc = Vec3::zeros();
    for j in 0..n {
        let t = 2.0 * PI * j as f64 / n as f64;
        let (s, c) = t.sin_cos();
        let k = (1.0 - r2) / ((c - xi.x).powi(2) + (s - xi.y).powi(2));
        acc += boundary(t) * k;
    }
    acc / n as f64
}

/// Spectral harmonic extension of R³-valued boundary data on the unit circle.
///
/// The data are sampled at `n` equispaced angles; each component is
/// extended as `Re F(z)` with `F(z) = c₀ + 2 Σ_{k≥1} c_k z^k`, so values and
/// first derivatives (`u_x = Re F'`, `u_y = −Im F'`) are available everywhere
/// in the closed disk.
#[derive(Clone, Debug)]
pub struct DiskHarmonic {
    coeffs: [Vec<C>; 3],
}

impl DiskHarmonic {
    /// Samples `boundary` at `n` angles (`n ≥ 4`) and computes the coefficients by FFT.
    pub fn from_boundary<B: Fn(f64) -> Vec3>(boundary: B, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidInput("need at least 4 boundary samples".into()));
        }
        let samples: Vec<Vec3> = (0..n).map(|j| boundary(2.0 * PI * j as f64 / n as f64)).collect();
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n);
        let kmax = (n - 1) / 2;
        let mut coeffs: [Vec<C>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for (c, out) in coeffs.iter_mut().enumerate() {
            let mut buf: Vec<C> = samples.iter().map(|v| C::new(v[c], 0.0)).collect();
            fft.process(&mut buf);
            let mut cs: Vec<C> = buf[..=kmax].iter().map(|z| z / n as f64).collect();
            cs[0] = C::new(cs[0].re, 0.0);
            let scale = cs.iter().map(|z| z.norm()).fold(0.0, f64::max);
            while cs.len() > 1 && cs.last().map(|z| z.norm() <= 1e-17 * scale).unwrap_or(false) {
                cs.pop();
            }
            *out = cs;
        }
        Ok(Self { coeffs })
    }

    /// Number of retained Fourier modes per component.
    pub fn modes(&self) -> [usize; 3] {
        [self.coeffs[0].len(), self.coeffs[1].len(), self.coeffs[2].len()]
    }

    /// Value and first derivatives `(u, u_x, u_y)` at `ξ` (`|ξ| ≤ 1`).
    pub fn eval(&self, xi: Point2) -> (Vec3, Vec3, Vec3) {
        let (u, ux, uy, _) = self.eval2(xi);
        (u, ux, uy)
    }

    /// Value, first derivatives and second derivatives
    /// `[u_xx, u_xy, u_yy]` at `ξ`.
    pub fn eval2(&self, xi: Point2) -> (Vec3, Vec3, Vec3, [Vec3; 3]) {
        let z = xi.to_complex();
        let mut u = Vec3::zeros();
        let mut ux = Vec3::zeros();
        let mut uy = Vec3::zeros();
        let mut hess = [Vec3::zeros(); 3];
        for c in 0..3 {
            let cs = &self.coeffs[c];
            // Horner for S(z) = Σ_{k≥1} c_k z^k and its first two derivatives.
            let mut s = C::new(0.0, 0.0);
            let mut ds = C::new(0.0, 0.0);
            let mut d2s = C::new(0.0, 0.0);
            for k in (1..cs.len()).rev() {
                d2s = d2s * z + 2.0 * ds;
                ds = ds * z + s;
                s = s * z + cs[k];
            }
            d2s = d2s * z + 2.0 * ds;
            ds = ds * z + s;
            s = s * z;
            let val = cs[0] + 2.0 * s;
            let der = 2.0 * ds;
            let der2 = 2.0 * d2s;
            u[c] = val.re;
            ux[c] = der.re;
            uy[c] = -der.im;
            hess[0][c] = der2.re;
            hess[1][c] = -der2.im;
            hess[2][c] = -der2.re;
        }
        (u, ux, uy, hess)
    }
}

/// The boundary correction `φ` of a bubble on the unit disk: the harmonic
/// extension of `δ|∂D`, so that `Pδ = δ − φ` vanishes on the boundary.
pub fn bubble_correction_field(b: &BubbleParams, n: usize) -> Result<DiskHarmonic> {
    DiskHarmonic::from_boundary(|t| bubble_value(b, Point2::new(t.cos(), t.sin())), n)
}

/// `(φ(ξ), φ_approx(ξ))` where `φ` is the harmonic extension of the bubble's
/// boundary values (Poisson quadrature of order `n`) and `φ_approx` is the
/// leading-order asymptotic
/// `R(2h₁(a,ξ)/λ, 2h₂(a,ξ)/λ, 1 − 2h₃(a,ξ)/λ²)`.
pub fn bubble_boundary_correction(b: &BubbleParams, xi: Point2, n: usize) -> Result<(Vec3, Vec3)> {
    let opts = GreenOptions { poisson_order: n, ..GreenOptions::default() };
    let d = DomainModel::Disk;
    let h = h_functions_with(&d, b.center, xi, &opts)?;
    let phi = harmonic_extension_disk(&|t: f64| bubble_value(b, Point2::new(t.cos(), t.sin())), xi, n)?;
    let l = b.scale;
    let approx = Vec3::new(2.0 * h.h1 / l, 2.0 * h.h2 / l, 1.0 - 2.0 * h.h3.unwrap_or(0.0) / (l * l));
    Ok((phi, b.rotation.apply(&approx)))
}

/// `(r_har, r_hyp)`: harmonic radius `e^{−H(a,a)}` and hyperbolic radius
/// (`(1 − |f(a)|²)/|f'(a)|` for conformal images; from the universal
/// covering map on the annulus).
pub fn radii(d: &DomainModel, a: Point2) -> Result<(f64, f64)> {
    let r_har = (-robin_diagonal(d, a)?).exp();
    let r_hyp = match d {
        DomainModel::Annulus(m) => annulus_robin::hyperbolic_radius(a.norm(), m)?,
        _ => {
            let j = d.map_jet(a.to_complex())?;
            (1.0 - j.f.norm_sqr()) / j.f1.norm()
        }
    };
    Ok((r_har, r_hyp))
}
