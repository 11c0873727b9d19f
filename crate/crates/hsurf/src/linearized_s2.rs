//! The linearised bubble operator on the sphere, block by block in
//! spherical-harmonic degree.
//!
//! Pulled back to `S²` by the stereographic chart, the linearised equation
//! `Δw = 2(w_x∧δ_y + δ_x∧w_y)` becomes `Γ(F) = 0` with
//! `Γ(F) = Δ_{S²}F − (2/sin φ)(F_θ∧δ_φ + δ_θ∧F_φ)`, `δ(θ, φ)` the position
//! vector. On degree-`n` fields this is `Γ(F) = −n(n+1)F − 2 L×F`, where
//! `L = p × ∇` is the (real, antisymmetric) rotation generator acting on each
//! component and `(L×F)_l = Σ ε_{lki} L_k F_i`. The second variation of the
//! bubble energy in a direction `w` is `⟨−Γw, w⟩_{L²(S²)}`.
//!
//! Harmonics use the Condon–Shortley phase `P^k_n(x) = (−1)^k(1−x²)^{k/2}
//! d^kP_n/dx^k` and the real orthonormal basis
//! `{Y_{n,0}, √2 Re Y_{n,1}, √2 Im Y_{n,1}, …}`; vector fields are indexed
//! component-major, `e_i Y_j ↦ i(2n+1) + j`.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

type Vec3 = Vector3<f64>;

/// `(n, k)` with `|k| ≤ n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HarmonicIndex {
    pub n: usize,
    pub k: i64,
}

impl HarmonicIndex {
    pub fn new(n: usize, k: i64) -> Result<Self> {
        if k.unsigned_abs() as usize > n {
            return Err(Error::InvalidInput(format!("|k| = {} exceeds n = {n}", k.abs())));
        }
        Ok(Self { n, k })
    }
}

/// Associated Legendre function `P^k_n(x)` (Condon–Shortley phase) by upward
/// recurrence in `n` at fixed `k`.
pub fn legendre_p(n: usize, k: usize, x: f64) -> Result<f64> {
    if k > n {
        return Err(Error::InvalidInput(format!("order k = {k} exceeds degree n = {n}")));
    }
    if !(x.abs() <= 1.0) {
        return Err(Error::InvalidInput(format!("argument {x} outside [-1, 1]")));
    }
    Ok(legendre_unchecked(n, k, x))
}

fn legendre_unchecked(n: usize, k: usize, x: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pkk = 1.0;
    for i in 0..k {
        pkk *= -((2 * i + 1) as f64) * s;
    }
    if n == k {
        return pkk;
    }
    let mut prev = pkk;
    let mut cur = x * (2 * k + 1) as f64 * pkk;
    for l in (k + 2)..=n {
        let next = (x * (2 * l - 1) as f64 * cur - (l + k - 1) as f64 * prev) / (l - k) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// `dP^k_n/dx` from `(1 − x²)P' = −n x P^k_n + (n + k) P^k_{n−1}` (|x| < 1).
pub fn legendre_dp(n: usize, k: usize, x: f64) -> f64 {
    let p = legendre_unchecked(n, k, x);
    let pm = if n == 0 { 0.0 } else { legendre_unchecked(n - 1, k, x) };
    (-(n as f64) * x * p + (n + k) as f64 * pm) / (1.0 - x * x)
}

/// Normalisation and ladder constants `(c_{n,k}, d_{n,k}, e_{n,k})`:
/// `c_{n,k} = √((2n+1)/4π · (n−k)!/(n+k)!)`,
/// `d_{n,k} = c_{n,k}/c_{n,k+1} = √((n−k)(n+k+1))` (0 at `k = n`) and
/// `e_{n,k} = c_{n,k−1}/c_{n,k} = √((n−k+1)(n+k))`, the raising and
/// lowering coefficients of the harmonic ladder.
pub fn norm_constants(n: usize, k: usize) -> Result<(f64, f64, f64)> {
    if k > n {
        return Err(Error::InvalidInput(format!("order k = {k} exceeds degree n = {n}")));
    }
    let mut ratio = 1.0;
    for m in (n - k + 1)..=(n + k) {
        ratio /= m as f64;
    }
    let c = ((2 * n + 1) as f64 / (4.0 * PI) * ratio).sqrt();
    let (nf, kf) = (n as f64, k as f64);
    let d = ((nf - kf) * (nf + kf + 1.0)).sqrt();
    let e = ((nf - kf + 1.0) * (nf + kf)).sqrt();
    Ok((c, d, e))
}

/// Real orthonormal degree-`n` harmonic number `j` (`0 ↦ Y_{n,0}`,
/// `2k−1 ↦ √2 Re Y_{n,k}`, `2k ↦ √2 Im Y_{n,k}`) and its `θ`, `φ` derivatives.
pub fn real_harmonic(n: usize, j: usize, theta: f64, phi: f64) -> (f64, f64, f64) {
    let k = j.div_ceil(2);
    let (c, _, _) = norm_constants(n, k).expect("index within degree");
    let x = phi.cos();
    let p = legendre_unchecked(n, k, x);
    let dp_dphi = -phi.sin() * legendre_dp(n, k, x);
    let amp = if k == 0 { c } else { std::f64::consts::SQRT_2 * c };
    let kf = k as f64;
    let (ang, dang) = if k == 0 {
        (1.0, 0.0)
    } else if j % 2 == 1 {
        ((kf * theta).cos(), -kf * (kf * theta).sin())
    } else {
        ((kf * theta).sin(), kf * (kf * theta).cos())
    };
    (amp * p * ang, amp * p * dang, amp * dp_dphi * ang)
}

/// Complex matrices of `L_x, L_y, L_z` on `{Y_{n,m}}_{m=−n..n}` (index `m + n`),
/// from `L_z Y_m = i m Y_m`, `L_± Y_m = i√((n∓m)(n±m+1)) Y_{m±1}`.
pub fn rotation_generators_complex(n: usize) -> [DMatrix<Complex64>; 3] {
    let dim = 2 * n + 1;
    let i = Complex64::i();
    let mut lp = DMatrix::zeros(dim, dim);
    let mut lm = DMatrix::zeros(dim, dim);
    let mut lz = DMatrix::zeros(dim, dim);
    let nf = n as f64;
    for col in 0..dim {
        let m = col as f64 - nf;
        lz[(col, col)] = i * m;
        if col + 1 < dim {
            lp[(col + 1, col)] = i * ((nf - m) * (nf + m + 1.0)).sqrt();
        }
        if col > 0 {
            lm[(col - 1, col)] = i * ((nf + m) * (nf - m + 1.0)).sqrt();
        }
    }
    let lx = (&lp + &lm) * Complex64::new(0.5, 0.0);
    let ly = (&lp - &lm) * Complex64::new(0.0, -0.5);
    [lx, ly, lz]
}

/// Unitary change of basis: column `j` holds the real harmonic `j` expanded
/// in `{Y_{n,m}}` (with `Y_{n,−m} = (−1)^m conj Y_{n,m}`).
pub fn real_basis_transform(n: usize) -> DMatrix<Complex64> {
    let dim = 2 * n + 1;
    let mut u = DMatrix::zeros(dim, dim);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    u[(n, 0)] = Complex64::new(1.0, 0.0);
    for k in 1..=n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        // C_k = (Y_k + (−1)^k Y_{−k})/√2, S_k = (Y_k − (−1)^k Y_{−k})/(i√2).
        u[(n + k, 2 * k - 1)] = Complex64::new(r, 0.0);
        u[(n - k, 2 * k - 1)] = Complex64::new(sign * r, 0.0);
        u[(n + k, 2 * k)] = Complex64::new(0.0, -r);
        u[(n - k, 2 * k)] = Complex64::new(0.0, sign * r);
    }
    u
}

/// Real antisymmetric matrices of `L_x, L_y, L_z` in the real basis.
pub fn rotation_generators_real(n: usize) -> [DMatrix<f64>; 3] {
    let u = real_basis_transform(n);
    let ud = u.adjoint();
    rotation_generators_complex(n).map(|l| (&ud * l * &u).map(|z| z.re))
}

fn assemble_gamma<T>(n: usize, l: &[DMatrix<T>; 3]) -> DMatrix<T>
where
    T: nalgebra::Scalar + num_traits_like::Ring,
{
    let dim = 2 * n + 1;
    let mut g = DMatrix::from_element(3 * dim, 3 * dim, T::zero());
    let diag = T::from_f64(-((n * (n + 1)) as f64));
    for r in 0..3 * dim {
        g[(r, r)] = diag.clone();
    }
    // (L×F)_l = Σ ε_{lki} L_k F_i.
    for lc in 0..3 {
        for k in 0..3 {
            for ic in 0..3 {
                let eps = levi_civita(lc, k, ic);
                if eps == 0.0 {
                    continue;
                }
                let coef = T::from_f64(-2.0 * eps);
                for a in 0..dim {
                    for b in 0..dim {
                        let v = l[k][(a, b)].clone();
                        let cur = g[(lc * dim + a, ic * dim + b)].clone();
                        g[(lc * dim + a, ic * dim + b)] = cur + coef.clone() * v;
                    }
                }
            }
        }
    }
    g
}

mod num_traits_like {
    use num_complex::Complex64;
    pub trait Ring: Clone + std::ops::Add<Output = Self> + std::ops::Mul<Output = Self> {
        fn zero() -> Self;
        fn from_f64(v: f64) -> Self;
    }
    impl Ring for f64 {
        fn zero() -> Self {
            0.0
        }
        fn from_f64(v: f64) -> Self {
            v
        }
    }
    impl Ring for Complex64 {
        fn zero() -> Self {
            Complex64::new(0.0, 0.0)
        }
        fn from_f64(v: f64) -> Self {
            Complex64::new(v, 0.0)
        }
    }
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `Γ` restricted to degree-`n` vector harmonics, as a real `3(2n+1)` square
/// matrix in the component-major real basis.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicBlock {
    pub degree: usize,
    pub matrix: DMatrix<f64>,
}

impl HarmonicBlock {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.matrix.clone().svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

/// Closed-form block from the ladder action of the rotation generators.
pub fn gamma_block(n: usize) -> HarmonicBlock {
    HarmonicBlock { degree: n, matrix: assemble_gamma(n, &rotation_generators_real(n)) }
}

/// The same operator in the complex basis `{e_i Y_{n,m}}`.
pub fn gamma_block_complex(n: usize) -> DMatrix<Complex64> {
    assemble_gamma(n, &rotation_generators_complex(n))
}

/// Tensor Gauss–Legendre (in `cos φ`) × trapezoid (in `θ`) rule on `S²`:
/// `(θ, φ, weight)`.
pub fn sphere_rule(n_phi: usize, n_theta: usize) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::with_capacity(n_phi * n_theta);
    let dth = 2.0 * PI / n_theta as f64;
    for (x, w) in gauss_legendre(n_phi, -1.0, 1.0) {
        let phi = x.acos();
        for j in 0..n_theta {
            out.push((j as f64 * dth, phi, w * dth));
        }
    }
    out
}

/// Default quadrature orders on `S²` (GL 64 in `cos φ`, trapezoid 128 in `θ`).
pub const SPHERE_RULE: (usize, usize) = (64, 128);

fn position(theta: f64, phi: f64) -> (Vec3, Vec3, Vec3) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    (
        Vec3::new(sp * ct, sp * st, cp),
        Vec3::new(-sp * st, sp * ct, 0.0),
        Vec3::new(cp * ct, cp * st, -sp),
    )
}

/// `⟨e_l Y^{(m)}_a, Γ(e_i Y^{(n)}_b)⟩` for all basis pairs, with `Γ` evaluated
/// pointwise from its defining formula and the inner products by quadrature.
pub fn gamma_projection_quadrature(n_in: usize, n_out: usize, rule: (usize, usize)) -> DMatrix<f64> {
    let (din, dout) = (2 * n_in + 1, 2 * n_out + 1);
    let nodes = sphere_rule(rule.0, rule.1);
    let lap = -((n_in * (n_in + 1)) as f64);
    let cols: Vec<Vec<f64>> = (0..3 * din)
        .into_par_iter()
        .map(|col| {
            let (ic, b) = (col / din, col % din);
            let mut acc = vec![0.0; 3 * dout];
            for &(theta, phi, w) in &nodes {
                let (y, yt, yp) = real_harmonic(n_in, b, theta, phi);
                let (_, d_t, d_p) = position(theta, phi);
                let mut f = Vec3::zeros();
                let mut ft = Vec3::zeros();
                let mut fp = Vec3::zeros();
                f[ic] = y;
                ft[ic] = yt;
                fp[ic] = yp;
                let gamma = lap * f - 2.0 / phi.sin() * (ft.cross(&d_p) + d_t.cross(&fp));
                for a in 0..dout {
                    let (ya, _, _) = real_harmonic(n_out, a, theta, phi);
                    for lc in 0..3 {
                        acc[lc * dout + a] += w * ya * gamma[lc];
                    }
                }
            }
            acc
        })
        .collect();
    DMatrix::from_fn(3 * dout, 3 * din, |r, c| cols[c][r])
}

/// Block of `Γ` assembled by quadrature of its defining formula.
pub fn gamma_block_quadrature(n: usize) -> HarmonicBlock {
    HarmonicBlock { degree: n, matrix: gamma_projection_quadrature(n, n, SPHERE_RULE) }
}

/// Gram matrix of the real degree-`n` harmonics by quadrature.
pub fn harmonic_gram(n: usize, rule: (usize, usize)) -> DMatrix<f64> {
    let dim = 2 * n + 1;
    let nodes = sphere_rule(rule.0, rule.1);
    DMatrix::from_fn(dim, dim, |a, b| {
        nodes
            .iter()
            .map(|&(t, p, w)| w * real_harmonic(n, a, t, p).0 * real_harmonic(n, b, t, p).0)
            .sum()
    })
}

/// Numeric nullspace dimension: singular values `≤ tol·σ_max` count as zero
/// (a zero block has full nullspace).
pub fn kernel_dimension(n: usize, tol: f64) -> usize {
    kernel_from_singular(&gamma_block(n).singular_values(), tol)
}

fn kernel_from_singular(s: &[f64], tol: f64) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return s.len();
    }
    s.iter().filter(|&&v| v <= tol * smax).count()
}

/// Per-degree kernel data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelDegree {
    pub n: usize,
    pub block_size: usize,
    pub dimension: usize,
    pub largest_singular_value: f64,
    /// Smallest singular value above the threshold (the margin to the
    /// nearest non-kernel direction); `None` if the block is all kernel.
    pub smallest_nonzero_singular_value: Option<f64>,
    /// Whether `n + 1 ≤ √(18 + √24)`.
    pub bound_admits_kernel: bool,
}

/// Kernel dimensions for `n = 0..=n_max`, computed in parallel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelReport {
    pub n_max: usize,
    pub tol: f64,
    pub degrees: Vec<KernelDegree>,
    pub dims: Vec<usize>,
    /// `Σ_{n ≤ 3}` of the dimensions.
    pub total_low_degree: usize,
    pub bound: f64,
}

pub fn kernel_report(n_max: usize, tol: f64) -> KernelReport {
    let degrees: Vec<KernelDegree> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let s = gamma_block(n).singular_values();
            let dimension = kernel_from_singular(&s, tol);
            let smax = s[0];
            KernelDegree {
                n,
                block_size: s.len(),
                dimension,
                largest_singular_value: smax,
                smallest_nonzero_singular_value: s.iter().copied().filter(|&v| v > tol * smax).reduce(f64::min),
                bound_admits_kernel: n == 0 || appendix_inequality_check(n),
            }
        })
        .collect();
    let dims: Vec<usize> = degrees.iter().map(|d| d.dimension).collect();
    KernelReport {
        n_max,
        tol,
        total_low_degree: dims.iter().take(4).sum(),
        dims,
        degrees,
        bound: coefficient_bound(),
    }
}

/// `√(18 + √24)`.
pub fn coefficient_bound() -> f64 {
    (18.0 + 24f64.sqrt()).sqrt()
}

/// Whether `n + 1 ≤ √(18 + √24)`, i.e. whether the degree-`n` kernel is
/// admitted by the a-priori coefficient bound.
pub fn appendix_inequality_check(n: usize) -> bool {
    (n + 1) as f64 <= coefficient_bound()
}

/// A member of the planar kernel family
/// `w = c + (α, β, γ)×δ + (α'δ₁ + β'δ₂ + γ'δ₃)δ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct KernelSample {
    pub constant: [f64; 3],
    pub skew: [f64; 3],
    pub radial: [f64; 3],
}

impl KernelSample {
    /// The seven one-parameter family members: `c = (1,1,1)`, then each of
    /// `α, β, γ, α', β', γ'` set to 1.
    pub fn basis() -> Vec<KernelSample> {
        let mut v = vec![KernelSample { constant: [1.0; 3], ..Default::default() }];
        for i in 0..3 {
            let mut s = KernelSample::default();
            s.skew[i] = 1.0;
            v.push(s);
        }
        for i in 0..3 {
            let mut s = KernelSample::default();
            s.radial[i] = 1.0;
            v.push(s);
        }
        v
    }

    fn field(&self, xi: [f64; 2]) -> (Vec3, Vec3, Vec3) {
        let (d, dx, dy) = stereo_jet(xi);
        let k = Vec3::from(self.skew);
        let a = Vec3::from(self.radial);
        let w = Vec3::from(self.constant) + k.cross(&d) + a.dot(&d) * d;
        let wx = k.cross(&dx) + a.dot(&dx) * d + a.dot(&d) * dx;
        let wy = k.cross(&dy) + a.dot(&dy) * d + a.dot(&d) * dy;
        (w, wx, wy)
    }
}

fn stereo_jet(xi: [f64; 2]) -> (Vec3, Vec3, Vec3) {
    let (x, y) = (xi[0], xi[1]);
    let q = 1.0 + x * x + y * y;
    let d = Vec3::new(2.0 * x, 2.0 * y, x * x + y * y - 1.0) / q;
    let dx = Vec3::new(2.0 * (q - 2.0 * x * x), -4.0 * x * y, 4.0 * x) / (q * q);
    let dy = Vec3::new(-4.0 * x * y, 2.0 * (q - 2.0 * y * y), 4.0 * y) / (q * q);
    (d, dx, dy)
}

/// Max over `points` of `|Δw − 2(w_x∧δ_y + δ_x∧w_y)|` for the planar kernel
/// field, with a fourth-order finite-difference Laplacian (step `5e−3`).
pub fn verify_polynomial_kernel_at(sample: &KernelSample, points: &[[f64; 2]]) -> f64 {
    let h = 5e-3;
    let w = |x: f64, y: f64| sample.field([x, y]).0;
    points
        .iter()
        .map(|&[x, y]| {
            let second = |e: [f64; 2]| {
                let at = |t: f64| w(x + t * e[0], y + t * e[1]);
                (-at(2.0 * h) + 16.0 * at(h) - 30.0 * at(0.0) + 16.0 * at(-h) - at(-2.0 * h)) / (12.0 * h * h)
            };
            let lap = second([1.0, 0.0]) + second([0.0, 1.0]);
            let (_, wx, wy) = sample.field([x, y]);
            let (_, dx, dy) = stereo_jet([x, y]);
            (lap - 2.0 * (wx.cross(&dy) + dx.cross(&wy))).norm()
        })
        .fold(0.0, f64::max)
}

/// Residual on 100 fixed points of the square `[−1.5, 1.5]²`.
pub fn verify_polynomial_kernel(sample: &KernelSample) -> f64 {
    let pts: Vec<[f64; 2]> = (0..100)
        .map(|i| {
            let (a, b) = ((i % 10) as f64, (i / 10) as f64);
            [-1.5 + 3.0 * (a + 0.37) / 10.0, -1.5 + 3.0 * (b + 0.61) / 10.0]
        })
        .collect();
    verify_polynomial_kernel_at(sample, &pts)
}

/// Spectral data of the quadratic form `⟨−Γw, w⟩` on one degree block.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockSpectrum {
    pub n: usize,
    pub kernel_dimension: usize,
    /// Smallest eigenvalue of `−Γ` orthogonal to the kernel (and to `δ` at
    /// `n = 1`).
    pub min_eigenvalue: f64,
    /// The same divided by the Dirichlet weight `n(n+1)`.
    pub min_ratio: f64,
    /// Largest `|eigenvalue|` over kernel directions.
    pub kernel_max_abs: f64,
}

/// Outcome of the spectral gap check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralGapReport {
    pub n_max: usize,
    pub blocks: Vec<BlockSpectrum>,
    /// `⟨−Γδ, δ⟩` with `δ` expanded in harmonics up to `n_max` (`−8π`).
    pub delta_value: f64,
    /// `⟨−Γδ, δ⟩/⟨−Δδ, δ⟩`.
    pub delta_ratio: f64,
    pub pass: bool,
}

/// Coefficients of the position field `p ↦ p` in the degree-1 real basis.
pub fn delta_coefficients() -> DVector<f64> {
    let nodes = sphere_rule(SPHERE_RULE.0, SPHERE_RULE.1);
    DVector::from_fn(9, |r, _| {
        let (i, j) = (r / 3, r % 3);
        nodes.iter().map(|&(t, p, w)| w * real_harmonic(1, j, t, p).0 * position(t, p).0[i]).sum()
    })
}

/// Eigen-decomposes `−Γ` on every block `1 ≤ n ≤ n_max`, removing the
/// numerical kernel (threshold `1e−8·σ_max`) and, at `n = 1`, the `δ`
/// direction; passes if every remaining eigenvalue is positive and `δ`
/// itself gives a negative value.
pub fn spectral_gap_check(n_max: usize) -> Result<SpectralGapReport> {
    if n_max < 4 {
        return Err(Error::InvalidInput(format!("n_max must be at least 4, got {n_max}")));
    }
    let delta = delta_coefficients();
    let blocks: Vec<BlockSpectrum> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let neg = -gamma_block(n).matrix;
            let sym = (&neg + neg.transpose()) * 0.5;
            let eig = sym.symmetric_eigen();
            let smax = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let thr = 1e-8 * smax;
            let mut kernel_max_abs = 0.0f64;
            let mut kernel_dimension = 0;
            let mut min_eigenvalue = f64::INFINITY;
            for (idx, &lam) in eig.eigenvalues.iter().enumerate() {
                if lam.abs() <= thr {
                    kernel_dimension += 1;
                    kernel_max_abs = kernel_max_abs.max(lam.abs());
                    continue;
                }
                if n == 1 {
                    let v = eig.eigenvectors.column(idx);
                    let overlap = v.dot(&delta) / delta.norm();
                    if overlap.abs() > 0.5 {
                        continue;
                    }
                }
                min_eigenvalue = min_eigenvalue.min(lam);
            }
            BlockSpectrum {
                n,
                kernel_dimension,
                min_eigenvalue,
                min_ratio: min_eigenvalue / (n * (n + 1)) as f64,
                kernel_max_abs,
            }
        })
        .collect();
    let g1 = gamma_block(1).matrix;
    let delta_value = -(delta.transpose() * &g1 * &delta)[(0, 0)];
    let delta_ratio = delta_value / (2.0 * delta.norm_squared());
    let pass = delta_value < 0.0 && blocks.iter().all(|b| b.min_eigenvalue > 0.0 && b.kernel_max_abs < 1e-8);
    Ok(SpectralGapReport { n_max, blocks, delta_value, delta_ratio, pass })
}
