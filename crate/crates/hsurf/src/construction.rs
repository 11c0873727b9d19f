//! Multi-sphere construction on the unit disk: the concentrating boundary
//! data `g_ω` and `G_{k,ω}`, the Hessian matrix `A_{ω,ε}` of the one-bubble
//! functional at its explicit critical point, the boxes `T_μ`, a Newton
//! search for critical points of `Σ_{D,G_{k,ω}}` with a boundary-positivity
//! degree certificate, and the limiting sphere configuration.
//!
//! Block coordinates. Bubble `j` (`j = 1..k`, `α_j = 2πj/k`) is described by
//! its position `q_j = Q_j p_j` in the frame rotated by `−α_j`
//! (`Q_j(x,y) = (cos α_j x + sin α_j y, −sin α_j x + cos α_j y)`), its scale
//! `λ_j` and chart angles `t_j = (θ, ψ, φ)` with
//! `R_j = 𝓡_j · M(t_j)ᵀ · D_j`, `D_j = diag(Q_j, 1)`. With these
//! coordinates the j-th single term is exactly the one-bubble functional of
//! `g_ω` at `(q_j, λ_j, M(t_j)ᵀ)`, so every block is anchored at
//! `(ω, 0, 2/ε, π/2, 0, 0)`. Sphere centres are `R_j(0,0,−1) = 𝓡_j M(t_j)ᵀ(0,0,−1)`.

use crate::bubble_core::{chart_matrix, rotation_aligning, rotation_from_angles, AngleTriple, BubbleParams, Point2, Rotation3, Vec3, A0};
use crate::domain_green::DomainModel;
use crate::error::{Error, Result};
use crate::reduced_energy::{sigma_charted, BoundaryDatum, ChartedBubble, Configuration, GOmega, RotationChart, SumDatum, TransformedDatum};
use nalgebra::{DMatrix, DVector, SMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// 6×6 real matrices.
pub type Matrix6 = SMatrix<f64, 6, 6>;

/// `g_ω(ξ)`.
pub fn g_omega(omega: f64, xi: Point2) -> Result<Vec3> {
    Ok(GOmega::new(omega)?.value(xi))
}

/// Two-term closed form of `d_{R⁻¹}g_ω(ξ)` for `R⁻¹ = M(t)`:
/// `(cψcφ − cθsφsψ + sθcφ)·((1−ωx)² − ω²y²)/D² + 2(cψsφ + cθcφsψ + sθsφ)(1−ωx)ωy/D²`
/// with `D = (1−ωx)² + ω²y²`.
pub fn d_rinv_g_omega(omega: f64, t: AngleTriple, xi: Point2) -> f64 {
    let (st, ct) = t.theta.sin_cos();
    let (sp, cp) = t.psi.sin_cos();
    let (sf, cf) = t.phi.sin_cos();
    let a = 1.0 - omega * xi.x;
    let b = omega * xi.y;
    let d = a * a + b * b;
    (cp * cf - ct * sf * sp + st * cf) * (a * a - b * b) / (d * d) + 2.0 * (cp * sf + ct * cf * sp + st * sf) * a * b / (d * d)
}

/// The matrix `A_{ω,ε}` in the variables `(x, y, λ, θ, ψ, φ)`:
/// the Hessian of `F_{D,g_ω}/(8A₀)` at `(ω, 0, 2/ε, π/2, 0, 0)` equals
/// `2ε²/(1−ω²)² · A_{ω,ε}`.
pub fn matrix_a(omega: f64, eps: f64) -> Matrix6 {
    let s = 1.0 - omega * omega;
    let mut a = Matrix6::zeros();
    let diag_pos = 1.0 / s + 3.0 * omega * omega / (s * s);
    a[(0, 0)] = diag_pos;
    a[(1, 1)] = diag_pos;
    a[(0, 2)] = -eps * omega / (2.0 * s);
    a[(2, 0)] = a[(0, 2)];
    a[(2, 2)] = eps * eps / 8.0;
    a[(3, 3)] = 0.25;
    a[(4, 4)] = 0.25;
    a[(5, 5)] = 0.5;
    a[(1, 5)] = -omega / s;
    a[(5, 1)] = a[(1, 5)];
    a
}

/// Target sphere centres `v_j` (unit vectors) and the aligning rotations
/// `𝓡_j` with `𝓡_j(0,0,−1) = v_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereConfig {
    pub centers: Vec<[f64; 3]>,
    pub aligning: Vec<Rotation3>,
}

impl SphereConfig {
    /// Validates `|v_j| = 1` (within 1e−10) and computes the aligning rotations.
    pub fn new(centers: Vec<[f64; 3]>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidInput("at least one target sphere is required".into()));
        }
        let aligning = centers.iter().map(|v| rotation_aligning(&Vec3::from(*v))).collect::<Result<_>>()?;
        Ok(Self { centers, aligning })
    }

    /// `v_j = (cos 2πj/k, sin 2πj/k, 0)`, `j = 1..k`.
    pub fn equally_spaced(k: usize) -> Result<Self> {
        Self::new(
            (1..=k)
                .map(|j| {
                    let a = 2.0 * PI * j as f64 / k as f64;
                    [a.cos(), a.sin(), 0.0]
                })
                .collect(),
        )
    }
}

/// Construction parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub k: usize,
    pub omega: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub targets: SphereConfig,
    /// Sample points per box edge on each face for the certificate.
    pub samples_per_edge: usize,
}

impl ConstructionParams {
    pub fn new(k: usize, omega: f64, epsilon: f64, mu: f64, targets: SphereConfig) -> Result<Self> {
        let p = Self { k, omega, epsilon, mu, targets, samples_per_edge: 5 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        if !(self.omega > 0.0 && self.omega < 1.0) {
            return Err(Error::InvalidInput(format!("ω must lie in (0,1), got {}", self.omega)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidInput("ε must be positive".into()));
        }
        if !(self.mu > 0.0) {
            return Err(Error::InvalidInput("μ must be positive".into()));
        }
        if self.targets.centers.len() != self.k {
            return Err(Error::InvalidInput(format!(
                "{} target spheres given for k = {}",
                self.targets.centers.len(),
                self.k
            )));
        }
        if self.samples_per_edge < 2 {
            return Err(Error::InvalidInput("samples_per_edge must be at least 2".into()));
        }
        Ok(())
    }

    /// Planar angle `α_j = 2π(j+1)/k` of block `j` (0-based).
    pub fn block_angle(&self, j: usize) -> f64 {
        2.0 * PI * (j + 1) as f64 / self.k as f64
    }
}

/// The box `T_μ` of one block, in block coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoxTmu {
    /// `(ω, 0, 2/ε, π/2, 0, 0)`.
    pub anchor: [f64; 6],
    /// `(μ(1−ω²), μ(1−ω²), μ/ε, μ, μ, μ)`.
    pub half_width: [f64; 6],
}

impl BoxTmu {
    pub fn new(omega: f64, eps: f64, mu: f64) -> Self {
        let s = 1.0 - omega * omega;
        Self {
            anchor: [omega, 0.0, 2.0 / eps, PI / 2.0, 0.0, 0.0],
            half_width: [mu * s, mu * s, mu / eps, mu, mu, mu],
        }
    }

    /// Scaled coordinates `(c − anchor)/half_width·μ`, each in `[−μ, μ]` inside the box.
    pub fn contains(&self, c: &[f64; 6]) -> bool {
        (0..6).all(|i| (c[i] - self.anchor[i]).abs() <= self.half_width[i] * (1.0 + 1e-12))
    }
}

/// `G_{k,ω}(ξ) = Σ_j 𝓡_j g_ω(Q_j ξ)`.
pub fn build_g_k_omega(p: &ConstructionParams) -> Result<SumDatum> {
    p.validate()?;
    let g: Arc<dyn BoundaryDatum> = Arc::new(GOmega::new(p.omega)?);
    Ok(SumDatum {
        terms: (0..p.k)
            .map(|j| {
                Arc::new(TransformedDatum { outer: p.targets.aligning[j], planar_angle: p.block_angle(j), inner: g.clone() })
                    as Arc<dyn BoundaryDatum>
            })
            .collect(),
    })
}

/// Block-coordinate description of the `k` bubbles, at the given
/// coordinates (`coords[j] = (q₁, q₂, λ, θ, ψ, φ)`).
pub fn charted_blocks(p: &ConstructionParams, coords: &[[f64; 6]]) -> Vec<ChartedBubble> {
    (0..p.k)
        .map(|j| {
            let alpha = p.block_angle(j);
            let c = coords[j];
            ChartedBubble {
                frame_angle: alpha,
                q: Point2::new(c[0], c[1]),
                scale: c[2],
                chart: RotationChart { left: p.targets.aligning[j], right: Rotation3::planar(-alpha) },
                angles: AngleTriple::new(c[3], c[4], c[5]),
            }
        })
        .collect()
}

/// Evaluates `Σ` and its gradient in block coordinates.
fn sigma_blocks(p: &ConstructionParams, g: &SumDatum, coords: &[[f64; 6]]) -> Result<(f64, Vec<[f64; 6]>)> {
    sigma_charted(p.epsilon, &charted_blocks(p, coords), &DomainModel::Disk, g)
}

/// Scaling between block coordinates and the unit-free coordinates
/// `z = (c − anchor)/s` used by Newton (each `|z_i| ≤ μ` inside the box).
fn coordinate_scales(p: &ConstructionParams) -> [f64; 6] {
    let s = 1.0 - p.omega * p.omega;
    [s, s, 1.0 / p.epsilon, 1.0, 1.0, 1.0]
}

/// Per-block outcome of the boundary-positivity check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockCertificate {
    pub block: usize,
    /// `min ⟨∇_zΣ, z⟩` over the sampled faces (scaled coordinates).
    pub min_margin: f64,
    /// `min_margin/ε²`.
    pub normalized_margin: f64,
    /// Face (`coordinate index`, `sign`) attaining the minimum.
    pub worst_face: (usize, i8),
    pub samples: usize,
}

/// Evidence for the existence of a nondegenerate critical point in the boxes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub pass: bool,
    pub blocks: Vec<BlockCertificate>,
    /// Smallest eigenvalue of the symmetrised Hessian in scaled coordinates.
    pub hessian_min_eigenvalue: f64,
    /// Same, divided by `ε²`.
    pub hessian_min_eigenvalue_normalized: f64,
    /// `max |H − Hᵀ| / max |H|` before symmetrisation.
    pub hessian_asymmetry: f64,
    /// Gradient norm in block coordinates at the solution.
    pub gradient_norm: f64,
    pub newton_iterations: usize,
    /// Gradient norms along the Newton iteration.
    pub trajectory: Vec<f64>,
    /// Solution in block coordinates.
    pub block_coordinates: Vec<[f64; 6]>,
    /// Scaled offsets from the anchors (`|z| ≤ μ` inside the boxes).
    pub scaled_offsets: Vec<[f64; 6]>,
}

fn grad_norm(g: &[[f64; 6]]) -> f64 {
    g.iter().flat_map(|b| b.iter()).map(|v| v * v).sum::<f64>().sqrt()
}

/// Hessian of `Σ` in scaled coordinates by central differences of the
/// analytic gradient (step `1e−6` in scaled units).
fn scaled_hessian(p: &ConstructionParams, g: &SumDatum, coords: &[[f64; 6]]) -> Result<DMatrix<f64>> {
    let n = 6 * p.k;
    let sc = coordinate_scales(p);
    let h = 1e-6;
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|c| {
            let (b, i) = (c / 6, c % 6);
            let mut plus = coords.to_vec();
            let mut minus = coords.to_vec();
            plus[b][i] += h * sc[i];
            minus[b][i] -= h * sc[i];
            let (_, gp) = sigma_blocks(p, g, &plus)?;
            let (_, gm) = sigma_blocks(p, g, &minus)?;
            Ok((0..n).map(|r| (gp[r / 6][r % 6] - gm[r / 6][r % 6]) * sc[r % 6] / (2.0 * h)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(n, n, |r, c| cols[c][r]))
}

fn scaled_gradient(p: &ConstructionParams, grad: &[[f64; 6]]) -> DVector<f64> {
    let sc = coordinate_scales(p);
    DVector::from_fn(6 * p.k, |r, _| grad[r / 6][r % 6] * sc[r % 6])
}

/// Newton search for a critical point of `Σ_{D,G_{k,ω}}` started at the box
/// anchors, followed by the boundary-positivity certificate.
pub fn find_critical_configuration(p: &ConstructionParams) -> Result<(Configuration, Certificate)> {
    p.validate()?;
    let g = build_g_k_omega(p)?;
    let bx = BoxTmu::new(p.omega, p.epsilon, p.mu);
    let sc = coordinate_scales(p);
    let mut coords = vec![bx.anchor; p.k];
    let (_, mut grad) = sigma_blocks(p, &g, &coords)?;
    let mut gnorm = grad_norm(&grad);
    let mut trajectory = vec![gnorm];
    let mut iterations = 0;
    let tol = 1e-10;
    while gnorm >= tol {
        if iterations >= 60 {
            return Err(Error::SearchFailure { iterations, reason: "no convergence".into(), trajectory });
        }
        iterations += 1;
        let hess = scaled_hessian(p, &g, &coords)?;
        let hs = (&hess + hess.transpose()) * 0.5;
        let rhs = -scaled_gradient(p, &grad);
        let step = hs
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SearchFailure { iterations, reason: "singular Hessian".into(), trajectory: trajectory.clone() })?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<[f64; 6]> = (0..p.k)
                .map(|b| {
                    let mut c = coords[b];
                    for i in 0..6 {
                        c[i] += t * step[6 * b + i] * sc[i];
                    }
                    c
                })
                .collect();
            let (_, gt) = sigma_blocks(p, &g, &trial)?;
            let nt = grad_norm(&gt);
            if nt < gnorm || nt < tol {
                coords = trial;
                grad = gt;
                gnorm = nt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        trajectory.push(gnorm);
        if !accepted {
            if gnorm < 1e-9 {
                // Rounding floor reached just above the target.
                break;
            }
            return Err(Error::SearchFailure { iterations, reason: "damping failed to reduce the gradient".into(), trajectory });
        }
        if let Some(b) = coords.iter().position(|c| !bx.contains(c)) {
            return Err(Error::SearchFailure { iterations, reason: format!("block {b} left its box"), trajectory });
        }
    }
    let hess = scaled_hessian(p, &g, &coords)?;
    let asym = (&hess - hess.transpose()).abs().max() / hess.abs().max();
    let hs = (&hess + hess.transpose()) * 0.5;
    let min_eig = SymmetricEigen::new(hs).eigenvalues.min();
    let blocks = boundary_certificate(p, &g, &bx)?;
    let eps2 = p.epsilon * p.epsilon;
    let pass = min_eig > 0.0 && blocks.iter().all(|b| b.min_margin > 0.0) && gnorm < tol;
    let bubbles: Vec<BubbleParams> = charted_blocks(p, &coords).iter().map(|b| b.to_bubble()).collect::<Result<_>>()?;
    let c_bar = configuration_c_bar(&bubbles, p.epsilon);
    let config = Configuration::new(p.epsilon, bubbles, c_bar)?;
    let scaled_offsets = coords
        .iter()
        .map(|c| {
            let mut z = [0.0; 6];
            for i in 0..6 {
                z[i] = (c[i] - bx.anchor[i]) / sc[i];
            }
            z
        })
        .collect();
    let cert = Certificate {
        pass,
        blocks,
        hessian_min_eigenvalue: min_eig,
        hessian_min_eigenvalue_normalized: min_eig / eps2,
        hessian_asymmetry: asym,
        gradient_norm: gnorm,
        newton_iterations: iterations,
        trajectory,
        block_coordinates: coords,
        scaled_offsets,
    };
    if let Some(b) = cert.blocks.iter().find(|b| !(b.min_margin > 0.0)) {
        return Err(Error::CertificateFailure {
            block: b.block,
            detail: format!("margin {} on face {:?}", b.min_margin, b.worst_face),
        });
    }
    Ok((config, cert))
}

/// The smallest `C̄` for which the configuration is admissible.
fn configuration_c_bar(bubbles: &[BubbleParams], eps: f64) -> f64 {
    let mut c: f64 = 1.0;
    for (i, b) in bubbles.iter().enumerate() {
        let d = 1.0 - b.center.norm();
        c = c.max(1.0 / d).max(b.scale * eps).max(1.0 / (b.scale * eps));
        for o in &bubbles[i + 1..] {
            c = c.max(1.0 / b.center.dist(o.center));
        }
    }
    c * (1.0 + 1e-9)
}

/// Samples every face of every block box (other blocks at their anchors) and
/// records `min ⟨∇_zΣ(χ), z⟩`, where `z` is the scaled offset from the anchor.
pub fn boundary_certificate(p: &ConstructionParams, g: &SumDatum, bx: &BoxTmu) -> Result<Vec<BlockCertificate>> {
    let sc = coordinate_scales(p);
    let m = p.samples_per_edge;
    let n_face = m.pow(5);
    let eps2 = p.epsilon * p.epsilon;
    (0..p.k)
        .map(|b| {
            let faces: Vec<(usize, i8)> = (0..6).flat_map(|i| [(i, 1i8), (i, -1i8)]).collect();
            let per_face: Vec<(f64, (usize, i8))> = faces
                .par_iter()
                .map(|&(fi, sign)| {
                    let mut best = f64::INFINITY;
                    for s in 0..n_face {
                        let mut z = [0.0; 6];
                        let mut rest = s;
                        for i in 0..6 {
                            if i == fi {
                                z[i] = sign as f64 * p.mu;
                            } else {
                                let idx = rest % m;
                                rest /= m;
                                z[i] = p.mu * (-1.0 + 2.0 * idx as f64 / (m - 1) as f64);
                            }
                        }
                        let mut coords = vec![bx.anchor; p.k];
                        for i in 0..6 {
                            coords[b][i] += z[i] * sc[i];
                        }
                        let (_, grad) = sigma_blocks(p, g, &coords)?;
                        let dot: f64 = (0..6).map(|i| grad[b][i] * sc[i] * z[i]).sum();
                        best = best.min(dot);
                    }
                    Ok((best, (fi, sign)))
                })
                .collect::<Result<_>>()?;
            let (min_margin, worst_face) = per_face
                .iter()
                .copied()
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .unwrap_or((f64::NAN, (0, 1)));
            Ok(BlockCertificate {
                block: b,
                min_margin,
                normalized_margin: min_margin / eps2,
                worst_face,
                samples: 12 * n_face,
            })
        })
        .collect()
}

/// Centres `R_j(0,0,−1)` of the limiting unit spheres.
pub fn limiting_spheres(c: &Configuration) -> Vec<Vec3> {
    c.bubbles.iter().map(|b| b.rotation.apply(&Vec3::new(0.0, 0.0, -1.0))).collect()
}

/// Maximum distance between limiting sphere centres and targets.
pub fn max_center_deviation(c: &Configuration, targets: &SphereConfig) -> f64 {
    limiting_spheres(c)
        .iter()
        .zip(&targets.centers)
        .map(|(a, b)| (a - Vec3::from(*b)).norm())
        .fold(0.0, f64::max)
}

/// The one-bubble functional of `g_ω` on the disk in chart coordinates
/// `(x, y, λ, θ, ψ, φ)` with `R = M(θ,ψ,φ)ᵀ`.
pub fn f_single_g_omega(omega: f64, eps: f64, c: &[f64; 6]) -> f64 {
    let p = Point2::new(c[0], c[1]);
    let l = c[2];
    let ht = 2.0 / (1.0 - p.norm_sq()).powi(2);
    let d = d_rinv_g_omega(omega, AngleTriple::new(c[3], c[4], c[5]), p);
    8.0 * A0 * (ht / (l * l) - eps / l * d)
}

/// The rotation of a chart-coordinate bubble (`R = M(t)ᵀ`); exposed for
/// cross-checks with the general reduced functional.
pub fn chart_rotation(t: AngleTriple) -> Rotation3 {
    rotation_from_angles(t)
}

/// `M(t)`, the inverse rotation used in the datum term.
pub fn chart_inverse(t: AngleTriple) -> nalgebra::Matrix3<f64> {
    chart_matrix(t)
}
