//! Acceptance criteria 1–11. Runs without the libtest harness and prints one
//! `criterion N: PASS|FAIL` line per criterion; exits non-zero if any fails.

use hsurf::annulus_robin::{compare_scan, critical_points_radial, AnnulusModel, RadialFunction};
use hsurf::bubble_core::{
    bubble_pde_residual, constant_a0, identity_integral_zero, pohozaev_residual, rotation_from_angles, AngleTriple,
    BubbleParams, Point2, Rotation3, SmoothField, Vec3, A0,
};
use hsurf::construction::{f_single_g_omega, find_critical_configuration, matrix_a, max_center_deviation, ConstructionParams, SphereConfig};
use hsurf::direct_energy::{validate_one_bubble_expansion, validate_pair_third_row, Resolution};
use hsurf::domain_green::{h_tilde, robin_diagonal, DomainModel, Mobius};
use hsurf::linearized_s2::{appendix_inequality_check, kernel_report, verify_polynomial_kernel, KernelSample};
use hsurf::reduced_energy::{
    sigma_charted, sigma_charted_fd, sigma_gradient, BoundaryDatum, ChartedBubble, Configuration, GOmega,
    LinearDatum, ZeroDatum,
};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

/// Golden values frozen from the first oracle run (K = 100, 2001 grid points).
const GOLDEN_MAX_REL_DIFF_E: f64 = 8.278279e-4;
const GOLDEN_MAX_REL_DIFF_35: f64 = 1.417066;
const GOLDEN_CRIT_E: (f64, f64) = (0.3610637770, 0.3608221565);
const GOLDEN_CRIT_35: (f64, f64) = (2.5464199066, 2.4722519651);
/// Golden bound on `max |sphere centre − target|` for the k = 3 run.
const GOLDEN_SPHERE_DEVIATION: f64 = 5.361799e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, budget_s: f64) -> bool {
    elapsed.as_secs_f64() < budget_s
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation3 {
    let axis = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let axis = if axis.norm() < 1e-3 { Vec3::z() } else { axis.normalize() };
    Rotation3::about_axis(axis, rng.gen_range(0.0..PI))
}

fn random_disk_point(rng: &mut ChaCha8Rng, r_max: f64) -> Point2 {
    let r = r_max * rng.gen::<f64>().sqrt();
    let t = rng.gen_range(0.0..2.0 * PI);
    Point2::new(r * t.cos(), r * t.sin())
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let a0 = constant_a0().expect("A0 quadrature");
    let z = identity_integral_zero().expect("identity quadrature");
    let e = t.elapsed();
    let pass = (a0.value - PI / 2.0).abs() < 1e-9 && z.value.abs() < 1e-10 && within(e, 1.0);
    check(pass, format!("|A0 − π/2| = {:.1e}, |identity| = {:.1e}, {:.2?}", (a0.value - PI / 2.0).abs(), z.value.abs(), e))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let b = BubbleParams::new(random_disk_point(&mut rng, 0.9), rng.gen_range(0.5..50.0), random_rotation(&mut rng))
            .expect("bubble");
        let xi = random_disk_point(&mut rng, 1.0);
        worst = worst.max(bubble_pde_residual(&b, xi).norm());
    }
    let e = t.elapsed();
    check(worst < 1e-8 && within(e, 5.0), format!("max |Δδ − 2δ_x∧δ_y| = {worst:.2e} over 1000 samples, {e:.2?}"))
}

/// A cubic polynomial field `R² → R³` with coefficients of `1, x, y, x², xy, y², x³, x²y, xy², y³`.
struct Cubic([[f64; 10]; 3]);

impl SmoothField for Cubic {
    fn value(&self, p: Point2) -> Vec3 {
        let (x, y) = (p.x, p.y);
        let m = [1.0, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y];
        Vec3::from_fn(|i, _| (0..10).map(|k| self.0[i][k] * m[k]).sum())
    }
    fn jacobian(&self, p: Point2) -> (Vec3, Vec3) {
        let (x, y) = (p.x, p.y);
        let mx = [0.0, 1.0, 0.0, 2.0 * x, y, 0.0, 3.0 * x * x, 2.0 * x * y, y * y, 0.0];
        let my = [0.0, 0.0, 1.0, 0.0, x, 2.0 * y, 0.0, x * x, 2.0 * x * y, 3.0 * y * y];
        (
            Vec3::from_fn(|i, _| (0..10).map(|k| self.0[i][k] * mx[k]).sum()),
            Vec3::from_fn(|i, _| (0..10).map(|k| self.0[i][k] * my[k]).sum()),
        )
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut c = [[0.0; 10]; 3];
        for row in c.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
        let f = Cubic(c);
        for _ in 0..10 {
            worst = worst.max(pohozaev_residual(&f, random_disk_point(&mut rng, 1.0)).abs());
        }
    }
    check(worst < 1e-12, format!("max residual {worst:.2e} over 100 cubic fields × 10 points"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let disk = DomainModel::disk();
    for _ in 0..50 {
        let a = random_disk_point(&mut rng, 0.95);
        let diff = h_tilde(&disk, a).unwrap() - 2.0 * (2.0 * robin_diagonal(&disk, a).unwrap()).exp();
        worst = worst.max(diff.abs());
    }
    for _ in 0..20 {
        let c = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let r = rng.gen_range(0.3..3.0);
        let m = Mobius::from_disk(c, r).unwrap();
        let d = DomainModel::mobius(m);
        let p = random_disk_point(&mut rng, 0.95 * r);
        let a = Point2::new(p.x + c.re, p.y + c.im);
        let diff = h_tilde(&d, a).unwrap() - 2.0 * (2.0 * robin_diagonal(&d, a).unwrap()).exp();
        worst = worst.max(diff.abs());
    }
    check(worst < 1e-10, format!("max |H̃ − 2e^(2H)| = {worst:.2e} over 50 disk + 20 Möbius-image points"))
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let run = |log_rho: f64| {
        let m = AnnulusModel::with_terms(log_rho.exp(), 100).unwrap();
        let c = compare_scan(&m, 2001).unwrap();
        let h = critical_points_radial(RadialFunction::HTilde, &m).unwrap();
        let r = critical_points_radial(RadialFunction::TwoE2H, &m).unwrap();
        (c.max_relative_difference(), h, r)
    };
    let (d1, h1, r1) = run(1.0);
    let (d35, h35, r35) = run(3.5);
    let e = t.elapsed();
    let close = |a: f64, b: f64, tol: f64| (a - b).abs() <= tol * b.abs().max(1.0);
    let crit_ok = |h: &[f64], r: &[f64], g: (f64, f64)| h.len() == 1 && r.len() == 1 && close(h[0], g.0, 1e-8) && close(r[0], g.1, 1e-8);
    let qualitative = d1 < 1e-2 && d35 > 0.5 && (h35[0] - r35[0]).abs() > 1e-4;
    let golden = close(d1, GOLDEN_MAX_REL_DIFF_E, 1e-5)
        && close(d35, GOLDEN_MAX_REL_DIFF_35, 1e-5)
        && crit_ok(&h1, &r1, GOLDEN_CRIT_E)
        && crit_ok(&h35, &r35, GOLDEN_CRIT_35);
    check(
        qualitative && golden && within(e, 10.0),
        format!(
            "ρ = e: max rel diff {d1:.6e}, critical {h1:.8?} vs {r1:.8?}; log ρ = 3.5: {d35:.6}, critical {h35:.8?} vs {r35:.8?}; {e:.2?}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let r = validate_one_bubble_expansion(
        Point2::ORIGIN,
        &Rotation3::identity(),
        &[10.0, 20.0, 40.0, 80.0],
        1.0,
        &ZeroDatum,
        &Resolution::default(),
    )
    .expect("one-bubble expansion");
    let e = t.elapsed();
    check(
        r.constant_ok && r.slope_ok && within(e, 120.0),
        format!(
            "fitted constant {:.9} vs 4π/3 = {:.9}; residual slopes {:.3?}; {e:.2?}",
            r.fitted_constant, r.direct_level, r.residual_slopes
        ),
    )
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let r = validate_pair_third_row(Point2::new(-0.3, 0.0), Point2::new(0.3, 0.0), &[20.0, 40.0, 80.0], &Resolution::default())
        .expect("pair interaction");
    let e = t.elapsed();
    check(
        r.diagonal.pass && r.pass && within(e, 120.0),
        format!(
            "diagonal relative error at λ = 80: {:.4}; out-of-plane share {:.4}; {e:.2?}",
            r.diagonal.relative_errors.last().unwrap(),
            r.relative_contribution
        ),
    )
}

fn criterion_8() -> Outcome {
    let (omega, eps) = (0.95, 1e-3);
    let g = GOmega::new(omega).unwrap();
    let d = DomainModel::disk();
    let anchor = [omega, 0.0, 2.0 / eps, PI / 2.0, 0.0, 0.0];
    let b = BubbleParams::new(Point2::new(omega, 0.0), 2.0 / eps, rotation_from_angles(AngleTriple::new(PI / 2.0, 0.0, 0.0)))
        .unwrap();
    let (value, grads) = sigma_charted(eps, &[ChartedBubble::from_bubble(&b)], &d, &g).unwrap();
    let gnorm = grads[0].iter().map(|v| v * v).sum::<f64>().sqrt();
    // The general reduced functional and the closed-form single-block
    // functional agree at the anchor; the Hessian is taken of the latter,
    // normalised by the bubble energy 8A₀.
    let closed = f_single_g_omega(omega, eps, &anchor);
    let value_gap = (value - closed).abs() / closed.abs();
    let f = |c: &[f64; 6]| f_single_g_omega(omega, eps, c) / (8.0 * A0);
    let s = 1.0 - omega * omega;
    let steps = [1e-4 * s, 1e-4 * s, 1e-4 / eps, 1e-4, 1e-4, 1e-4];
    let shifted = |i: usize, si: f64, j: usize, sj: f64| {
        let mut c = anchor;
        c[i] += si * steps[i];
        c[j] += sj * steps[j];
        f(&c)
    };
    let h = DMatrix::from_fn(6, 6, |i, j| {
        (shifted(i, 1.0, j, 1.0) - shifted(i, 1.0, j, -1.0) - shifted(i, -1.0, j, 1.0) + shifted(i, -1.0, j, -1.0))
            / (4.0 * steps[i] * steps[j])
    });
    let a = matrix_a(omega, eps);
    let expected = DMatrix::from_fn(6, 6, |i, j| 2.0 * eps * eps / (s * s) * a[(i, j)]);
    let mut worst: f64 = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            let scale = (expected[(i, i)] * expected[(j, j)]).sqrt();
            worst = worst.max((h[(i, j)] - expected[(i, j)]).abs() / scale);
        }
    }
    let min_eig = SymmetricEigen::new(DMatrix::from_column_slice(6, 6, a.as_slice())).eigenvalues.min();
    check(
        gnorm < 1e-10 && value_gap < 1e-12 && worst < 1e-4 && min_eig > 0.0,
        format!(
            "|∇F| = {gnorm:.2e}; closed-form gap {value_gap:.1e}; max scaled Hessian deviation {worst:.2e}; min eig(A) = {min_eig:.4e}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let targets = SphereConfig::equally_spaced(3).unwrap();
    let p = ConstructionParams::new(3, 0.95, 1e-3, 0.1, targets.clone()).unwrap();
    let (c, cert) = match find_critical_configuration(&p) {
        Ok(r) => r,
        Err(e) => return check(false, format!("construction failed: {e}")),
    };
    let dev = max_center_deviation(&c, &targets);
    let e = t.elapsed();
    let margins: Vec<f64> = cert.blocks.iter().map(|b| b.normalized_margin).collect();
    check(
        cert.pass && cert.gradient_norm < 1e-10 && dev <= GOLDEN_SPHERE_DEVIATION * (1.0 + 1e-6) && within(e, 60.0),
        format!(
            "|∇Σ| = {:.2e} after {} Newton steps; face margins/ε² {margins:.4?}; max |centre − target| = {dev:.6e}; {e:.2?}",
            cert.gradient_norm, cert.newton_iterations
        ),
    )
}

fn criterion_10() -> Outcome {
    let t = Instant::now();
    let r = kernel_report(12, 1e-8);
    let dims_ok = r.dims[0] == 3 && r.total_low_degree == 9 && r.dims[4..].iter().all(|&d| d == 0);
    let margins: Vec<String> = r
        .degrees
        .iter()
        .map(|d| format!("{}", d.smallest_nonzero_singular_value.map_or("-".into(), |v| format!("{v:.3}"))))
        .collect();
    let residual = KernelSample::basis().iter().map(verify_polynomial_kernel).fold(0.0, f64::max);
    let flips = appendix_inequality_check(3) && !appendix_inequality_check(4);
    let e = t.elapsed();
    check(
        dims_ok && residual < 1e-6 && flips && within(e, 30.0),
        format!(
            "dims {:?}; margins [{}]; family residual {residual:.2e}; bound flips 3→4: {flips}; {e:.2?}",
            r.dims,
            margins.join(", ")
        ),
    )
}

fn random_configuration(rng: &mut ChaCha8Rng) -> Configuration {
    let eps = 0.01;
    let k = rng.gen_range(1..=3);
    let mut bubbles: Vec<BubbleParams> = Vec::new();
    while bubbles.len() < k {
        let p = random_disk_point(rng, 0.8);
        if bubbles.iter().any(|b| b.center.dist(p) < 0.2) {
            continue;
        }
        let t = AngleTriple::new(rng.gen_range(0.5..2.6), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
        bubbles.push(BubbleParams::new(p, rng.gen_range(20.0..500.0), rotation_from_angles(t)).unwrap());
    }
    Configuration::new(eps, bubbles, 10.0).unwrap()
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let c = random_configuration(&mut rng);
        let d = if i % 2 == 0 {
            DomainModel::disk()
        } else {
            DomainModel::mobius(Mobius::disk_automorphism(rng.gen_range(0.0..2.0 * PI), Complex64::new(0.2, -0.1)).unwrap())
        };
        let g: Box<dyn BoundaryDatum> = if i % 3 == 0 {
            Box::new(GOmega::new(rng.gen_range(0.3..0.9)).unwrap())
        } else {
            let mut r = || [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            Box::new(LinearDatum { col_x: r(), col_y: r(), offset: r() })
        };
        c.validate(&d).expect("admissible");
        let report = sigma_gradient(&c, &d, g.as_ref()).unwrap();
        let charted: Vec<ChartedBubble> = c.bubbles.iter().map(ChartedBubble::from_bubble).collect();
        let fd = sigma_charted_fd(c.epsilon, &charted, &d, g.as_ref()).unwrap();
        let scale = fd.iter().flat_map(|b| b.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, f) in report.gradient.iter().zip(&fd) {
            for (x, y) in a.to_array().iter().zip(f) {
                worst = worst.max((x - y).abs() / (y.abs() + scale));
            }
        }
    }
    check(worst < 1e-5, format!("max |analytic − FD|/(|FD| + ‖FD‖∞) = {worst:.2e} over 20 configurations"))
}

fn main() {
    let criteria: [(usize, &str, fn() -> Outcome); 11] = [
        (1, "universal constants", criterion_1),
        (2, "bubble equation", criterion_2),
        (3, "Pohozaev identity", criterion_3),
        (4, "Robin consistency", criterion_4),
        (5, "annulus figures", criterion_5),
        (6, "one-bubble expansion oracle", criterion_6),
        (7, "pairwise interaction oracle", criterion_7),
        (8, "anchor gradient and Hessian", criterion_8),
        (9, "multi-sphere construction", criterion_9),
        (10, "linearised kernel", criterion_10),
        (11, "gradient contract", criterion_11),
    ];
    let mut failures = 0;
    for (n, name, f) in criteria {
        let o = f();
        if !o.pass {
            failures += 1;
        }
        println!("criterion {n:2} ({name}): {} — {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of 11 criteria pass", 11 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
