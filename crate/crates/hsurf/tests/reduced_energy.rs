//! Reduced functionals: single-bubble energy, pair interactions, the
//! k-bubble functional and its gradient, and rotation extremals.

use hsurf::bubble_core::{rotation_from_angles, rotation_relative, AngleTriple, BubbleParams, Point2, Rotation3, Vec3, A0};
use hsurf::domain_green::{h_tilde, regular_part, DomainModel, Mobius};
use hsurf::error::Error;
use hsurf::reduced_energy::*;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use std::f64::consts::PI;

fn disk() -> DomainModel {
    DomainModel::disk()
}

fn rot(t: [f64; 3]) -> Rotation3 {
    rotation_from_angles(AngleTriple::from_array(t))
}

fn angles() -> impl Strategy<Value = [f64; 3]> {
    [0.0..PI, -PI..PI, -PI..PI]
}

fn point(rmax: f64) -> impl Strategy<Value = Point2> {
    (0.0..rmax, 0.0..(2.0 * PI)).prop_map(|(r, t)| Point2::new(r * t.cos(), r * t.sin()))
}

#[test]
fn divergence_examples() {
    let lin = LinearDatum::identity();
    let a = Point2::new(0.2, -0.1);
    assert!((d_r_g(&lin, &Rotation3::identity(), a) - 2.0).abs() < 1e-15);
    let half_turn = Rotation3::about_axis(Vec3::new(0.0, 0.0, 1.0), PI);
    assert!((d_r_g(&lin, &half_turn, a) + 2.0).abs() < 1e-14);
    let omega = 0.7;
    let g = GOmega::new(omega).unwrap();
    let v = d_r_g(&g, &Rotation3::identity(), Point2::new(omega, 0.0));
    assert!((v - 2.0 / (1.0 - omega * omega).powi(2)).abs() < 1e-12);
}

#[test]
fn single_bubble_functional() {
    let d = disk();
    let a = Point2::new(0.3, 0.2);
    let b = BubbleParams::unrotated(a, 40.0).unwrap();
    let f = f_single(0.01, &b, &d, &ZeroDatum).unwrap();
    assert!((f - 8.0 * A0 * h_tilde(&d, a).unwrap() / 1600.0).abs() < 1e-15);
    assert!(f > 0.0);
    let b2 = BubbleParams::unrotated(a, 80.0).unwrap();
    let f2 = f_single(0.01, &b2, &d, &ZeroDatum).unwrap();
    assert!((f2 / f - 0.25).abs() < 1e-12);
    // At the concentration point of g_ω with λ = 2/ε both terms are ε²-sized:
    // F = 8A₀ε²H̃(1/4 − 1/2) = −4A₀ε²/(1 − ω²)².
    let (omega, eps) = (0.9, 1e-3);
    let g = GOmega::new(omega).unwrap();
    let b = BubbleParams::unrotated(Point2::new(omega, 0.0), 2.0 / eps).unwrap();
    let f = f_single(eps, &b, &d, &g).unwrap();
    let golden = -4.0 * A0 * eps * eps / (1.0 - omega * omega).powi(2);
    assert!((f - golden).abs() < 1e-12 * golden.abs());
}

#[test]
fn optimal_scale_examples() {
    let d = disk();
    let (omega, eps) = (0.8, 2e-3);
    let g = GOmega::new(omega).unwrap();
    let a = Point2::new(omega, 0.0);
    let l = optimal_lambda(eps, a, &Rotation3::identity(), &d, &g).unwrap();
    assert!((l - 2.0 / eps).abs() < 1e-9 * l);
    let l2 = optimal_lambda(eps / 2.0, a, &Rotation3::identity(), &d, &g).unwrap();
    assert!((l2 / l - 2.0).abs() < 1e-12);
    let flip = Rotation3::about_axis(Vec3::new(0.0, 0.0, 1.0), PI);
    assert!(matches!(optimal_lambda(eps, a, &flip, &d, &g), Err(Error::NoCriticalScale(_))));
}

#[test]
fn symmetric_pair_interaction_golden() {
    let d = disk();
    let (p, q) = (Point2::new(-0.3, 0.0), Point2::new(0.3, 0.0));
    let id = Rotation3::identity();
    let v = interaction_pair(p, q, &id, &id, &d).unwrap();
    // 16A₀ · 2 Re (1 − p̄q)⁻² with p̄q = −0.09.
    let golden = 16.0 * A0 * 2.0 / 1.09f64.powi(2);
    assert!((v - golden).abs() < 1e-12 * golden, "{v} vs {golden}");
    // Independent oracle: mixed differences of the regular part.
    let h = 1e-4;
    let mixed = |e: Point2| {
        let f = |sa: f64, sb: f64| regular_part(&d, p.add(e.scale(sa)), q.add(e.scale(sb))).unwrap();
        (f(1.0, 1.0) - f(1.0, -1.0) - f(-1.0, 1.0) + f(-1.0, -1.0)) / (4.0 * h * h)
    };
    let oracle = 16.0 * A0 * (mixed(Point2::new(h, 0.0)) + mixed(Point2::new(0.0, h)));
    assert!((v - oracle).abs() < 1e-6 * golden);
    assert!(matches!(interaction_pair(p, p, &id, &id, &d), Err(Error::SingularInput(_))));
}

#[test]
fn sigma_reduces_and_assembles() {
    let d = disk();
    let eps = 0.01;
    let b1 = BubbleParams::new(Point2::new(-0.3, 0.1), 120.0, rot([1.2, 0.3, -0.4])).unwrap();
    let b2 = BubbleParams::new(Point2::new(0.35, -0.2), 90.0, rot([1.9, -0.2, 0.8])).unwrap();
    let g = GOmega::new(0.6).unwrap();
    let one = Configuration::new(eps, vec![b1], 10.0).unwrap();
    assert!((sigma_total(&one, &d, &g).unwrap() - f_single(eps, &b1, &d, &g).unwrap()).abs() < 1e-18);
    let two = Configuration::new(eps, vec![b1, b2], 10.0).unwrap();
    let assembled = f_single(eps, &b1, &d, &ZeroDatum).unwrap()
        + f_single(eps, &b2, &d, &ZeroDatum).unwrap()
        + interaction_pair(b1.center, b2.center, &b1.rotation, &b2.rotation, &d).unwrap() / (b1.scale * b2.scale);
    let s = sigma_total(&two, &d, &ZeroDatum).unwrap();
    assert!((s - assembled).abs() < 1e-14 * assembled.abs());
    let parts = sigma_breakdown(&two, &d, &ZeroDatum).unwrap();
    assert!((parts.modeled_total - (16.0 / 9.0 * A0 + s)).abs() < 1e-12);
    assert!((parts.direct_level_total - (8.0 * PI / 3.0 + s)).abs() < 1e-12);
}

#[test]
fn configuration_constraints_are_named() {
    let d = disk();
    let near_edge = BubbleParams::unrotated(Point2::new(0.95, 0.0), 100.0).unwrap();
    let c = Configuration::new(0.01, vec![near_edge], 10.0).unwrap();
    let msg = sigma_total(&c, &d, &ZeroDatum).unwrap_err().to_string();
    assert!(msg.contains("dist(p, ∂Ω)"), "{msg}");
    let tiny = BubbleParams::unrotated(Point2::new(0.0, 0.0), 5.0).unwrap();
    let c = Configuration::new(0.01, vec![tiny], 10.0).unwrap();
    assert!(sigma_total(&c, &d, &ZeroDatum).unwrap_err().to_string().contains("λε"));
    let a = BubbleParams::unrotated(Point2::new(0.0, 0.0), 100.0).unwrap();
    let b = BubbleParams::unrotated(Point2::new(0.05, 0.0), 100.0).unwrap();
    let c = Configuration::new(0.01, vec![a, b], 10.0).unwrap();
    assert!(sigma_total(&c, &d, &ZeroDatum).unwrap_err().to_string().contains("separation"));
    assert!(Configuration::new(0.0, vec![a], 10.0).is_err());
}

#[test]
fn anchor_is_critical_for_one_bubble() {
    let (omega, eps) = (0.9, 1e-3);
    let g = GOmega::new(omega).unwrap();
    let b = BubbleParams::unrotated(Point2::new(omega, 0.0), 2.0 / eps).unwrap();
    let c = Configuration::new(eps, vec![b], 100.0).unwrap();
    let r = sigma_gradient(&c, &disk(), &g).unwrap();
    assert!(r.gradient[0].to_array().iter().all(|v| v.abs() < 1e-10), "{:?}", r.gradient);
}

#[test]
fn scale_derivative_decays_with_scale() {
    let d = disk();
    let g = GOmega::new(0.5).unwrap();
    let eps = 0.01;
    let mut prev = f64::INFINITY;
    for l in [60.0, 120.0, 240.0, 480.0] {
        let b = BubbleParams::new(Point2::new(0.1, 0.2), l, rot([1.3, 0.2, 0.1])).unwrap();
        let o = BubbleParams::new(Point2::new(-0.4, -0.1), 150.0, rot([1.7, -0.3, 0.4])).unwrap();
        let c = Configuration::new(eps, vec![b, o], 10.0).unwrap();
        let v = sigma_gradient(&c, &d, &g).unwrap().gradient[0].scale.abs();
        assert!(v < prev);
        prev = v;
    }
}

#[test]
fn rotation_extremals_of_linear_datum() {
    let a = Point2::new(0.1, 0.2);
    let (p, m) = rotation_extremal_datum(&LinearDatum::identity(), a).unwrap();
    assert!((p - 2.0).abs() < 1e-14 && m.abs() < 1e-7);
    // Singular values 1 and √2: extremes are their sum and difference.
    let lin = LinearDatum { col_x: [1.0, 0.0, 0.0], col_y: [0.0, 1.0, 1.0], offset: [0.3, 0.0, -0.2] };
    let (p, m) = rotation_extremal_datum(&lin, a).unwrap();
    let r2 = 2f64.sqrt();
    assert!((p - (1.0 + r2)).abs() < 1e-14 && (m - (r2 - 1.0)).abs() < 1e-14);
    let (s, r) = rotation_extremal_search(&lin, a);
    assert!((s - p).abs() < 1e-6);
    assert!((d_r_g(&lin, &r.inverse(), a) - s).abs() < 1e-12);
    assert!(matches!(rotation_extremal_datum(&ZeroDatum, a), Err(Error::DegenerateDatum)));
}

#[test]
fn rotation_extremals_of_concentrating_datum() {
    let omega = 0.8;
    let g = GOmega::new(omega).unwrap();
    for a in [Point2::new(0.0, 0.0), Point2::new(0.5, -0.3), Point2::new(-0.2, 0.6)] {
        let (p, m) = rotation_extremal_datum(&g, a).unwrap();
        let q = (1.0 - omega * a.x).powi(2) + (omega * a.y).powi(2);
        assert!((p * p - 4.0 / (q * q)).abs() < 1e-12 * p * p);
        assert!(m.abs() < 1e-6);
        let (s, _) = rotation_extremal_search(&g, a);
        assert!((s - p).abs() < 1e-6 * p);
    }
}

#[test]
fn concentration_function_of_g_omega() {
    let omega = 0.8;
    let g = GOmega::new(omega).unwrap();
    let d = disk();
    let s = 1.0 - omega * omega;
    assert!((concentration_w(&g, &d, Point2::new(omega, 0.0)).unwrap() - 2f64.sqrt() / s).abs() < 1e-12);
    assert!((concentration_w(&g, &d, Point2::new(0.0, 0.0)).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    let closed = |p: Point2| 2f64.sqrt() * (1.0 - p.norm_sq()) / ((1.0 - omega * p.x).powi(2) + (omega * p.y).powi(2));
    let p = Point2::new(0.3, -0.4);
    assert!((concentration_w(&g, &d, p).unwrap() - closed(p)).abs() < 1e-12);
    // Hessian at the maximum: −2√2/(1−ω²)³ on the diagonal.
    let h = 1e-4;
    let w = |x: f64, y: f64| concentration_w(&g, &d, Point2::new(omega + x, y)).unwrap();
    let wxx = (w(h, 0.0) - 2.0 * w(0.0, 0.0) + w(-h, 0.0)) / (h * h);
    let wyy = (w(0.0, h) - 2.0 * w(0.0, 0.0) + w(0.0, -h)) / (h * h);
    let wxy = (w(h, h) - w(h, -h) - w(-h, h) + w(-h, -h)) / (4.0 * h * h);
    let expected = -2.0 * 2f64.sqrt() / s.powi(3);
    assert!((wxx - expected).abs() < 1e-4 * expected.abs(), "{wxx} vs {expected}");
    assert!((wyy - expected).abs() < 1e-4 * expected.abs(), "{wyy} vs {expected}");
    assert!(wxy.abs() < 1e-4 * expected.abs());
}

#[test]
fn two_bubble_extremal_matches_search() {
    let d = disk();
    let (a, b) = (Point2::new(-0.3, 0.0), Point2::new(0.3, 0.0));
    let v = two_bubble_extremal(a, b, &d).unwrap();
    let (s, r) = two_bubble_extremal_search(a, b, &d).unwrap();
    assert!(v <= 0.0);
    assert!((v - s).abs() < 1e-6 * v.abs(), "{v} vs {s}");
    let direct = interaction_pair(a, b, &Rotation3::identity(), &r, &d).unwrap();
    assert!((direct - v).abs() < 1e-6 * v.abs());
    assert!(two_bubble_extremal(a, a, &d).is_err());
}

/// Central differences of `Σ` through rebuilt bubbles (positions, scales and
/// the chart centred at each rotation).
fn fd_gradient(c: &Configuration, d: &DomainModel, g: &dyn BoundaryDatum) -> Vec<[f64; 6]> {
    let mut out = vec![[0.0; 6]; c.bubbles.len()];
    for i in 0..c.bubbles.len() {
        for s in 0..6 {
            let b = c.bubbles[i];
            let h = if s == 2 { 1e-5 * b.scale } else { 1e-5 };
            let eval = |sign: f64| {
                let mut t = AngleTriple::CENTER.to_array();
                let mut p = b.center;
                let mut l = b.scale;
                match s {
                    0 => p.x += sign * h,
                    1 => p.y += sign * h,
                    2 => l += sign * h,
                    k => t[k - 3] += sign * h,
                }
                let mut bs = c.bubbles.clone();
                bs[i] = BubbleParams::new(p, l, rotation_relative(&b.rotation, AngleTriple::from_array(t))).unwrap();
                let cc = Configuration { bubbles: bs, ..c.clone() };
                sigma_total(&cc, d, g).unwrap()
            };
            out[i][s] = (eval(1.0) - eval(-1.0)) / (2.0 * h);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gradient_matches_independent_differences(
        p1 in point(0.6), p2 in point(0.6), t1 in angles(), t2 in angles(),
        l1 in 50.0..300.0f64, l2 in 50.0..300.0f64, omega in 0.3..0.9f64,
    ) {
        prop_assume!(p1.dist(p2) > 0.2);
        let eps = 0.01;
        let d = disk();
        let g = GOmega::new(omega).unwrap();
        let c = Configuration::new(eps, vec![
            BubbleParams::new(p1, l1, rot(t1)).unwrap(),
            BubbleParams::new(p2, l2, rot(t2)).unwrap(),
        ], 10.0).unwrap();
        let r = sigma_gradient(&c, &d, &g).unwrap();
        let fd = fd_gradient(&c, &d, &g);
        let scale = fd.iter().flat_map(|b| b.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, f) in r.gradient.iter().zip(&fd) {
            for (x, y) in a.to_array().iter().zip(f) {
                prop_assert!((x - y).abs() < 1e-5 * (y.abs() + scale), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn optimal_scale_is_stationary(a in point(0.7), t in angles(), omega in 0.2..0.9f64, eps in 1e-3..1e-2f64) {
        let d = disk();
        let g = GOmega::new(omega).unwrap();
        let r = rot(t);
        match optimal_lambda(eps, a, &r, &d, &g) {
            Ok(l) => {
                let b = BubbleParams::new(a, l, r).unwrap();
                let dl = f_single_dlambda(eps, &b, &d, &g).unwrap();
                let scale = 16.0 * A0 * h_tilde(&d, a).unwrap() / l.powi(3);
                prop_assert!(dl.abs() < 1e-12 * scale);
            }
            Err(Error::NoCriticalScale(v)) => prop_assert!(v <= 0.0),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn pair_paths_agree(
        p in point(0.8), q in point(0.8), ti in angles(), tj in angles(),
        theta in 0.0..(2.0 * PI), cr in 0.0..0.5f64, ct in 0.0..(2.0 * PI),
    ) {
        prop_assume!(p.dist(q) > 0.05);
        let m = Mobius::disk_automorphism(theta, C::from_polar(cr, ct)).unwrap();
        for d in [disk(), DomainModel::mobius(m)] {
            let a = interaction_pair(p, q, &rot(ti), &rot(tj), &d).unwrap();
            let b = interaction_pair_green(p, q, &rot(ti), &rot(tj), &d).unwrap();
            prop_assert!((a - b).abs() < 1e-8 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn equal_rotations_cancel_singular_parts(p in point(0.8), q in point(0.8), t in angles()) {
        prop_assume!(p.dist(q) > 0.05);
        let d = disk();
        let r = rot(t);
        let v = interaction_pair(p, q, &r, &r, &d).unwrap();
        // 2 Re (1 − p̄q)⁻² is the sum ∂ₓh₁ + ∂_yh₂ on the disk.
        let w = C::new(1.0, 0.0) - p.to_complex().conj() * q.to_complex();
        let expected = 16.0 * A0 * 2.0 * (C::new(1.0, 0.0) / (w * w)).re;
        prop_assert!((v - expected).abs() < 1e-10 * (1.0 + expected.abs()));
    }

    #[test]
    fn sigma_is_permutation_invariant(
        p in proptest::collection::vec(point(0.7), 3), t in proptest::collection::vec(angles(), 3),
        l in proptest::collection::vec(50.0..300.0f64, 3),
    ) {
        prop_assume!(p[0].dist(p[1]) > 0.15 && p[1].dist(p[2]) > 0.15 && p[0].dist(p[2]) > 0.15);
        let d = disk();
        let g = GOmega::new(0.5).unwrap();
        let bs: Vec<BubbleParams> = (0..3).map(|i| BubbleParams::new(p[i], l[i], rot(t[i])).unwrap()).collect();
        let c = Configuration::new(0.01, bs.clone(), 10.0).unwrap();
        let c2 = Configuration::new(0.01, vec![bs[2], bs[0], bs[1]], 10.0).unwrap();
        let (a, b) = (sigma_total(&c, &d, &g).unwrap(), sigma_total(&c2, &d, &g).unwrap());
        prop_assert!((a - b).abs() < 1e-14 * (1.0 + a.abs()));
    }

    #[test]
    fn sigma_is_invariant_under_common_rotation(
        p in proptest::collection::vec(point(0.7), 2), t in proptest::collection::vec(angles(), 2),
        q in angles(), l in proptest::collection::vec(50.0..300.0f64, 2),
    ) {
        prop_assume!(p[0].dist(p[1]) > 0.15);
        let d = disk();
        let left = rot(q);
        let make = |extra: &Rotation3| -> Configuration {
            let bs = (0..2).map(|i| BubbleParams::new(p[i], l[i], extra.compose(&rot(t[i]))).unwrap()).collect();
            Configuration::new(0.01, bs, 10.0).unwrap()
        };
        let a = sigma_total(&make(&Rotation3::identity()), &d, &ZeroDatum).unwrap();
        let b = sigma_total(&make(&left), &d, &ZeroDatum).unwrap();
        prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn extremal_pair_is_rotation_covariant(p in point(0.7), q in point(0.7), alpha in 0.0..(2.0 * PI)) {
        prop_assume!(p.dist(q) > 0.1);
        let d = disk();
        let v = two_bubble_extremal(p, q, &d).unwrap();
        let w = two_bubble_extremal(p.rotate(alpha), q.rotate(alpha), &d).unwrap();
        prop_assert!(v <= 0.0);
        prop_assert!((v - w).abs() < 1e-10 * v.abs());
    }
}
