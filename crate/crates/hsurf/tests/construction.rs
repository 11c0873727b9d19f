//! Prescribed-sphere construction: the concentrating datum, the block Hessian
//! model, the superposed datum and the Newton search with its certificate.

use hsurf::bubble_core::{AngleTriple, Point2, Vec3, A0};
use hsurf::construction::*;
use hsurf::reduced_energy::{BoundaryDatum, GOmega};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn concentrating_datum_values() {
    let omega = 0.6;
    let v = g_omega(omega, Point2::new(0.0, 0.0)).unwrap();
    assert!(v.norm() < 1e-15);
    // On the real axis g_ω(x,0) = (x/(1−ωx), 0, 0).
    let v = g_omega(omega, Point2::new(0.5, 0.0)).unwrap();
    assert!((v - Vec3::new(0.5 / 0.7, 0.0, 0.0)).norm() < 1e-15);
    // Boundary trace is the Kelvin datum (ξ − ω)/|ξ − ω|².
    for k in 0..16 {
        let t = 2.0 * PI * k as f64 / 16.0;
        let r = 1.0 - 1e-12;
        let v = g_omega(omega, Point2::new(r * t.cos(), r * t.sin())).unwrap();
        let (x, y) = (t.cos() - omega, t.sin());
        let kelvin = Vec3::new(x, y, 0.0) / (x * x + y * y);
        assert!((v - kelvin).norm() < 1e-9);
    }
    assert!(g_omega(1.0, Point2::new(0.0, 0.0)).is_err());
    assert!(g_omega(0.0, Point2::new(0.0, 0.0)).is_err());
}

#[test]
fn matrix_a_is_positive_definite() {
    for omega in [0.5, 0.9, 0.99] {
        for eps in [1e-2, 1e-3] {
            let a = matrix_a(omega, eps);
            assert_eq!(a, a.transpose());
            let e = SymmetricEigen::new(DMatrix::from_column_slice(6, 6, a.as_slice())).eigenvalues;
            assert!(e.min() > 0.0, "ω={omega} ε={eps}: {e}");
        }
    }
}

#[test]
fn matrix_a_is_the_scaled_hessian() {
    let (omega, eps) = (0.7, 1e-2);
    let anchor = [omega, 0.0, 2.0 / eps, PI / 2.0, 0.0, 0.0];
    let f = |c: &[f64; 6]| f_single_g_omega(omega, eps, c) / (8.0 * A0);
    let steps = [1e-4, 1e-4, 1e-4 / eps, 1e-4, 1e-4, 1e-4];
    let norm = 2.0 * eps * eps / (1.0 - omega * omega).powi(2);
    let a = matrix_a(omega, eps);
    for i in 0..6 {
        for j in 0..6 {
            let at = |si: f64, sj: f64| {
                let mut c = anchor;
                c[i] += si * steps[i];
                c[j] += sj * steps[j];
                f(&c)
            };
            let h = (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * steps[i] * steps[j]);
            let scale = (a[(i, i)] * a[(j, j)]).sqrt();
            assert!((h / norm - a[(i, j)]).abs() < 1e-4 * scale, "({i},{j}): {} vs {}", h / norm, a[(i, j)]);
        }
    }
}

#[test]
fn anchor_is_critical_for_single_block_functional() {
    let (omega, eps) = (0.9, 1e-3);
    let anchor = [omega, 0.0, 2.0 / eps, PI / 2.0, 0.0, 0.0];
    let v = f_single_g_omega(omega, eps, &anchor);
    assert!((v + 4.0 * A0 * eps * eps / (1.0 - omega * omega).powi(2)).abs() < 1e-12 * v.abs());
    let steps = [1e-6, 1e-6, 1e-6 / eps, 1e-6, 1e-6, 1e-6];
    for i in 0..6 {
        let mut p = anchor;
        let mut m = anchor;
        p[i] += steps[i];
        m[i] -= steps[i];
        let d = (f_single_g_omega(omega, eps, &p) - f_single_g_omega(omega, eps, &m)) / (2.0 * steps[i]);
        assert!(d.abs() * steps[i] < 1e-9 * v.abs(), "coordinate {i}: {d}");
    }
}

#[test]
fn sphere_targets() {
    let s = SphereConfig::equally_spaced(4).unwrap();
    for (c, r) in s.centers.iter().zip(&s.aligning) {
        assert!((Vec3::from(*c).norm() - 1.0).abs() < 1e-15);
        assert!((r.apply(&Vec3::new(0.0, 0.0, -1.0)) - Vec3::from(*c)).norm() < 1e-12);
    }
    assert!(SphereConfig::new(vec![[1.0, 1.0, 0.0]]).is_err());
    assert!(SphereConfig::new(vec![]).is_err());
}

#[test]
fn parameters_are_validated() {
    let s = SphereConfig::equally_spaced(2).unwrap();
    assert!(ConstructionParams::new(2, 0.9, 1e-2, 0.1, s.clone()).is_ok());
    assert!(ConstructionParams::new(3, 0.9, 1e-2, 0.1, s.clone()).is_err());
    assert!(ConstructionParams::new(2, 1.2, 1e-2, 0.1, s.clone()).is_err());
    assert!(ConstructionParams::new(2, 0.9, -1e-2, 0.1, s.clone()).is_err());
    assert!(ConstructionParams::new(2, 0.9, 1e-2, 0.0, s).is_err());
}

#[test]
fn box_membership() {
    let bx = BoxTmu::new(0.9, 1e-2, 0.1);
    assert!(bx.contains(&bx.anchor));
    let mut c = bx.anchor;
    c[2] += 0.1 / 1e-2;
    assert!(bx.contains(&c));
    c[2] += 1.0;
    assert!(!bx.contains(&c));
    let mut c = bx.anchor;
    c[0] -= 0.2 * 0.19;
    assert!(!bx.contains(&c));
}

#[test]
fn single_block_newton_stays_at_anchor_and_sphere_is_south_pole() {
    let targets = SphereConfig::new(vec![[0.0, 0.0, -1.0]]).unwrap();
    let mut p = ConstructionParams::new(1, 0.9, 1e-2, 0.1, targets).unwrap();
    p.samples_per_edge = 3;
    let (config, cert) = find_critical_configuration(&p).unwrap();
    assert!(cert.pass, "{cert:?}");
    assert!(cert.gradient_norm < 1e-10);
    let anchor = BoxTmu::new(0.9, 1e-2, 0.1).anchor;
    let alpha = p.block_angle(0);
    // The block frame for k = 1 is a full turn, so block coordinates coincide
    // with the anchor and the bubble sits at (ω, 0).
    assert!((alpha - 2.0 * PI).abs() < 1e-15);
    for (x, y) in cert.block_coordinates[0].iter().zip(&anchor) {
        assert!((x - y).abs() < 1e-8 * y.abs().max(1.0));
    }
    assert!((config.bubbles[0].center.x - 0.9).abs() < 1e-8);
    let centres = limiting_spheres(&config);
    assert!((centres[0] - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-8);
    assert!(max_center_deviation(&config, &p.targets) < 1e-8);
}

#[test]
fn three_block_construction_hits_targets() {
    let mut p = ConstructionParams::new(3, 0.9, 1e-3, 0.1, SphereConfig::equally_spaced(3).unwrap()).unwrap();
    p.samples_per_edge = 3;
    let (config, cert) = find_critical_configuration(&p).unwrap();
    assert!(cert.pass);
    assert!(cert.hessian_min_eigenvalue > 0.0);
    assert!(cert.blocks.iter().all(|b| b.min_margin > 0.0));
    assert!(cert.scaled_offsets.iter().flatten().all(|z| z.abs() <= p.mu));
    assert!(limiting_spheres(&config).iter().all(|c| (c.norm() - 1.0).abs() < 1e-12));
    assert!(max_center_deviation(&config, &p.targets) < 0.05);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_datum_term_matches_differences(
        omega in 0.1..0.95f64, theta in 0.0..PI, psi in -PI..PI, phi in -PI..PI,
        r in 0.0..0.8f64, t in 0.0..(2.0 * PI),
    ) {
        let xi = Point2::new(r * t.cos(), r * t.sin());
        let ang = AngleTriple::new(theta, psi, phi);
        let m = chart_inverse(ang);
        let h = 1e-6;
        let comp = |p: Point2, k: usize| (m * g_omega(omega, p).unwrap())[k];
        let dx = (comp(Point2::new(xi.x + h, xi.y), 0) - comp(Point2::new(xi.x - h, xi.y), 0)) / (2.0 * h);
        let dy = (comp(Point2::new(xi.x, xi.y + h), 1) - comp(Point2::new(xi.x, xi.y - h), 1)) / (2.0 * h);
        let v = d_rinv_g_omega(omega, ang, xi);
        prop_assert!((v - (dx + dy)).abs() < 1e-6 * (1.0 + v.abs()), "{v} vs {}", dx + dy);
        prop_assert!((chart_rotation(ang).matrix().transpose() - m).norm() < 1e-14);
    }

    #[test]
    fn superposed_datum_is_harmonic(k in 1usize..5, omega in 0.3..0.9f64, r in 0.0..0.7f64, t in 0.0..(2.0 * PI)) {
        let p = ConstructionParams::new(k, omega, 1e-2, 0.1, SphereConfig::equally_spaced(k).unwrap()).unwrap();
        let g = build_g_k_omega(&p).unwrap();
        let xi = Point2::new(r * t.cos(), r * t.sin());
        let h = 1e-4;
        let at = |dx: f64, dy: f64| g.value(Point2::new(xi.x + dx, xi.y + dy));
        let lap = (at(h, 0.0) + at(-h, 0.0) + at(0.0, h) + at(0.0, -h) - at(0.0, 0.0) * 4.0) / (h * h);
        prop_assert!(lap.norm() < 1e-5 * (1.0 + at(0.0, 0.0).norm()), "{lap}");
    }

    #[test]
    fn superposed_datum_sums_rotated_blocks(k in 1usize..5, omega in 0.3..0.9f64, r in 0.0..0.9f64, t in 0.0..(2.0 * PI)) {
        let p = ConstructionParams::new(k, omega, 1e-2, 0.1, SphereConfig::equally_spaced(k).unwrap()).unwrap();
        let g = build_g_k_omega(&p).unwrap();
        let xi = Point2::new(r * t.cos(), r * t.sin());
        let base = GOmega::new(omega).unwrap();
        let mut sum = Vec3::zeros();
        for j in 0..k {
            let a = p.block_angle(j);
            let q = Point2::new(a.cos() * xi.x + a.sin() * xi.y, -a.sin() * xi.x + a.cos() * xi.y);
            sum += p.targets.aligning[j].apply(&base.value(q));
        }
        prop_assert!((g.value(xi) - sum).norm() < 1e-12 * (1.0 + sum.norm()));
    }
}
