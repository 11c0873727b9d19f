//! Reduced energy of a two-bubble configuration: value, analytic gradient,
//! finite-difference cross-check, optimal scale and rotation extremals.

use hsurf::bubble_core::{rotation_from_angles, AngleTriple, BubbleParams, Point2, Rotation3};
use hsurf::domain_green::DomainModel;
use hsurf::reduced_energy::{
    optimal_lambda, rotation_extremal_datum, rotation_extremal_search, sigma_charted_fd, sigma_gradient,
    two_bubble_extremal, two_bubble_extremal_search, ChartedBubble, Configuration, GOmega,
};

fn main() -> hsurf::error::Result<()> {
    let d = DomainModel::disk();
    let g = GOmega::new(0.6)?;
    let eps = 0.01;
    let b1 = BubbleParams::new(Point2::new(0.3, 0.1), 120.0, Rotation3::identity())?;
    let b2 = BubbleParams::new(Point2::new(-0.4, 0.0), 90.0, rotation_from_angles(AngleTriple::new(1.4, 0.2, -0.1)))?;
    let c = Configuration::new(eps, vec![b1, b2], 10.0)?;
    c.validate(&d)?;
    let r = sigma_gradient(&c, &d, &g)?;
    println!("Σ = {:.12e}, |∇Σ| = {:.6e}", r.value, r.gradient_norm);
    let charted: Vec<ChartedBubble> = c.bubbles.iter().map(ChartedBubble::from_bubble).collect();
    let fd = sigma_charted_fd(eps, &charted, &d, &g)?;
    for (i, (a, f)) in r.gradient.iter().zip(&fd).enumerate() {
        let diff = a.to_array().iter().zip(f).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        println!("  bubble {i}: analytic {:?}\n            max |analytic − FD| = {diff:.2e}", a.to_array());
    }
    let lam = optimal_lambda(eps, b1.center, &b1.rotation, &d, &g)?;
    println!("optimal λ at bubble 0 with its rotation: {lam:.6}");
    let (hi, lo) = rotation_extremal_datum(&g, b1.center)?;
    let (search, _) = rotation_extremal_search(&g, b1.center);
    println!("rotation extremals of d_(R⁻¹)g: {hi:.12} / {lo:.12}; search maximum {search:.12}");
    let closed = two_bubble_extremal(b1.center, b2.center, &d)?;
    let (s, _) = two_bubble_extremal_search(b1.center, b2.center, &d)?;
    println!("two-bubble extremal interaction: closed form {closed:.12}, search {s:.12}");
    Ok(())
}
