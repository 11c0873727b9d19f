//! Universal constants of the bubble and pointwise checks of the bubble
//! equation `Δδ = 2δ_x∧δ_y` and the Pohozaev-type identity.

use hsurf::bubble_core::{
    bubble_pde_residual, constant_a0, identity_integral_zero, pohozaev_residual, BubbleParams, Point2, Rotation3, Vec3,
};

fn main() -> hsurf::error::Result<()> {
    let a0 = constant_a0()?;
    println!("A0 = {:.15} (π/2 = {:.15}), error estimate {:.1e}", a0.value, std::f64::consts::FRAC_PI_2, a0.error);
    let z = identity_integral_zero()?;
    println!("∫(1−|ξ|²)/(1+|ξ|²)³ = {:.3e}", z.value);

    let r = Rotation3::about_axis(Vec3::new(1.0, 2.0, 2.0).normalize(), 0.8);
    let b = BubbleParams::new(Point2::new(0.2, -0.1), 7.5, r)?;
    let mut worst: f64 = 0.0;
    let mut pohozaev: f64 = 0.0;
    for i in 0..50 {
        let t = i as f64 * 0.37;
        let xi = Point2::new(0.6 * t.cos() * (1.0 + 0.3 * t.sin()), 0.6 * (1.3 * t).sin());
        worst = worst.max(bubble_pde_residual(&b, xi).norm());
        pohozaev = pohozaev.max(pohozaev_residual(&b, xi).abs());
    }
    println!("max |Δδ − 2δ_x∧δ_y| over 50 points: {worst:.2e}");
    println!("max Pohozaev residual over 50 points: {pohozaev:.2e}");
    Ok(())
}
