//! Compares the concentration function `H̃` with `2e^{2H(a,a)}` along a
//! radius of the annulus `1/ρ < |ξ| < ρ` for `ρ = e` and `log ρ = 3.5`, and
//! locates their radial critical points.

use hsurf::annulus_robin::{compare_scan, critical_points_radial, AnnulusModel, RadialFunction};

fn main() -> hsurf::Result<()> {
    for log_rho in [1.0f64, 3.5] {
        let m = AnnulusModel::with_terms(log_rho.exp(), 100)?;
        let curve = compare_scan(&m, 2001)?;
        let ch = critical_points_radial(RadialFunction::HTilde, &m)?;
        let ce = critical_points_radial(RadialFunction::TwoE2H, &m)?;
        println!("log ρ = {log_rho}: default K = {}", AnnulusModel::default_terms(m.rho));
        println!("  max relative difference of the curves: {:.6e}", curve.max_relative_difference());
        println!("  critical log x of H̃:      {ch:?}");
        println!("  critical log x of 2e^2H:  {ce:?}");
    }
    Ok(())
}
