//! Finds a critical configuration of three bubbles whose limiting spheres sit
//! at equally spaced points of a great circle, and prints the certificate.

use hsurf::construction::{find_critical_configuration, limiting_spheres, max_center_deviation, ConstructionParams, SphereConfig};

fn main() -> hsurf::Result<()> {
    let targets = SphereConfig::equally_spaced(3)?;
    let params = ConstructionParams::new(3, 0.95, 1e-3, 0.1, targets.clone())?;
    let (config, cert) = find_critical_configuration(&params)?;
    println!("certificate passes: {}", cert.pass);
    println!("Newton iterations: {}, |∇Σ| = {:.3e}", cert.newton_iterations, cert.gradient_norm);
    println!("trajectory: {:?}", cert.trajectory);
    println!("Hessian min eigenvalue / ε² = {:.6}", cert.hessian_min_eigenvalue_normalized);
    for b in &cert.blocks {
        println!("block {}: boundary margin / ε² = {:.6} (worst face {:?})", b.block, b.normalized_margin, b.worst_face);
    }
    for (j, z) in cert.scaled_offsets.iter().enumerate() {
        println!("block {j} scaled offset from anchor: {z:?}");
    }
    for (j, c) in limiting_spheres(&config).iter().enumerate() {
        println!("sphere {j}: centre ({:.6}, {:.6}, {:.6})", c[0], c[1], c[2]);
    }
    println!("max |centre − target| = {:.6e}", max_center_deviation(&config, &targets));
    Ok(())
}
