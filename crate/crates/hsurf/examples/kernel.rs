//! Kernel of the linearised bubble operator, degree by degree on the sphere,
//! with the closed-form block cross-checked against quadrature.

use hsurf::linearized_s2::{gamma_block, gamma_block_quadrature, kernel_report, spectral_gap_check, verify_polynomial_kernel, KernelSample};

fn main() -> hsurf::error::Result<()> {
    let r = kernel_report(12, 1e-8);
    for d in &r.degrees {
        println!("n = {:2}: dim {}  σ_max {:.4}  margin {:?}", d.n, d.dimension, d.largest_singular_value, d.smallest_nonzero_singular_value);
    }
    println!("total over n ≤ 3: {}", r.total_low_degree);
    for n in 0..=6 {
        let dev = (gamma_block(n).matrix - gamma_block_quadrature(n).matrix).amax();
        println!("n = {n}: closed form vs quadrature max deviation {dev:.2e}");
    }
    for s in KernelSample::basis() {
        println!("planar kernel residual {:.2e} for {:?}", verify_polynomial_kernel(&s), s);
    }
    let g = spectral_gap_check(8)?;
    println!("δ direction: {:.6} (ratio {:.4}); pass {}", g.delta_value, g.delta_ratio, g.pass);
    for b in &g.blocks {
        println!("  n = {}: kernel {}  min eigenvalue {:.4}  ratio {:.4}", b.n, b.kernel_dimension, b.min_eigenvalue, b.min_ratio);
    }
    Ok(())
}
