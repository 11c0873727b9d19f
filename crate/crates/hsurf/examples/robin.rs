//! Robin function, concentration function H̃ and the two conformal radii on
//! the disk, a Möbius image of the disk and an annulus.

use hsurf::bubble_core::Point2;
use hsurf::domain_green::{green, h_functions, h_tilde, radii, robin_diagonal, DomainModel, Mobius};
use hsurf::annulus_robin::AnnulusModel;
use num_complex::Complex64;

fn report(name: &str, d: &DomainModel, a: Point2) -> hsurf::error::Result<()> {
    let h = robin_diagonal(d, a)?;
    let ht = h_tilde(d, a)?;
    let (r_har, r_hyp) = radii(d, a)?;
    println!("{name}: H(a,a) = {h:.12}, H̃(a) = {ht:.12}, 2e^(2H) = {:.12}", 2.0 * (2.0 * h).exp());
    println!("  harmonic radius {r_har:.12}, hyperbolic radius {r_hyp:.12}");
    Ok(())
}

fn main() -> hsurf::error::Result<()> {
    let a = Point2::new(0.3, -0.2);
    let disk = DomainModel::disk();
    report("disk", &disk, a)?;
    println!("  G(a, (−0.1, 0.4)) = {:.12}", green(&disk, a, Point2::new(-0.1, 0.4))?);
    let h = h_functions(&disk, a, Point2::new(-0.1, 0.4))?;
    println!("  h-functions at (−0.1, 0.4): h1 = {:.9}, h2 = {:.9}, h3 = {:?}", h.h1, h.h2, h.h3);

    // The disk of radius 1.7 about 0.5 + 0.2i, mapped onto D.
    let m = Mobius::from_disk(Complex64::new(0.5, 0.2), 1.7)?;
    report("disk |z − (0.5+0.2i)| < 1.7", &DomainModel::mobius(m), a)?;

    let ann = DomainModel::Annulus(AnnulusModel::new(std::f64::consts::E)?);
    report("annulus ρ = e", &ann, Point2::new(1.2, 0.3))?;
    Ok(())
}
