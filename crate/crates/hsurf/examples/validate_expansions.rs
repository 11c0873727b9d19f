//! Direct quadrature of the Euler functional versus the reduced expansion:
//! one-bubble energy fit, pairwise interaction and datum cross term.

use hsurf::bubble_core::{Point2, Rotation3};
use hsurf::direct_energy::{validate_one_bubble_expansion, validate_pair_third_row, Resolution};
use hsurf::reduced_energy::{LinearDatum, ZeroDatum};

fn main() -> hsurf::error::Result<()> {
    let res = Resolution::default();
    let lambdas = [10.0, 20.0, 40.0, 80.0];
    let one = validate_one_bubble_expansion(Point2::ORIGIN, &Rotation3::identity(), &lambdas, 1.0, &ZeroDatum, &res)?;
    println!("one bubble: c = {:.9} (4π/3 = {:.9}), α = {:.6} (pred {:.6})", one.fitted_constant, one.direct_level, one.fitted_alpha, one.predicted_alpha);
    println!("  residuals {:?}\n  slopes {:?}  pass {}", one.residuals, one.residual_slopes, one.pass);

    let g = LinearDatum { col_x: [0.3, 0.1, 0.2], col_y: [-0.1, 0.4, 0.1], offset: [0.0; 3] };
    let one_g = validate_one_bubble_expansion(Point2::new(0.2, -0.1), &Rotation3::identity(), &lambdas, 1.0, &g, &res)?;
    println!("datum: measured {:?}\n       predicted {:?}\n       rel {:?}", one_g.datum_linear, one_g.datum_predicted, one_g.datum_relative_errors);

    let tr = validate_pair_third_row(Point2::new(-0.3, 0.0), Point2::new(0.3, 0.0), &[20.0, 40.0, 80.0], &res)?;
    let d = &tr.diagonal;
    println!("pair (identity): λ²·measured {:?}\n  closed form {:.6}, rel err {:?}, pass {}", d.measured, d.predicted, d.relative_errors, d.pass);
    println!("pair (quarter turn about e₂): λ²·measured {:?}\n  fitted {:.6}, in-plane closed form {:.6}, out-of-plane share {:.4}, pass {}",
        tr.rotated.measured, tr.rotated.fitted_coefficient, tr.rotated.predicted, tr.relative_contribution, tr.pass);
    Ok(())
}
