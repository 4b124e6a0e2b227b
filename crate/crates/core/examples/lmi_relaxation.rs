//! The semidefinite lower bound on `inf(f1^2 + f2^2)` for pairs whose
//! Hessians are linearly independent: scan the multiplier plane for the
//! largest `gamma` whose certificate matrix is positive semidefinite.
//! Every such `gamma` is a proof — checkable by one eigenvalue computation.
//!
//! ```sh
//! cargo run --example lmi_relaxation
//! ```

use nalgebra::{dmatrix, dvector};
use qmeet::linalg::min_eig;
use qmeet::quadform::Quadratic;
use qmeet::sprocedure::{assemble_lmi, check_lower_bound_sampled, gamma_max, lmi_quartic_min};

fn main() {
    // f1 = x1^2 + x2^2 + 1 never vanishes; f2 = x1^2 - x2^2 does. The
    // squared residual bottoms out at 1 (approached where both terms fight).
    let f1 = Quadratic::new(dmatrix![1.0, 0.0; 0.0, 1.0], dvector![0.0, 0.0], 1.0).unwrap();
    let f2 = Quadratic::new(dmatrix![1.0, 0.0; 0.0, -1.0], dvector![0.0, 0.0], 0.0).unwrap();

    let opt = lmi_quartic_min(&f1, &f2).unwrap();
    println!("lower bound: inf(f1^2 + f2^2) >= {:.9}", opt.value);
    println!(
        "multipliers: alpha = {:.6}, beta = {:.6}",
        opt.point.alpha, opt.point.beta
    );

    // The certificate is self-checking: assemble the matrix at the reported
    // point and look at its smallest eigenvalue.
    let m = assemble_lmi(&f1, &f2, opt.point.alpha, opt.point.beta, opt.value).unwrap();
    println!("certificate min eigenvalue: {:+.3e} (>= 0 up to roundoff)", min_eig(&m).unwrap());

    // Each multiplier direction has its own best gamma; the scan just picks
    // the best direction.
    for (al, be) in [(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (2.0, 0.5)] {
        println!(
            "  gamma_max({al:.1}, {be:.1}) = {:.6}",
            gamma_max(&f1, &f2, al, be).unwrap()
        );
    }

    // And sampling agrees that the bound holds.
    let holds = check_lower_bound_sampled(&f1, &f2, 0.999 * opt.value, 50_000, 8.0, 5).unwrap();
    println!("sampled check of the bound: {}", if holds { "no violation" } else { "violated" });
}
