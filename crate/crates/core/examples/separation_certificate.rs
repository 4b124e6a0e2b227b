//! A separation certificate: one surface splits the other into two pieces
//! with strictly opposite signs, so the two can never meet. The certificate
//! is geometric — no optimization value needs to be trusted.
//!
//! ```sh
//! cargo run --example separation_certificate
//! ```

use nalgebra::{dmatrix, dvector, DVector};
use qmeet::quadform::Quadratic;
use qmeet::separation::mutual_separation;

fn main() {
    // The plane {x1 = 0} against the hyperbola {x1*x2 = 1}: the hyperbola's
    // two branches sit on opposite sides of the plane.
    let f1 = Quadratic::new(dmatrix![0.0, 0.0; 0.0, 0.0], dvector![0.5, 0.0], 0.0).unwrap();
    let f2 = Quadratic::new(dmatrix![0.0, 0.5; 0.5, 0.0], dvector![0.0, 0.0], -1.0).unwrap();

    let (orientation, cert) = mutual_separation(&f1, &f2, 1e-7)
        .unwrap()
        .expect("this pair is separated");

    println!("orientation: {orientation:?}");
    println!("separating functional: nu = ({:.3}, {:.3}), nu0 = {:.3}", cert.nu[0], cert.nu[1], cert.nu0);
    println!("multiplier lambda = {:.3}, flipped: {}", cert.lambda, cert.sign_flipped);
    println!("minimum of the separated quadratic on the hyperplane: {:.6}", cert.restricted_min);

    // See the split concretely: sample points on each hyperbola branch and
    // evaluate the separating plane's equation.
    println!("signs of f1 along the second surface:");
    for x2 in [-3.0, -1.0, -0.5, 0.5, 1.0, 3.0] {
        let p = DVector::from_vec(vec![1.0 / x2, x2]);
        println!(
            "  at ({:+.3}, {:+.3}): f2 = {:+.1e}, f1 = {:+.3}",
            p[0],
            p[1],
            f2.eval(&p),
            f1.eval(&p)
        );
    }
    println!("both signs occur, zero never does — the surfaces cannot meet.");
}
