//! Every quadratic can be driven to a short canonical shape by an invertible
//! affine change of variables; the shape alone answers questions like "does
//! it take negative values" or "is its zero set nonempty".
//!
//! ```sh
//! cargo run --example canonical_forms
//! ```

use nalgebra::{dmatrix, dvector, DVector};
use qmeet::canonical::canonicalize;
use qmeet::quadform::Quadratic;

fn show(label: &str, f: &Quadratic) {
    let c = canonicalize(f).unwrap();
    println!("{label}:");
    println!("  shape   {:?}", c.tag);
    println!(
        "  squares {} negative, {} total, tail coordinate: {}",
        c.k,
        c.m,
        if c.delta { "yes" } else { "no" }
    );
    if let Some(t) = c.theta {
        println!("  constant {t:+.6}");
    }
    if let Some(t) = c.theta_prime {
        println!("  constant {:+.6}", -t);
    }
    if let Some(t) = c.c_prime {
        println!("  constant {t:+.6}");
    }

    // The chart x = Pz + q reproduces the original values exactly.
    let z = DVector::from_vec(vec![0.3; f.dim()]);
    let x = c.to_original(&z);
    println!(
        "  check   f(Pz + q) = {:.6}, canonical value = {:.6}",
        f.eval(&x),
        c.eval_canonical(&z)
    );
}

fn main() {
    // A hyperbola: one negative square, one positive, nonzero constant.
    show(
        "x1*x2 - 1",
        &Quadratic::new(dmatrix![0.0, 0.5; 0.5, 0.0], dvector![0.0, 0.0], -1.0).unwrap(),
    );

    // A parabola: the linear part survives as a bare tail coordinate.
    show(
        "x1^2 + x2",
        &Quadratic::new(dmatrix![1.0, 0.0; 0.0, 0.0], dvector![0.0, 0.5], 0.0).unwrap(),
    );

    // One-sided with a gap: positive squares plus a positive constant, so
    // the zero set is empty.
    show(
        "x1^2 + x2^2 + 1",
        &Quadratic::new(dmatrix![1.0, 0.0; 0.0, 1.0], dvector![0.0, 0.0], 1.0).unwrap(),
    );

    // No matrix part at all.
    show(
        "x1 - 2",
        &Quadratic::new(dmatrix![0.0, 0.0; 0.0, 0.0], dvector![0.5, 0.0], -2.0).unwrap(),
    );
}
