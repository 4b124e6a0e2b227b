//! Surfaces can approach each other arbitrarily closely without meeting:
//! `inf(f1^2 + f2^2) = 0` alone does not prove contact — attainment does.
//!
//! Here `{x1 = 0}` (doubled) runs alongside the hyperbola `x1*x2 = 1`, which
//! flattens onto the axis at infinity but never reaches it.
//!
//! ```sh
//! cargo run --example unattained_touching
//! ```

use nalgebra::{dmatrix, dvector, DVector};
use qmeet::decision::{decide, quartic_min, Certificate, ToleranceConfig, VerdictTag};
use qmeet::quadform::Quadratic;

fn main() {
    let f1 = Quadratic::new(dmatrix![1.0, 0.0; 0.0, 0.0], dvector![0.0, 0.0], 0.0).unwrap();
    let f2 = Quadratic::new(dmatrix![0.0, 0.5; 0.5, 0.0], dvector![0.0, 0.0], -1.0).unwrap();

    let transcript = quartic_min(&f1, &f2, 1e-7).unwrap();
    println!("inf(f1^2 + f2^2) = {:.6e}", transcript.value());

    // Walk out along the hyperbola: the squared residual shrinks like 1/t^2,
    // so the infimum really is zero...
    for t in [1.0, 10.0, 100.0, 1000.0] {
        let x = DVector::from_vec(vec![1.0 / t, t]);
        let q = f1.eval(&x).powi(2) + f2.eval(&x).powi(2);
        println!("  at (1/{t}, {t}): f1^2 + f2^2 = {q:.3e}");
    }

    // ... yet the verdict is DISJOINT: f1 is one-sided, its zero set is the
    // plane {x1 = 0}, and restricted to that plane f2 is identically -1.
    let verdict = decide(&f1, &f2, &ToleranceConfig::default()).unwrap();
    println!("verdict: {:?}", verdict.tag);
    match &verdict.certificate {
        Some(Certificate::AffineReduction { restricted, .. }) => {
            println!(
                "certificate: on the first surface the second equation reduces to {:+.3}",
                restricted.constant()
            );
        }
        other => println!("certificate: {other:?}"),
    }

    assert_eq!(verdict.tag, VerdictTag::Disjoint);
}
