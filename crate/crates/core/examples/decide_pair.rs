//! The front door: build two quadratics, ask whether their zero sets meet.
//!
//! ```sh
//! cargo run --example decide_pair
//! ```

use nalgebra::{dmatrix, dvector};
use qmeet::decision::{decide, ToleranceConfig, VerdictTag};
use qmeet::quadform::Quadratic;

fn main() {
    // Unit circle and a circle of radius 1 centred at (1, 0):
    //   f(x) = x'Ax + 2a'x + a0
    let f1 = Quadratic::new(dmatrix![1.0, 0.0; 0.0, 1.0], dvector![0.0, 0.0], -1.0).unwrap();
    let f2 = Quadratic::new(dmatrix![1.0, 0.0; 0.0, 1.0], dvector![-1.0, 0.0], 0.0).unwrap();

    let verdict = decide(&f1, &f2, &ToleranceConfig::default()).unwrap();

    println!("verdict: {:?}", verdict.tag);
    if let Some(v) = verdict.quartic_min {
        println!("inf(f1^2 + f2^2) = {v:.6e}");
    }
    if let Some(w) = &verdict.witness {
        println!(
            "common point: ({:.6}, {:.6}) with residuals ({:.2e}, {:.2e})",
            w[0],
            w[1],
            f1.eval(w),
            f2.eval(w)
        );
    }
    println!("pipeline:");
    for line in &verdict.trace {
        println!("  - {line}");
    }

    assert_eq!(verdict.tag, VerdictTag::Intersect);
}
