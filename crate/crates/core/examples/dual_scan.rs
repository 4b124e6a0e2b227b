//! Minimizing one quadratic subject to one quadratic constraint: the
//! Lagrangian dual is concave on the multiplier interval where the pencil
//! stays positive semidefinite, and for this problem class its maximum is
//! the exact optimum.
//!
//! ```sh
//! cargo run --example dual_scan
//! ```

use nalgebra::{dmatrix, dvector, DVector};
use qmeet::duals::{dual_value, qp1eqc_value, qp1qc_value};
use qmeet::linalg::psd_interval;
use qmeet::quadform::Quadratic;

fn main() {
    // Minimize x1^2 + x2^2 (distance from the origin, squared) over the
    // hyperbola {x1*x2 = 1} and over the region {x1*x2 <= 1}.
    let f = Quadratic::new(dmatrix![1.0, 0.0; 0.0, 1.0], dvector![0.0, 0.0], 0.0).unwrap();
    let g = Quadratic::new(dmatrix![0.0, 0.5; 0.5, 0.0], dvector![0.0, 0.0], -1.0).unwrap();

    let interval = psd_interval(f.matrix(), g.matrix()).unwrap();
    println!(
        "pencil A + lam*B is PSD for lam in [{:.3}, {:.3}]",
        interval.lo, interval.hi
    );
    for lam in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        println!("  dual({lam:+.1}) = {:.6}", dual_value(&f, &g, lam));
    }

    let eq = qp1eqc_value(&f, &g, 1e-7).unwrap();
    println!(
        "min over {{g = 0}}: {:.6} (attained: {}, multiplier: {:?})",
        eq.value, eq.attained, eq.multiplier
    );
    if let Some(w) = &eq.witness {
        println!(
            "  at ({:.6}, {:.6}); f = {:.6}, g = {:.2e}",
            w[0],
            w[1],
            f.eval(w),
            g.eval(w)
        );
    }

    // Relaxing the constraint to an inequality lets the origin in.
    let iq = qp1qc_value(&f, &g, 1e-7).unwrap();
    println!("min over {{g <= 0}}: {:.6} (attained: {})", iq.value, iq.attained);

    // Weak duality, visibly: every feasible point dominates every dual value.
    let p = DVector::from_vec(vec![2.0, 0.5]); // on the hyperbola
    println!(
        "check: f({:.1}, {:.1}) = {:.3} >= dual maximum {:.6}",
        p[0],
        p[1],
        f.eval(&p),
        eq.value
    );
}
