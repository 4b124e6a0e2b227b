//! The independent cross-check: estimate `inf(f1^2 + f2^2)` by seeded
//! sampling, then polish the best sample into an exact common point when
//! one exists. Useful for validating any other result in this crate.
//!
//! ```sh
//! cargo run --example sampling_oracle
//! ```

use nalgebra::{dmatrix, dvector};
use qmeet::oracle::{find_common_point, sample_min, OracleConfig, SampleBox};
use qmeet::quadform::Quadratic;

fn main() {
    // An ellipse and a parabola that cross in two mirror-image points.
    let f1 = Quadratic::new(dmatrix![0.25, 0.0; 0.0, 1.0], dvector![0.0, 0.0], -1.0).unwrap();
    let f2 = Quadratic::new(dmatrix![1.0, 0.0; 0.0, 0.0], dvector![0.0, -0.5], -0.3).unwrap();

    let report = sample_min(
        &f1,
        &f2,
        &OracleConfig {
            bounds: SampleBox::centered(2, 5.0).unwrap(),
            samples: 10_000,
            seed: 42,
            expand_on_boundary: true,
        },
    )
    .unwrap();
    println!(
        "sampling: best f1^2 + f2^2 = {:.3e} at ({:.4}, {:.4}) after {} samples",
        report.best_value, report.best_point[0], report.best_point[1], report.n_samples
    );

    // The raw sample is only close; the multistart polish lands on the
    // crossing to machine precision.
    let w = find_common_point(&f1, &f2, &[report.best_point.clone()])
        .expect("the curves cross, a common point must surface");
    println!(
        "polished: ({:.9}, {:.9}) with residuals ({:.1e}, {:.1e})",
        w[0],
        w[1],
        f1.eval(&w),
        f2.eval(&w)
    );

    // Seeding the hunt from each side reaches both crossings; the polish is
    // free to cross sides, so the seed only suggests, never dictates.
    for side in [(3.0, 1.0), (-3.0, 1.0)] {
        let seed = dvector![side.0, side.1];
        if let Some(p) = find_common_point(&f1, &f2, &[seed]) {
            println!("  from ({:+.0}, {:+.0}): crossing at ({:+.6}, {:+.6})", side.0, side.1, p[0], p[1]);
        }
    }
}
