//! The file-based workflow end to end: decide a problem document, save a
//! verdict document, then re-validate the verdict against the problem — the
//! same three steps as
//!
//! ```sh
//! qmeet decide problem.json > verdict.json
//! qmeet certify problem.json verdict.json
//! ```
//!
//! `decide` and `certify` run here through the library's command entry
//! point; the verdict document in between is assembled with serde to show
//! its shape.
//!
//! ```sh
//! cargo run --example json_pipeline
//! ```

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use qmeet::decision::{decide, ToleranceConfig};
use qmeet::quadform::Quadratic;

fn run(args: &[&str]) -> i32 {
    println!("$ {}", args.join(" "));
    let code = qmeet::cli::run(args.iter().map(|s| s.to_string()).collect());
    println!("(exit code {code})\n");
    code
}

fn load(path: &Path) -> (Quadratic, Quadratic) {
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let quad = |v: &serde_json::Value| {
        let rows: Vec<Vec<f64>> = serde_json::from_value(v["matrix"].clone()).unwrap();
        let n = rows.len();
        let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let linear: Vec<f64> = serde_json::from_value(v["linear"].clone()).unwrap();
        Quadratic::new(matrix, DVector::from_vec(linear), v["constant"].as_f64().unwrap())
            .unwrap()
    };
    (quad(&doc["f1"]), quad(&doc["f2"]))
}

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let crossing = data.join("crossing_circles.json");
    let asymptotic = data.join("asymptotic_pair.json");

    // Human-readable verdict with the pipeline trace.
    run(&["qmeet", "decide", "--trace", crossing.to_str().unwrap()]);

    // The same decision through the library, packed into the verdict
    // document format that `decide --format json` emits.
    let (f1, f2) = load(&asymptotic);
    let verdict = decide(&f1, &f2, &ToleranceConfig::default()).unwrap();
    let doc = serde_json::json!({
        "schema": "qmeet-cert/1",
        "verdict": verdict.tag,
        "witness": verdict.witness.as_ref().map(|w| w.iter().copied().collect::<Vec<f64>>()),
        "certificate": verdict.certificate,
        "quarticMin": verdict.quartic_min,
        "tolerance": verdict.tolerance,
    });
    let verdict_path = std::env::temp_dir().join("qmeet_example_verdict.json");
    std::fs::write(&verdict_path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    println!(
        "wrote a {} verdict document to {}\n",
        doc["verdict"].as_str().unwrap(),
        verdict_path.display()
    );

    // Re-validate the saved verdict against its problem: the certificate is
    // re-checked from the document alone, no solver re-run involved.
    run(&[
        "qmeet",
        "certify",
        asymptotic.to_str().unwrap(),
        verdict_path.to_str().unwrap(),
    ]);
}
