//! Command-line front end: parse problem files, run the decision, emit
//! verdicts and certificates in text or machine-readable form.
//!
//! Problem files are JSON documents with `"schema": "qmeet/1"`; emitted
//! verdict documents carry `"schema": "qmeet-cert/1"` and embed the typed
//! certificate, so `qmeet certify problem.json verdict.json` can re-check a
//! past run from the files alone. Exit codes: 0 INTERSECT (or: validation
//! passed), 1 DISJOINT (or: validation failed), 2 UNDECIDED, 64 usage
//! error, 65 malformed data.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::decision::{
    decide, validate_certificate, Certificate, QuarticTranscript, ToleranceConfig, Verdict,
    VerdictTag,
};
use crate::oracle::{sample_min, OracleConfig, OracleReport, SampleBox};
use crate::quadform::Quadratic;

pub const PROBLEM_SCHEMA: &str = "qmeet/1";
pub const CERTIFICATE_SCHEMA: &str = "qmeet-cert/1";

const EXIT_INTERSECT: i32 = 0;
const EXIT_DISJOINT: i32 = 1;
const EXIT_UNDECIDED: i32 = 2;
const EXIT_USAGE: i32 = 64;
const EXIT_DATA: i32 = 65;

/// How far an input matrix may sit from its own transpose, relative to its
/// magnitude, before the file is rejected instead of symmetrized.
const SYMMETRY_REL_TOL: f64 = 1e-8;

const DEFAULT_ORACLE_SAMPLES: usize = 20_000;
const DEFAULT_ORACLE_HALF_WIDTH: f64 = 10.0;

#[derive(Parser)]
#[command(
    name = "qmeet",
    version,
    about = "Decides whether two quadric hypersurfaces {f1=0} and {f2=0} intersect",
    after_help = "Exit codes: 0 INTERSECT/valid, 1 DISJOINT/invalid, 2 UNDECIDED, \
                  64 usage error, 65 data error.\n\
                  QMEET_TOL sets the decision tolerance; --tol wins over it."
)]
struct Cli {
    /// Relative decision tolerance in (0, 1); wins over QMEET_TOL and the
    /// problem file
    #[arg(long, global = true, value_name = "FLOAT")]
    tol: Option<f64>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Seed for the sampling oracle
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,

    /// Sample count for the oracle
    #[arg(long, global = true, value_name = "INT")]
    samples: Option<usize>,

    /// Append a sampling cross-check of the quartic minimum to the output
    #[arg(long, global = true)]
    oracle_check: bool,

    /// Include the pipeline trace in the output
    #[arg(long, global = true)]
    trace: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a single problem file
    Decide { file: PathBuf },
    /// Decide a JSON array of problems, preserving input order
    Batch { file: PathBuf },
    /// Estimate inf (f1^2 + f2^2) by seeded sampling
    Oracle { file: PathBuf },
    /// Re-validate an emitted verdict document against its problem
    Certify { file: PathBuf, certificate: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn data(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::data(e.to_string())
    }
}

/// Entry point behind the binary; returns the process exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    EXIT_INTERSECT
                }
                _ => {
                    eprint!("{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let env_tol = std::env::var("QMEET_TOL").ok();
    let result = match &cli.command {
        Command::Decide { file } => handle_decide(file, &cli, env_tol.as_deref()),
        Command::Batch { file } => handle_batch(file, &cli, env_tol.as_deref()),
        Command::Oracle { file } => handle_oracle(file, &cli, env_tol.as_deref()),
        Command::Certify { file, certificate } => {
            handle_certify(file, certificate, &cli, env_tol.as_deref())
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qmeet: {}", e.message);
            e.code
        }
    }
}

// ---------------------------------------------------------------- ingest

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Convention {
    /// `f(x) = x'Ax + 2a'x + a0`: `linear` is `a` (the default).
    Factor2,
    /// `f(x) = x'Ax + b'x + a0`: `linear` is `b`, halved on ingest.
    Plain,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct QuadIn {
    matrix: Vec<Vec<f64>>,
    linear: Vec<f64>,
    constant: f64,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct TolIn {
    decision_rel: Option<f64>,
    certificate_rel: Option<f64>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ProblemIn {
    schema: Option<String>,
    id: Option<String>,
    convention: Option<Convention>,
    f1: QuadIn,
    f2: QuadIn,
    tolerance: Option<TolIn>,
}

struct Problem {
    id: Option<String>,
    f1: Quadratic,
    f2: Quadratic,
    tolerance: Option<TolIn>,
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::data(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn problem_from_value(value: Value, origin: &str) -> Result<Problem, CliError> {
    let parsed: ProblemIn = serde_json::from_value(value)
        .map_err(|e| CliError::data(format!("{origin}: {e}")))?;
    if let Some(schema) = &parsed.schema {
        if schema != PROBLEM_SCHEMA {
            return Err(CliError::data(format!(
                "{origin}: unsupported schema {schema:?} (expected {PROBLEM_SCHEMA:?})"
            )));
        }
    }
    let convention = parsed.convention.unwrap_or(Convention::Factor2);
    let f1 = quadratic_from_input(&parsed.f1, convention, origin, "f1")?;
    let f2 = quadratic_from_input(&parsed.f2, convention, origin, "f2")?;
    if f1.dim() != f2.dim() {
        return Err(CliError::data(format!(
            "{origin}: f1 has dimension {} but f2 has dimension {}",
            f1.dim(),
            f2.dim()
        )));
    }
    Ok(Problem {
        id: parsed.id,
        f1,
        f2,
        tolerance: parsed.tolerance,
    })
}

fn load_problem(path: &Path) -> Result<Problem, CliError> {
    problem_from_value(read_json(path)?, &path.display().to_string())
}

fn quadratic_from_input(
    q: &QuadIn,
    convention: Convention,
    origin: &str,
    field: &str,
) -> Result<Quadratic, CliError> {
    let matrix = crate::serde_mat::matrix_from_rows(&q.matrix)
        .map_err(|e| CliError::data(format!("{origin}: {field}.matrix: {e}")))?;
    let n = matrix.nrows();
    if q.linear.len() != n {
        return Err(CliError::data(format!(
            "{origin}: {field}.linear has {} entries but the matrix is {n}x{n}",
            q.linear.len()
        )));
    }
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((matrix[(i, j)] - matrix[(j, i)]).abs());
        }
    }
    let scale = 1f64.max(crate::linalg::max_abs(&matrix));
    if asym > SYMMETRY_REL_TOL * scale {
        return Err(CliError::data(format!(
            "{origin}: {field}.matrix is not symmetric (max asymmetry {asym:.3e})"
        )));
    }
    let sym = (&matrix + matrix.transpose()) * 0.5;
    if asym > 0.0 {
        eprintln!("qmeet: {origin}: {field}.matrix symmetrized (asymmetry {asym:.3e})");
    }
    let mut linear = DVector::from_vec(q.linear.clone());
    if convention == Convention::Plain {
        linear *= 0.5;
    }
    Quadratic::new(sym, linear, q.constant)
        .map_err(|e| CliError::data(format!("{origin}: {field}: {e}")))
}

fn resolve_tolerances(
    flag: Option<f64>,
    env: Option<&str>,
    file: Option<&TolIn>,
) -> Result<ToleranceConfig, CliError> {
    fn checked(label: &str, t: f64) -> Result<f64, CliError> {
        if t.is_finite() && t > 0.0 && t < 1.0 {
            Ok(t)
        } else {
            Err(CliError::usage(format!(
                "{label} must be a number in (0, 1), got {t}"
            )))
        }
    }
    let mut cfg = ToleranceConfig::default();
    if let Some(t) = file {
        if let Some(d) = t.decision_rel {
            cfg.decision_rel = checked("tolerance.decisionRel", d)?;
        }
        if let Some(c) = t.certificate_rel {
            cfg.certificate_rel = checked("tolerance.certificateRel", c)?;
        }
    }
    if let Some(s) = env {
        let t: f64 = s
            .parse()
            .map_err(|_| CliError::usage(format!("QMEET_TOL is not a number: {s:?}")))?;
        cfg.decision_rel = checked("QMEET_TOL", t)?;
    }
    if let Some(t) = flag {
        cfg.decision_rel = checked("--tol", t)?;
    }
    Ok(cfg)
}

// ---------------------------------------------------------------- output

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct VerdictDoc {
    #[serde(default)]
    schema: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    verdict: VerdictTag,
    #[serde(default, with = "crate::serde_mat::opt_vector")]
    witness: Option<DVector<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    certificate: Option<Certificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quartic_min: Option<f64>,
    tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleReport>,
}

impl VerdictDoc {
    fn new(id: Option<String>, verdict: Verdict, with_trace: bool) -> Self {
        VerdictDoc {
            schema: Some(CERTIFICATE_SCHEMA.to_string()),
            id,
            verdict: verdict.tag,
            witness: verdict.witness,
            certificate: verdict.certificate,
            quartic_min: verdict.quartic_min,
            tolerance: verdict.tolerance,
            trace: with_trace.then_some(verdict.trace),
            oracle: None,
        }
    }
}

fn verdict_exit_code(tag: VerdictTag) -> i32 {
    match tag {
        VerdictTag::Intersect => EXIT_INTERSECT,
        VerdictTag::Disjoint => EXIT_DISJOINT,
        VerdictTag::Undecided => EXIT_UNDECIDED,
    }
}

fn fmt_vec(v: &DVector<f64>) -> String {
    let entries: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", entries.join(", "))
}

fn certificate_summary(cert: &Certificate) -> String {
    match cert {
        Certificate::PositiveGap { transcript } => {
            let how = match transcript {
                QuarticTranscript::Independent { lmi, .. } => format!(
                    "relaxation multipliers alpha={:.6}, beta={:.6}",
                    lmi.alpha, lmi.beta
                ),
                QuarticTranscript::Dependent {
                    t_star, dual_lambda, ..
                } => format!(
                    "dependent lifting, t*={t_star:.6}, lambda={}",
                    dual_lambda.map_or("none".to_string(), |l| format!("{l:.6}"))
                ),
                QuarticTranscript::BothAffine { x_star, .. } => {
                    format!("least squares at {}", fmt_vec(x_star))
                }
            };
            format!(
                "PositiveGap: inf(f1^2 + f2^2) = {:.6e} > 0 ({how})",
                transcript.value()
            )
        }
        Certificate::Separation {
            orientation,
            certificate,
        } => format!(
            "Separation: {} (lambda={:.6}, restricted min {:.6e})",
            match orientation {
                crate::separation::Orientation::FirstSeparatesSecond =>
                    "surface 1 separates surface 2",
                crate::separation::Orientation::SecondSeparatesFirst =>
                    "surface 2 separates surface 1",
            },
            certificate.lambda,
            certificate.restricted_min
        ),
        Certificate::UnattainedZero { programs } => {
            let obstructions = programs
                .iter()
                .filter(|r| {
                    r.result.value.is_finite() && (!r.result.attained || r.result.value > 0.0)
                })
                .count();
            format!(
                "UnattainedZero: {obstructions} of {} sign-oriented programs obstruct intersection",
                programs.len()
            )
        }
        Certificate::OneSidedEmpty {
            surface_index,
            global_min,
            ..
        } => format!(
            "OneSidedEmpty: surface {surface_index} is empty (global min {global_min:.6e})"
        ),
        Certificate::AffineReduction {
            surface_index,
            basis,
            ..
        } => format!(
            "AffineReduction: surface {surface_index} is a {}-dimensional affine set missed by the other surface",
            basis.ncols()
        ),
    }
}

fn print_verdict_text(doc: &VerdictDoc, index: Option<usize>) {
    let prefix = match (index, &doc.id) {
        (Some(i), Some(id)) => format!("[{i}:{id}] "),
        (Some(i), None) => format!("[{i}] "),
        (None, _) => String::new(),
    };
    println!("{prefix}verdict: {}", tag_str(doc.verdict));
    if let Some(v) = doc.quartic_min {
        println!("{prefix}quartic-min: {v:.6e}");
    }
    println!("{prefix}tolerance: {:.3e}", doc.tolerance);
    if let Some(w) = &doc.witness {
        println!("{prefix}witness: {}", fmt_vec(w));
    }
    if let Some(cert) = &doc.certificate {
        println!("{prefix}certificate: {}", certificate_summary(cert));
    }
    if let Some(rep) = &doc.oracle {
        println!("{prefix}oracle: {}", oracle_summary(rep));
    }
    if let Some(trace) = &doc.trace {
        println!("{prefix}trace:");
        for line in trace {
            println!("{prefix}  - {line}");
        }
    }
}

fn tag_str(tag: VerdictTag) -> &'static str {
    match tag {
        VerdictTag::Intersect => "INTERSECT",
        VerdictTag::Disjoint => "DISJOINT",
        VerdictTag::Undecided => "UNDECIDED",
    }
}

fn oracle_summary(rep: &OracleReport) -> String {
    format!(
        "best-value={:.6e} at {} (samples={}, boundary={}, expanded={})",
        rep.best_value,
        fmt_vec(&rep.best_point),
        rep.n_samples,
        if rep.on_boundary { "yes" } else { "no" },
        if rep.expanded { "yes" } else { "no" }
    )
}

// ------------------------------------------------------------- commands

fn oracle_config(problem: &Problem, cli: &Cli, expand: bool) -> Result<OracleConfig, CliError> {
    let bounds = SampleBox::centered(problem.f1.dim(), DEFAULT_ORACLE_HALF_WIDTH)?;
    Ok(OracleConfig {
        bounds,
        samples: cli.samples.unwrap_or(DEFAULT_ORACLE_SAMPLES),
        seed: cli.seed.unwrap_or(0),
        expand_on_boundary: expand,
    })
}

fn handle_decide(path: &Path, cli: &Cli, env_tol: Option<&str>) -> Result<i32, CliError> {
    let problem = load_problem(path)?;
    let cfg = resolve_tolerances(cli.tol, env_tol, problem.tolerance.as_ref())?;
    let verdict = decide(&problem.f1, &problem.f2, &cfg)?;
    let code = verdict_exit_code(verdict.tag);
    let mut doc = VerdictDoc::new(problem.id.clone(), verdict, cli.trace);
    if cli.oracle_check {
        let ocfg = oracle_config(&problem, cli, true)?;
        doc.oracle = Some(sample_min(&problem.f1, &problem.f2, &ocfg)?);
    }
    match cli.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&doc).unwrap()),
        Format::Text => print_verdict_text(&doc, None),
    }
    Ok(code)
}

#[derive(Serialize)]
#[serde(untagged)]
enum BatchEntry {
    Verdict(Box<VerdictDoc>),
    Error { index: usize, error: String },
}

fn handle_batch(path: &Path, cli: &Cli, env_tol: Option<&str>) -> Result<i32, CliError> {
    let value = read_json(path)?;
    let Value::Array(items) = value else {
        return Err(CliError::data(format!(
            "{}: batch input must be a JSON array of problems",
            path.display()
        )));
    };
    let origin = path.display().to_string();
    let instances: Vec<Result<(Problem, ToleranceConfig), CliError>> = items
        .into_iter()
        .enumerate()
        .map(|(i, item)| {
            let problem = problem_from_value(item, &format!("{origin}[{i}]"))?;
            let cfg = resolve_tolerances(cli.tol, env_tol, problem.tolerance.as_ref())?;
            Ok((problem, cfg))
        })
        .collect();

    // Instances are independent and pure; a small worker pool fills the
    // result slots so the output order always matches the input order.
    let slots: Vec<Mutex<Option<BatchEntry>>> =
        instances.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(instances.len())
        .max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= instances.len() {
                    break;
                }
                let entry = match &instances[i] {
                    Err(e) => BatchEntry::Error {
                        index: i,
                        error: e.message.clone(),
                    },
                    Ok((problem, cfg)) => match decide(&problem.f1, &problem.f2, cfg) {
                        Err(e) => BatchEntry::Error {
                            index: i,
                            error: e.to_string(),
                        },
                        Ok(verdict) => {
                            let mut doc = VerdictDoc::new(problem.id.clone(), verdict, cli.trace);
                            if cli.oracle_check {
                                doc.oracle = oracle_config(problem, cli, true)
                                    .and_then(|ocfg| {
                                        sample_min(&problem.f1, &problem.f2, &ocfg)
                                            .map_err(CliError::from)
                                    })
                                    .ok();
                            }
                            BatchEntry::Verdict(Box::new(doc))
                        }
                    },
                };
                *slots[i].lock().unwrap() = Some(entry);
            });
        }
    });

    let entries: Vec<BatchEntry> = slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("every slot is filled"))
        .collect();

    let mut code = EXIT_INTERSECT;
    for entry in &entries {
        code = code.max(match entry {
            BatchEntry::Verdict(doc) => verdict_exit_code(doc.verdict),
            BatchEntry::Error { .. } => EXIT_DATA,
        });
    }
    match cli.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&entries).unwrap()),
        Format::Text => {
            for (i, entry) in entries.iter().enumerate() {
                match entry {
                    BatchEntry::Verdict(doc) => print_verdict_text(doc, Some(i)),
                    BatchEntry::Error { error, .. } => println!("[{i}] error: {error}"),
                }
            }
        }
    }
    Ok(code)
}

fn handle_oracle(path: &Path, cli: &Cli, env_tol: Option<&str>) -> Result<i32, CliError> {
    let problem = load_problem(path)?;
    // Tolerances do not steer sampling, but a bad --tol is still a usage error.
    resolve_tolerances(cli.tol, env_tol, problem.tolerance.as_ref())?;
    let ocfg = oracle_config(&problem, cli, true)?;
    let report = sample_min(&problem.f1, &problem.f2, &ocfg)?;
    match cli.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
        Format::Text => println!("oracle: {}", oracle_summary(&report)),
    }
    Ok(EXIT_INTERSECT)
}

fn handle_certify(
    problem_path: &Path,
    cert_path: &Path,
    cli: &Cli,
    env_tol: Option<&str>,
) -> Result<i32, CliError> {
    let problem = load_problem(problem_path)?;
    let cfg = resolve_tolerances(cli.tol, env_tol, problem.tolerance.as_ref())?;
    let value = read_json(cert_path)?;
    let origin = cert_path.display().to_string();

    // Either a bare typed certificate or a full verdict document.
    let (certificate, verdict, witness) =
        if value.as_object().is_some_and(|o| o.contains_key("type")) {
            let cert: Certificate = serde_json::from_value(value)
                .map_err(|e| CliError::data(format!("{origin}: {e}")))?;
            (Some(cert), None, None)
        } else {
            let doc: VerdictDoc = serde_json::from_value(value)
                .map_err(|e| CliError::data(format!("{origin}: {e}")))?;
            if let Some(schema) = &doc.schema {
                if schema != CERTIFICATE_SCHEMA {
                    return Err(CliError::data(format!(
                        "{origin}: unsupported schema {schema:?} (expected {CERTIFICATE_SCHEMA:?})"
                    )));
                }
            }
            (doc.certificate, Some(doc.verdict), doc.witness)
        };

    let mut failures: Vec<String> = Vec::new();
    let mut checked = false;
    if let Some(cert) = &certificate {
        checked = true;
        let outcome = validate_certificate(&problem.f1, &problem.f2, cert, &cfg)?;
        failures.extend(outcome.failures);
    }
    if let Some(w) = &witness {
        checked = true;
        if w.len() != problem.f1.dim() {
            failures.push(format!(
                "witness has dimension {} but the problem has dimension {}",
                w.len(),
                problem.f1.dim()
            ));
        } else {
            let smax = problem.f1.magnitude().max(problem.f2.magnitude());
            let band = 10.0 * cfg.decision_rel * 1f64.max(smax);
            for (i, f) in [&problem.f1, &problem.f2].into_iter().enumerate() {
                let r = f.eval(w);
                if r.abs() > band * (1.0 + w.norm_squared()) {
                    failures.push(format!(
                        "witness misses surface {}: residual {r:.3e}",
                        i + 1
                    ));
                }
            }
        }
    }
    if !checked {
        failures.push(match verdict {
            Some(VerdictTag::Intersect) => {
                "INTERSECT document carries no witness to check".to_string()
            }
            _ => "document carries neither a certificate nor a witness".to_string(),
        });
    }

    let valid = failures.is_empty();
    match cli.format {
        Format::Json => {
            let outcome = crate::decision::ValidationOutcome { valid, failures };
            println!("{}", serde_json::to_string_pretty(&outcome).unwrap());
        }
        Format::Text => {
            if valid {
                println!("certificate: VALID");
            } else {
                println!("certificate: INVALID");
                for f in &failures {
                    println!("  - {f}");
                }
            }
        }
    }
    Ok(if valid { EXIT_INTERSECT } else { EXIT_DISJOINT })
}
