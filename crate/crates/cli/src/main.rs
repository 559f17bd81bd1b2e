//! `nlcond`: batch front end for the feasibility analysis.
//!
//! Exit codes: 0 pass, 1 mathematical failure, 2 usage or input error.

mod problem;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nlcond_core::laminate::{verify_laminate, Laminate, LaminateDoc};
use nlcond_core::linear::{
    linear_build_laminate, linear_condition_margin, linear_flux, linear_jump, linear_necessary_margin,
};
use nlcond_core::necessity::{balanced_c, build_certificate, default_certificate, necessary_margin, verify_certificate};
use nlcond_core::scan::{scan_region, write_csv, ScanWindow};
use nlcond_core::sufficiency::{build_second_order_laminate, ReachOptions, ReachabilityOracle};
use nlcond_core::{gamma, quartic_minimizer, Error, Tolerances};
use serde::Serialize;
use serde_json::{json, Value};

use problem::{load, read_json, Problem};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Math(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::OutsideC(_)
            | Error::InfeasibleDirection { .. }
            | Error::InfeasibleWitness { .. }
            | Error::BoundaryUnattainable(_)
            | Error::NoPositiveRoot
            | Error::NoConvergence(_) => CliError::Math(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "nlcond", version, about = "Weak-limit feasibility for two-phase p=4 conductivity mixtures")]
struct Cli {
    /// Override a named tolerance, e.g. `--tol membership=1e-9`.
    #[arg(long = "tol", value_name = "KEY=VALUE", global = true)]
    tol: Vec<String>,
    /// Seed for randomized multistart ordering.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SpecArg {
    /// Problem file (JSON), or `-` for stdin.
    spec: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the moment bound `gamma |U|^4 <= U . V`.
    CheckNecessary(SpecArg),
    /// Decide whether `V` is reachable by lamination.
    CheckReachable(SpecArg),
    /// Emit the laminate realizing `Phi(x)` for a point `x` of `C`.
    BuildLaminate {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
    },
    /// Run every oracle on a laminate file.
    VerifyLaminate {
        /// Laminate file (JSON), or `-` for stdin.
        file: PathBuf,
    },
    /// Classify a grid of fluxes.
    Scan {
        #[command(flatten)]
        spec: SpecArg,
        /// `lo1,hi1,lo2,hi2[,lo3,hi3]`; defaults to `[0,6] x [-3,3]` in two dimensions.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        window: Option<Vec<f64>>,
        #[arg(long, default_value_t = 200)]
        resolution: usize,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
        /// Also write the per-cell CSV to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Linear-law reference: feasibility of a direction and its laminate.
    LinearCheck {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        /// Include the laminate in the output.
        #[arg(long)]
        emit_laminate: bool,
    },
    /// Build and verify an explicit moment certificate.
    Certificate {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
    },
}

/// Result of a command: the document to print and whether it passed.
struct Outcome {
    doc: Value,
    pass: bool,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn check_necessary(p: &Problem) -> Result<Outcome, CliError> {
    let tr = p.triplet()?;
    let margin = necessary_margin(&tr, &p.materials);
    let pass = margin >= 0.0;
    Ok(Outcome {
        doc: json!({ "margin": margin, "pass": pass, "gamma": gamma(p.t(), &p.materials) }),
        pass,
    })
}

fn reach_options(p: &Problem) -> ReachOptions {
    ReachOptions::from_tolerances(&p.tol, p.seed)
}

fn check_reachable(p: &Problem) -> Result<Outcome, CliError> {
    let tr = p.triplet()?;
    let oracle = ReachabilityOracle::new(p.t(), tr.gradient(), &p.materials, reach_options(p))?;
    let report = oracle.query(tr.flux())?;
    Ok(Outcome { pass: report.reachable, doc: to_value(&report) })
}

fn build_laminate(p: &Problem, x: Option<&[f64]>) -> Result<Outcome, CliError> {
    let x = p.direction(x)?;
    let u = p.gradient();
    let lam = build_second_order_laminate(p.t(), &u, &x, &p.materials, &p.tol).map_err(|e| match e {
        Error::OutsideC(v) => CliError::Math(format!("x lies outside C: psi(x) = {v:e}")),
        other => other.into(),
    })?;
    Ok(Outcome { doc: to_value(&LaminateDoc::from(&lam)), pass: true })
}

fn verify(file: &Path, tol: &Tolerances) -> Result<Outcome, CliError> {
    let text = read_json(file)?;
    let doc: LaminateDoc =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("invalid laminate file: {e}")))?;
    let lam = Laminate::try_from(doc)?;
    let report = verify_laminate(&lam, tol);
    Ok(Outcome { pass: report.pass, doc: to_value(&report) })
}

fn scan_window(p: &Problem, raw: Option<&[f64]>) -> Result<ScanWindow, CliError> {
    let n = p.dim();
    let raw = match raw {
        Some(r) => r.to_vec(),
        None if n == 2 => vec![0.0, 6.0, -3.0, 3.0],
        None => return Err(CliError::Input("--window is required outside two dimensions".into())),
    };
    if raw.len() != 2 * n {
        return Err(CliError::Input(format!("--window needs {} values, got {}", 2 * n, raw.len())));
    }
    let lo = raw.iter().step_by(2).copied().collect();
    let hi = raw.iter().skip(1).step_by(2).copied().collect();
    Ok(ScanWindow::new(lo, hi)?)
}

fn scan(
    p: &Problem,
    window: Option<&[f64]>,
    resolution: usize,
    jobs: Option<usize>,
    csv: Option<&PathBuf>,
    format: Format,
) -> Result<Outcome, CliError> {
    let window = scan_window(p, window)?;
    if jobs == Some(0) {
        return Err(CliError::Input("--jobs must be positive".into()));
    }
    let report = scan_region(p.t(), &p.gradient(), &p.materials, &window, resolution, jobs, &reach_options(p), &p.tol)?;
    if let Some(path) = csv {
        let file = File::create(path).map_err(|e| CliError::Input(format!("creating {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        write_csv(&report, &mut w)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::Input(format!("writing {}: {e}", path.display())))?;
    }
    if format == Format::Csv {
        let mut buf = Vec::new();
        write_csv(&report, &mut buf).expect("in-memory write");
        return Ok(Outcome { doc: Value::String(String::from_utf8(buf).expect("ascii")), pass: true });
    }
    let doc = json!({
        "t": report.t,
        "U": report.gradient,
        "window": report.window,
        "resolution": report.resolution,
        "summary": report.summary,
    });
    Ok(Outcome { doc, pass: true })
}

fn linear_check(p: &Problem, x: Option<&[f64]>, emit: bool) -> Result<Outcome, CliError> {
    let x = p.direction(x)?;
    let (t, u, m) = (p.t(), p.gradient(), &p.materials);
    let margin = linear_condition_margin(t, &u, &x, m);
    let v = linear_flux(t, &u, &x, m);
    let scale = u.norm_squared().max(x.norm_squared()).max(f64::MIN_POSITIVE);
    let pass = margin >= -p.tol.root * scale;
    let mut doc = json!({
        "condition_margin": margin,
        "necessary_margin": linear_necessary_margin(t, &u, &v, m),
        "jump": linear_jump(t, &u, &x, m),
        "V": v.as_slice(),
        "pass": pass,
    });
    if let Some(given) = &p.spec.v {
        let given = p.vector("V", given)?;
        doc["given_necessary_margin"] = json!(linear_necessary_margin(t, &u, &given, m));
    }
    if emit && pass {
        let lam = linear_build_laminate(t, &u, &x, m, p.tol.root)?;
        doc["laminate"] = to_value(&LaminateDoc::from(&lam));
    }
    Ok(Outcome { doc, pass })
}

fn certificate(p: &Problem, a: Option<&[f64]>, c: Option<f64>) -> Result<Outcome, CliError> {
    let tr = p.triplet()?;
    let a = match a.or(p.spec.a.as_deref()) {
        Some(a) => Some(p.vector("a", a)?),
        None => None,
    };
    let c = c.or(p.spec.c);
    let cert = match (a, c) {
        (None, None) => default_certificate(&tr, &p.materials, &p.tol)?,
        (a, c) => {
            let a = a.unwrap_or_else(|| quartic_minimizer(p.t(), tr.gradient(), &p.materials).into_vector());
            let c = c.unwrap_or_else(|| balanced_c(&tr, &a, &p.materials));
            build_certificate(&tr, &p.materials, &a, c, &p.tol)?
        }
    };
    let report = verify_certificate(&cert, &tr, &p.materials, &p.tol);
    Ok(Outcome {
        pass: report.pass,
        doc: json!({ "certificate": to_value(&cert), "report": to_value(&report) }),
    })
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let load_spec = |s: &SpecArg| load(&s.spec, &cli.tol, cli.seed);
    match &cli.command {
        Command::CheckNecessary(s) => check_necessary(&load_spec(s)?),
        Command::CheckReachable(s) => check_reachable(&load_spec(s)?),
        Command::BuildLaminate { spec, x } => build_laminate(&load_spec(spec)?, x.as_deref()),
        Command::VerifyLaminate { file } => {
            let mut tol = Tolerances::default();
            for o in &cli.tol {
                tol.apply_override(o)?;
            }
            verify(file, &tol)
        }
        Command::Scan { spec, window, resolution, jobs, csv } => scan(
            &load_spec(spec)?,
            window.as_deref(),
            *resolution,
            *jobs,
            csv.as_ref(),
            cli.format,
        ),
        Command::LinearCheck { spec, x, emit_laminate } => linear_check(&load_spec(spec)?, x.as_deref(), *emit_laminate),
        Command::Certificate { spec, a, c } => certificate(&load_spec(spec)?, a.as_deref(), *c),
    }
}

/// `key,value` rows for the scalar leaves of a document.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn emit(doc: &Value, format: Format) {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match (doc, format) {
        (Value::String(s), Format::Csv) => {
            let _ = out.write_all(s.as_bytes());
        }
        (_, Format::Csv) => {
            let mut rows = Vec::new();
            flatten("", doc, &mut rows);
            let _ = writeln!(out, "key,value");
            for (k, v) in rows {
                let _ = writeln!(out, "{k},{v}");
            }
        }
        (_, Format::Json) => {
            // serde_json maps are ordered by key
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(doc).expect("serializable"));
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            emit(&outcome.doc, cli.format);
            ExitCode::from(if outcome.pass { 0 } else { 1 })
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Math(msg)) => {
            eprintln!("failed: {msg}");
            ExitCode::from(1)
        }
    }
}
