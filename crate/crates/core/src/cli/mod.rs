//! Command-line front end: `spectrum`, `check`, `classical` and
//! `pathintegral`, each writing a JSON report or a CSV table.
//!
//! Exit codes: 0 success, 1 tolerance failure, 2 configuration error,
//! 3 non-convergence, 4 chart-margin exit.

pub mod commands;
pub mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::RotorError;
use crate::pathintegral::Prescription;
use commands::CommandResult;
use config::{FileConfig, Format, SpectrumMethod, StateChart, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_CHART_MARGIN: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "rotor", version, about = "Quantum and classical rotor on the (D-1)-sphere")]
pub struct Cli {
    /// TOML (or .json) config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Suppress the summary on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lowest rotor levels on spectral grids against the closed form.
    Spectrum(SpectrumArgs),
    /// Run an invariant suite.
    Check(CheckArgs),
    /// Reduced-chart flow against the embedded constrained flow.
    Classical(ClassicalArgs),
    /// Effective potential of polar time slicing in the plane.
    Pathintegral(PathIntegralArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Spectrum(_) => "spectrum",
            Self::Check(_) => "check",
            Self::Classical(_) => "classical",
            Self::Pathintegral(_) => "pathintegral",
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Embedding dimension D.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub levels: Option<usize>,
    /// Comma-separated grid resolutions.
    #[arg(long, value_delimiter = ',')]
    pub res: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub method: Option<SpectrumMethod>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub e0_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// chart-equivalence, hermiticity, angular-momentum or dirac-brackets.
    pub suite: Option<String>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub max_degree: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ClassicalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub chart: Option<StateChart>,
    /// Comma-separated initial coordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q0: Option<Vec<f64>>,
    /// Comma-separated initial momenta.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p0: Option<Vec<f64>>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub conservation_tol: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Directory for reduced.csv and embedded.csv.
    #[arg(long, value_name = "DIR")]
    pub trajectories: Option<String>,
}

#[derive(Debug, Args)]
pub struct PathIntegralArgs {
    #[arg(long)]
    pub hbar: Option<f64>,
    /// exact, naive or corrected.
    #[arg(long, value_parser = parse_prescription)]
    pub prescription: Option<Prescription>,
    /// Comma-separated angular modes.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Comma-separated time steps, geometric, at least three.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub r_step: Option<f64>,
    #[arg(long)]
    pub grid_nodes: Option<usize>,
    #[arg(long)]
    pub grid_r_min: Option<f64>,
    #[arg(long)]
    pub grid_r_max: Option<f64>,
    #[arg(long)]
    pub fit_tol: Option<f64>,
    #[arg(long)]
    pub cancel_tol: Option<f64>,
}

fn parse_prescription(s: &str) -> std::result::Result<Prescription, String> {
    serde_json::from_value(Value::String(s.into())).map_err(|_| format!("unknown prescription '{s}'"))
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn apply_model(c: &mut FileConfig, m: &ModelArgs) {
    set(&mut c.model.dim, m.dim);
    set(&mut c.model.radius, m.radius);
    set(&mut c.model.hbar, m.hbar);
}

/// File values overridden by flags.
pub fn resolve(cli: &Cli) -> crate::Result<FileConfig> {
    let mut c = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    c.seed = Some(cli.seed.or(c.seed).unwrap_or(DEFAULT_SEED));
    c.format = Some(cli.format.or(c.format).unwrap_or_default());
    if let Some(out) = &cli.out {
        c.out = Some(out.display().to_string());
    }
    match &cli.command {
        Command::Spectrum(a) => {
            apply_model(&mut c, &a.model);
            let s = &mut c.spectrum;
            set(&mut s.levels, a.levels);
            set(&mut s.res, a.res.clone());
            set(&mut s.method, a.method);
            set(&mut s.rel_tol, a.rel_tol);
            set(&mut s.e0_tol, a.e0_tol);
        }
        Command::Check(a) => {
            apply_model(&mut c, &a.model);
            let s = &mut c.check;
            if a.suite.is_some() {
                s.suite = a.suite.clone();
            }
            set(&mut s.samples, a.samples);
            set(&mut s.points, a.points);
            set(&mut s.resolution, a.resolution);
            set(&mut s.max_degree, a.max_degree);
            if a.tol.is_some() {
                s.tolerance = a.tol;
            }
        }
        Command::Classical(a) => {
            apply_model(&mut c, &a.model);
            let s = &mut c.classical;
            set(&mut s.chart, a.chart);
            set(&mut s.q0, a.q0.clone());
            set(&mut s.p0, a.p0.clone());
            set(&mut s.t_end, a.t_end);
            set(&mut s.dt, a.dt);
            set(&mut s.margin, a.margin);
            set(&mut s.tolerance, a.tol);
            set(&mut s.conservation_tol, a.conservation_tol);
            set(&mut s.stride, a.stride);
            if a.trajectories.is_some() {
                s.trajectory_dir = a.trajectories.clone();
            }
            s.resolve(c.model.dim.max(2));
        }
        Command::Pathintegral(a) => {
            let s = &mut c.pathintegral;
            set(&mut s.hbar, a.hbar);
            set(&mut s.prescription, a.prescription);
            set(&mut s.m, a.m.clone());
            set(&mut s.eps, a.eps.clone());
            set(&mut s.r_min, a.r_min);
            set(&mut s.r_max, a.r_max);
            set(&mut s.r_step, a.r_step);
            set(&mut s.grid.nodes, a.grid_nodes);
            set(&mut s.grid.r_min, a.grid_r_min);
            set(&mut s.grid.r_max, a.grid_r_max);
            set(&mut s.fit_tol, a.fit_tol);
            set(&mut s.cancel_tol, a.cancel_tol);
        }
    }
    Ok(c)
}

/// The part of the resolved config a command depends on, in the config
/// file layout so it can be fed back through `--config`.
pub fn embedded_config(c: &FileConfig, command: &str) -> Value {
    let section = match command {
        "spectrum" => json!(c.spectrum),
        "check" => json!(c.check),
        "classical" => json!(c.classical),
        _ => json!(c.pathintegral),
    };
    let mut v = json!({ "seed": c.seed, "format": c.format });
    if command != "pathintegral" {
        v["model"] = json!(c.model);
    }
    v[command] = section;
    v
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
    /// Exit time for chart-margin failures.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
}

/// Machine-readable outcome of a command. Contains no timestamps or host
/// data, so identical configs give byte-identical reports.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool_version: String,
    pub command: String,
    pub resolved_config: Value,
    pub results: Value,
    pub max_deviations: BTreeMap<String, f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn exit_code(e: &RotorError) -> i32 {
    match e {
        RotorError::NonConvergence { .. }
        | RotorError::QuadratureNonConvergence { .. }
        | RotorError::StepSize { .. } => EXIT_NONCONVERGENCE,
        RotorError::ChartMargin { .. } => EXIT_CHART_MARGIN,
        _ => EXIT_CONFIG,
    }
}

fn error_kind(e: &RotorError) -> &'static str {
    match e {
        RotorError::InvalidParams(_) => "invalid-params",
        RotorError::ChartDomain { .. } => "chart-domain",
        RotorError::SingularPoint { .. } => "singular-point",
        RotorError::PoleSingularity { .. } => "pole-singularity",
        RotorError::IndexOutOfRange { .. } => "index-out-of-range",
        RotorError::DimensionMismatch { .. } => "dimension-mismatch",
        RotorError::UnsupportedDimension(_) => "unsupported-dimension",
        RotorError::Config(_) => "config",
        RotorError::NonConvergence { .. } => "non-convergence",
        RotorError::ChartMargin { .. } => "chart-margin",
        RotorError::StepSize { .. } => "step-size",
        RotorError::Precondition(_) => "precondition",
        RotorError::KernelWidth { .. } => "kernel-width",
        RotorError::QuadratureNonConvergence { .. } => "quadrature-non-convergence",
    }
}

/// Everything a run produces, before any I/O.
#[derive(Debug, Clone)]
pub struct Execution {
    pub code: i32,
    /// Report JSON or CSV table; empty for CSV runs that failed.
    pub payload: String,
    pub report: Option<Report>,
    /// Lines for stderr.
    pub messages: Vec<String>,
    pub out: Option<PathBuf>,
    pub files: Vec<(PathBuf, String)>,
    pub quiet: bool,
}

/// Run a parsed command line without touching stdout, stderr or the
/// output files (config files are still read).
pub fn execute(cli: &Cli) -> Execution {
    let command = cli.command.name();
    let mut exec = Execution {
        code: EXIT_OK,
        payload: String::new(),
        report: None,
        messages: Vec::new(),
        out: cli.out.clone(),
        files: Vec::new(),
        quiet: cli.quiet,
    };
    let cfg = match resolve(cli) {
        Ok(c) => c,
        Err(e) => {
            exec.code = exit_code(&e);
            exec.messages.push(format!("error: {e}"));
            return exec;
        }
    };
    exec.out = cfg.out.as_ref().map(PathBuf::from);
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let format = cfg.format.unwrap_or_default();
    let outcome: crate::Result<CommandResult> = match command {
        "spectrum" => commands::spectrum(&cfg.model, &cfg.spectrum, seed),
        "check" => commands::check(&cfg.model, &cfg.check, seed),
        "classical" => commands::classical(&cfg.model, &cfg.classical),
        _ => commands::pathintegral(&cfg.pathintegral),
    };
    let mut report = Report {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        resolved_config: embedded_config(&cfg, command),
        results: Value::Null,
        max_deviations: BTreeMap::new(),
        pass: false,
        error: None,
    };
    match outcome {
        Ok(r) => {
            exec.code = if r.pass { EXIT_OK } else { EXIT_TOLERANCE };
            exec.messages.push(r.summary);
            report.results = r.results;
            report.max_deviations = r.max_deviations;
            report.pass = r.pass;
            exec.files = r.files;
            exec.payload = match format {
                Format::Json => report.to_json(),
                Format::Csv => r.csv,
            };
        }
        Err(e) => {
            exec.code = exit_code(&e);
            exec.messages.push(format!("error: {e}"));
            let time = match e {
                RotorError::ChartMargin { time } | RotorError::StepSize { time } => Some(time),
                _ => None,
            };
            report.error = Some(ErrorReport { kind: error_kind(&e).into(), message: e.to_string(), time });
            if format == Format::Json {
                exec.payload = report.to_json();
            }
        }
    }
    exec.report = Some(report);
    exec
}

/// Parse `args`, run, write outputs and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let exec = execute(&cli);
    let mut code = exec.code;
    let mut write = |path: &PathBuf, text: &str| {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            let _ = std::fs::create_dir_all(dir);
        }
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("error: cannot write {}: {e}", path.display());
            code = EXIT_CONFIG;
        }
    };
    for (path, text) in &exec.files {
        write(path, text);
    }
    match &exec.out {
        Some(path) if !exec.payload.is_empty() => write(path, &exec.payload),
        _ => print!("{}", exec.payload),
    }
    for m in &exec.messages {
        if !exec.quiet || m.starts_with("error") {
            eprintln!("{m}");
        }
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Execution {
        let cli = Cli::try_parse_from(std::iter::once("rotor").chain(args.iter().copied())).unwrap();
        execute(&cli)
    }

    #[test]
    fn circle_spectrum() {
        let e = run(&["spectrum", "--dim", "2", "--levels", "3", "--res", "16"]);
        assert_eq!(e.code, EXIT_OK, "{:?}", e.messages);
        let r = e.report.unwrap();
        let clusters = &r.results["runs"][0]["clusters"];
        assert_eq!(clusters.as_array().unwrap().len(), 3);
        assert_eq!(clusters[1][1], 2);
        assert!((clusters[1][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
        assert!((clusters[2][0].as_f64().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unsupported_dimension_is_a_config_error() {
        let e = run(&["spectrum", "--dim", "5", "--res", "8"]);
        assert_eq!(e.code, EXIT_CONFIG);
        assert!(e.messages[0].contains("unsupported dimension"));
        assert_eq!(e.report.unwrap().error.unwrap().kind, "unsupported-dimension");
    }

    #[test]
    fn unknown_suite_is_a_config_error() {
        let e = run(&["check", "no-such-suite"]);
        assert_eq!(e.code, EXIT_CONFIG);
        let e = run(&["check"]);
        assert_eq!(e.code, EXIT_CONFIG);
    }

    #[test]
    fn flags_override_and_embed_in_the_report() {
        let e = run(&["--seed", "9", "check", "chart-equivalence", "--samples", "5", "--points", "5"]);
        assert_eq!(e.code, EXIT_OK);
        let cfg = &e.report.unwrap().resolved_config;
        assert_eq!(cfg["seed"], 9);
        assert_eq!(cfg["check"]["samples"], 5);
        assert_eq!(cfg["check"]["suite"], "chart-equivalence");
        assert!(cfg.get("pathintegral").is_none());
    }

    #[test]
    fn tolerance_failure_exits_one() {
        let e = run(&["check", "angular-momentum", "--samples", "3", "--points", "3", "--tol", "1e-30"]);
        assert_eq!(e.code, EXIT_TOLERANCE);
        assert!(!e.report.unwrap().pass);
    }

    #[test]
    fn chart_margin_exits_four_with_time() {
        let e = run(&["classical", "--q0", "0.9,0", "--p0", "1,0", "--t-end", "1", "--dt", "0.01"]);
        assert_eq!(e.code, EXIT_CHART_MARGIN);
        let err = e.report.unwrap().error.unwrap();
        assert_eq!(err.kind, "chart-margin");
        assert!(err.time.unwrap() > 0.0 && err.time.unwrap() < 1.0);
    }

    #[test]
    fn resting_particle_stays_put() {
        let e = run(&["classical", "--q0", "0.2,-0.1", "--p0", "0,0", "--t-end", "0.5", "--dt", "0.01"]);
        assert_eq!(e.code, EXIT_OK, "{:?}", e.messages);
        let r = e.report.unwrap();
        assert!(r.max_deviations["reduced_vs_oracle"] < 1e-15);
        assert!(r.results["reduced_vs_great_circle"].as_f64().unwrap() < 1e-15);
    }

    #[test]
    fn wide_kernel_is_a_config_error() {
        let e = run(&["pathintegral", "--eps", "4,2,1"]);
        assert_eq!(e.code, EXIT_CONFIG);
        assert!(e.messages[0].contains("kernel width"), "{:?}", e.messages);
    }

    #[test]
    fn csv_format() {
        let e = run(&["--format", "csv", "check", "dirac-brackets", "--samples", "4", "--points", "2"]);
        assert_eq!(e.code, EXIT_OK);
        assert!(e.payload.starts_with("check,deviation,tolerance,expect,pass\n"));
        assert_eq!(e.payload.lines().count(), 6);
    }

    #[test]
    fn bad_flags_do_not_parse() {
        assert!(Cli::try_parse_from(["rotor", "spectrum", "--levls", "3"]).is_err());
        assert!(Cli::try_parse_from(["rotor", "pathintegral", "--prescription", "sideways"]).is_err());
        assert!(Cli::try_parse_from(["rotor", "spectrum", "--res", "4,x"]).is_err());
    }
}
