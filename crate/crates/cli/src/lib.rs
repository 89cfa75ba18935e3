//! Command-line front end: `heralded <subcommand> [flags]`.
//!
//! Exit codes: 0 on success, 1 on a validation or tolerance failure, 2 on a
//! usage error.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use heralded_core::analytic::g_optimal;
use heralded_core::hamiltonian::Model;
use heralded_core::scans::{
    beyond_rwa_comparison, gaussian_width_scan, linear_grid, mismatch_scan, optimize_pulse_area,
    pulse_area_grid, sweep_detuning, sweep_pulse_area, time_resolved_trace, weighted_resource_scan,
    BeyondRwaParams, Column, MismatchKind, SweepTable,
};
use heralded_core::verify::run_suite;
use serde_json::{json, Value};

pub use config::{load_config, parse_config, resolve, RawConfig, RunConfig, Subcommand};

pub const USAGE: &str = "Usage: heralded <COMMAND> [--n N] [--model rwa|full] [--g G] [--delta D] [--points P] [--config PATH] [--out DIR] [--svg]";

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "HERALDED_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] heralded_core::Error),
    #[error("{0}")]
    Io(String),
    #[error("tolerance failure: {0}")]
    Tolerance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Rwa,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Coupling,
    Detuning,
}

#[derive(Debug, Parser)]
#[command(
    name = "heralded",
    version,
    about = "Heralded W-state transfer from two-level systems to free electrons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Number of arms.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, value_enum)]
    model: Option<ModelArg>,
    /// Pulse area.
    #[arg(long, global = true, allow_negative_numbers = true)]
    g: Option<f64>,
    /// Dimensionless detuning ΔT/2.
    #[arg(long, global = true, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Carrier frequency for the full model, in units of the TLS frequency.
    #[arg(long, global = true)]
    omega: Option<f64>,
    /// Interaction window ω₀T for the full model.
    #[arg(long = "omega-t", global = true)]
    omega_t: Option<f64>,
    #[arg(long, global = true)]
    points: Option<usize>,
    /// JSON config; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Also write an SVG plot of the table.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Heralding probability over the pulse area, numeric vs closed form.
    SweepArea,
    /// Optimal pulse area and maximal heralding probability.
    Optimize,
    /// Heralding probability, fidelity and witness over the common detuning.
    SweepDetuning,
    /// Conditional fidelity under coupling or detuning mismatch.
    Mismatch {
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
    },
    /// Entanglement observables along the three-arm trajectory.
    TimeTrace,
    /// Weighted three-arm inputs over a (theta, phi) grid.
    WeightedScan,
    /// Full Hamiltonian vs RWA and Bloch-Siegert predictions.
    BeyondRwa,
    /// Gaussian envelopes over width and detuning.
    Gaussian,
    /// Run the numeric-vs-closed-form oracle suite.
    Verify,
}

impl Command {
    fn subcommand(&self) -> Subcommand {
        match self {
            Self::SweepArea => Subcommand::SweepArea,
            Self::Optimize => Subcommand::Optimize,
            Self::SweepDetuning => Subcommand::SweepDetuning,
            Self::Mismatch { .. } => Subcommand::Mismatch,
            Self::TimeTrace => Subcommand::TimeTrace,
            Self::WeightedScan => Subcommand::WeightedScan,
            Self::BeyondRwa => Subcommand::BeyondRwa,
            Self::Gaussian => Subcommand::Gaussian,
            Self::Verify => Subcommand::Verify,
        }
    }
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                eprintln!("{USAGE}");
                return 2;
            }
            return 0;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("{USAGE}");
            }
            e.exit_code()
        }
    }
}

fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(WORKERS_ENV) {
        let workers: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&w| w > 0)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "{WORKERS_ENV} must be a positive integer, got \"{value}\""
                ))
            })?;
        builder = builder.num_threads(workers);
    }
    builder
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let sub = cli.command.subcommand();
    let from_file = match &cli.config {
        Some(path) => load_config(path)?,
        None => RawConfig {
            n: Some(3),
            model: Some(Model::Rwa),
            ..Default::default()
        },
    };
    let flags = RawConfig {
        n: cli.n,
        model: cli.model.map(|m| match m {
            ModelArg::Rwa => Model::Rwa,
            ModelArg::Full => Model::Full,
        }),
        g: cli.g,
        delta: cli.delta,
        omega: cli.omega,
        omega_t: cli.omega_t,
        points: cli.points,
        kind: match &cli.command {
            Command::Mismatch {
                kind: Some(KindArg::Coupling),
            } => Some(MismatchKind::Coupling),
            Command::Mismatch {
                kind: Some(KindArg::Detuning),
            } => Some(MismatchKind::Detuning),
            _ => None,
        },
        ..Default::default()
    };
    let config = resolve(&from_file.overlay(flags), sub)?;
    let pool = worker_pool()?;
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", cli.out.display())))?;
    pool.install(|| dispatch(sub, &config, &cli.out, cli.svg))
}

struct Outcome {
    tables: Vec<(String, SweepTable)>,
    extra: Vec<(String, Value)>,
    message: Vec<String>,
    failure: Option<String>,
}

fn dispatch(sub: Subcommand, config: &RunConfig, out: &Path, svg: bool) -> Result<(), CliError> {
    let stem = sub.name().to_string();
    let outcome = compute(sub, config)?;
    let mut outputs = Vec::new();
    for (name, table) in &outcome.tables {
        let csv = output::output_path(out, name, "csv");
        output::write_file(&csv, &output::table_csv(table))?;
        outputs.push(csv.display().to_string());
        if svg {
            let path = output::output_path(out, name, "svg");
            output::write_file(&path, &output::table_svg(table))?;
            outputs.push(path.display().to_string());
        }
    }
    let manifest_path = output::output_path(out, &stem, "json");
    let mut manifest = match serde_json::to_value(config).expect("config serializes") {
        Value::Object(map) => map,
        _ => unreachable!("config is a struct"),
    };
    manifest.insert("subcommand".into(), json!(stem));
    manifest.insert("version".into(), json!(heralded_core::VERSION));
    manifest.insert("timestamp".into(), json!(output::timestamp()));
    manifest.insert("outputs".into(), json!(outputs));
    let scans: serde_json::Map<String, Value> = outcome
        .tables
        .iter()
        .map(|(name, t)| (name.clone(), t.manifest.clone()))
        .collect();
    manifest.insert("scan".into(), Value::Object(scans));
    let summaries: serde_json::Map<String, Value> = outcome
        .tables
        .iter()
        .map(|(name, t)| (name.clone(), output::summary_json(t)))
        .collect();
    manifest.insert("summary".into(), Value::Object(summaries));
    for (k, v) in outcome.extra {
        manifest.insert(k, v);
    }
    let text = serde_json::to_string_pretty(&Value::Object(manifest)).expect("manifest serializes");
    output::write_file(&manifest_path, &(text + "\n"))?;

    let mut stdout = std::io::stdout().lock();
    for line in &outcome.message {
        let _ = writeln!(stdout, "{line}");
    }
    for path in outputs
        .iter()
        .chain(std::iter::once(&manifest_path.display().to_string()))
    {
        let _ = writeln!(stdout, "wrote {path}");
    }
    match outcome.failure {
        Some(reason) => Err(CliError::Tolerance(reason)),
        None => Ok(()),
    }
}

/// First grid point whose `|a - b|` exceeds `tol`.
fn worst_point(table: &SweepTable, a: &str, b: &str, tol: f64) -> Option<String> {
    let (xa, xb) = (table.column(a)?, table.column(b)?);
    let (i, d) = xa
        .iter()
        .zip(xb)
        .map(|(x, y)| (x - y).abs())
        .enumerate()
        .find(|(_, d)| d.is_nan() || *d > tol)?;
    Some(format!(
        "grid point {i} ({} = {}): |{a} - {b}| = {d:e} exceeds {tol:e}",
        table.parameter_name, table.parameter_values[i]
    ))
}

fn compute(sub: Subcommand, c: &RunConfig) -> Result<Outcome, CliError> {
    let mut outcome = Outcome {
        tables: Vec::new(),
        extra: Vec::new(),
        message: Vec::new(),
        failure: None,
    };
    let model = c.scan_model();
    let atomic = c.atomic();
    let points = c.points.unwrap_or(0);
    let grid = || linear_grid(c.grid_min.unwrap_or(0.0), c.grid_max.unwrap_or(1.0), points);
    let name = sub.name().to_string();
    match sub {
        Subcommand::SweepArea => {
            let t = sweep_pulse_area(&atomic, &pulse_area_grid(points), c.delta, model)?;
            outcome
                .message
                .push(format!("max abs_err = {:e}", t.summary["max_abs_err"]));
            if c.model == Model::Rwa {
                outcome.failure = worst_point(&t, "p_numeric", "p_analytic", 1e-6);
            }
            outcome.tables.push((name, t));
        }
        Subcommand::Optimize => {
            let o = optimize_pulse_area(&atomic, model)?;
            outcome
                .message
                .push(format!("g_opt = {}", output::format_value(o.g_opt)));
            outcome
                .message
                .push(format!("P_max = {}", output::format_value(o.p_max)));
            let mut t = SweepTable {
                parameter_name: "n".into(),
                parameter_values: vec![c.n as f64],
                columns: vec![
                    Column {
                        name: "g_opt".into(),
                        values: vec![o.g_opt],
                    },
                    Column {
                        name: "p_max".into(),
                        values: vec![o.p_max],
                    },
                    Column {
                        name: "g_opt_analytic".into(),
                        values: vec![g_optimal(c.n)],
                    },
                    Column {
                        name: "p_max_analytic".into(),
                        values: vec![heralded_core::analytic::p_max(c.n)],
                    },
                ],
                summary: Default::default(),
                manifest: json!({ "scan": "optimize", "n": c.n, "model": model, "evaluations": o.evaluations }),
            };
            t.summary.insert("evaluations".into(), o.evaluations as f64);
            outcome.tables.push((name, t));
        }
        Subcommand::SweepDetuning => {
            let t = sweep_detuning(&atomic, c.g, &grid(), model)?;
            outcome
                .message
                .push(format!("max abs_err = {:e}", t.summary["max_abs_err"]));
            if c.model == Model::Rwa {
                outcome.failure = worst_point(&t, "p_numeric", "p_analytic", 1e-6);
            }
            outcome.tables.push((name, t));
        }
        Subcommand::Mismatch => {
            let kind = c.kind.unwrap_or(MismatchKind::Coupling);
            let t = mismatch_scan(kind, &grid(), &atomic, c.g, c.delta)?;
            outcome.message.push(format!(
                "max fidelity error = {:e}",
                t.summary["max_fidelity_err"]
            ));
            outcome.failure = worst_point(&t, "fidelity_numeric", "fidelity_analytic", 1e-7);
            outcome.tables.push((name, t));
        }
        Subcommand::TimeTrace => {
            let t = time_resolved_trace(c.g, points)?;
            for key in ["yield_peak_t", "uncond_neg_peak_t", "max_cond_neg_err"] {
                outcome.message.push(format!("{key} = {}", t.summary[key]));
            }
            outcome.tables.push((name, t));
        }
        Subcommand::WeightedScan => {
            let angles = linear_grid(0.0, std::f64::consts::FRAC_PI_2, points);
            let t = weighted_resource_scan(&angles, &angles, c.g)?;
            for key in ["max_neg_diff", "max_entropy_diff"] {
                outcome
                    .message
                    .push(format!("{key} = {:e}", t.summary[key]));
            }
            outcome.tables.push((name, t));
        }
        Subcommand::BeyondRwa => {
            let params = BeyondRwaParams {
                n: c.n,
                g: c.g,
                kappa: c.kappa.unwrap_or(heralded_core::analytic::DEFAULT_KAPPA),
                omega_t_min: c.grid_min.unwrap_or(20.0),
                omega_t_max: c.grid_max.unwrap_or(200.0),
                points,
                sideband_cut: c.sideband_cut,
                check_cut: 2 * c.sideband_cut,
            };
            let t = beyond_rwa_comparison(&params)?;
            for key in ["slope_rwa", "slope_bs", "cut_check_diff"] {
                outcome.message.push(format!("{key} = {}", t.summary[key]));
            }
            outcome.tables.push((name, t));
        }
        Subcommand::Gaussian => {
            let deltas = linear_grid(-3.0, 3.0, 25);
            let scan = gaussian_width_scan(&grid(), &deltas, c.g, c.tau_over_t.unwrap_or(1.2))?;
            outcome.message.push(format!(
                "largest decrease = {:e}",
                scan.width.summary["largest_decrease"]
            ));
            outcome.tables.push((name.clone(), scan.width));
            outcome
                .tables
                .push((format!("{name}-detuning"), scan.detuning));
        }
        Subcommand::Verify => {
            let checks = run_suite()?;
            let index: Vec<f64> = (0..checks.len()).map(|i| i as f64).collect();
            let t = SweepTable {
                parameter_name: "check".into(),
                parameter_values: index,
                columns: vec![
                    Column {
                        name: "value".into(),
                        values: checks.iter().map(|c| c.value).collect(),
                    },
                    Column {
                        name: "tolerance".into(),
                        values: checks.iter().map(|c| c.tolerance).collect(),
                    },
                    Column {
                        name: "passed".into(),
                        values: checks
                            .iter()
                            .map(|c| f64::from(u8::from(c.passed)))
                            .collect(),
                    },
                ],
                summary: Default::default(),
                manifest: json!({ "scan": "verify" }),
            };
            for check in &checks {
                outcome.message.push(format!(
                    "{} {}: {:e} (tolerance {:e})",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    check.value,
                    check.tolerance
                ));
            }
            let failed: Vec<&str> = checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.as_str())
                .collect();
            if !failed.is_empty() {
                outcome.failure = Some(format!("failed checks: {}", failed.join(", ")));
            }
            outcome.extra.push((
                "checks".into(),
                serde_json::to_value(&checks).expect("checks serialize"),
            ));
            outcome.tables.push((name, t));
        }
    }
    Ok(outcome)
}
