//! The `qmac` command-line tool.
//!
//! Exit codes: 0 success, 2 invalid input, 3 dimension cap exceeded,
//! 4 property violation, 1 I/O failure.

mod files;
mod plot;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use files::{
    builtin_channel, frontier_csv, load_channel, load_region, load_state, matrix_from_json,
    matrix_to_json, sha256_hex, write_atomic, ChannelSpecFile, JsonMatrix, OutputHash, RunManifest,
};
pub use plot::render_svg;

use crate::channels::QuantumChannel;
use crate::error::Error;
use crate::information::{
    channel_coherent_information, coherent_information, conditional_coherent_information, entropy,
    fidelity, mutual_information, run_property_suite, trace_distance, Direction, SuiteConfig,
};
use crate::regions::{
    analytic_erasure_region, analytic_phase_flip_region, regularized_region, OptimizerConfig,
    RateRegion, RegionKind,
};
use crate::states::split_cqq;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Cap(String),
    #[error("{0}")]
    Violation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Cap(_) => 3,
            CliError::Violation(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::CapExceeded { .. } => CliError::Cap(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qmac",
    version,
    about = "Capacity regions of two-sender quantum channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize the CQ or QQ region of a channel.
    Region(RegionArgs),
    /// Run the randomized inequality suite.
    Props(PropsArgs),
    /// Draw a region (and optionally an analytic oracle) as SVG.
    Plot(PlotArgs),
    /// Evaluate one information quantity.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    Cq,
    Qq,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq)]
pub enum Builtin {
    Erasure,
    #[value(name = "phase_flip", alias = "phase-flip")]
    PhaseFlip,
}

impl Builtin {
    fn name(&self) -> &'static str {
        match self {
            Builtin::Erasure => "erasure",
            Builtin::PhaseFlip => "phase_flip",
        }
    }
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    /// Channel spec JSON file.
    #[arg(long, conflicts_with = "builtin")]
    pub spec: Option<PathBuf>,
    /// Named channel.
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    /// Dimension of the erasure channel.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Flip probability of the phase-flip channel.
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
}

impl ChannelArgs {
    fn load(&self) -> Result<(QuantumChannel, String), CliError> {
        match (&self.spec, self.builtin) {
            (Some(path), _) => Ok((load_channel(path)?, path.display().to_string())),
            (None, Some(b)) => {
                let ch = builtin_channel(b.name(), Some(self.d), Some(self.p))?;
                let id = match b {
                    Builtin::Erasure => format!("erasure(d={})", self.d),
                    Builtin::PhaseFlip => format!("phase_flip(p={})", self.p),
                };
                Ok((ch, id))
            }
            (None, None) => Err(CliError::Validation(
                "a channel is required: pass --spec FILE or --builtin NAME".into(),
            )),
        }
    }

    fn echo(&self) -> serde_json::Value {
        json!({
            "spec": self.spec.as_ref().map(|p| p.display().to_string()),
            "builtin": self.builtin.map(|b| b.name()),
            "d": self.d,
            "p": self.p,
        })
    }
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(value_enum)]
    pub kind: Kind,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Number of channel uses optimized jointly.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub simplex_tolerance: f64,
    /// CQ ensemble size (default: min(|A'|,|C|)^2 + 1).
    #[arg(long)]
    pub ensemble_size: Option<usize>,
    #[arg(long, default_value_t = 21)]
    pub weights: usize,
    #[arg(long, default_value_t = 64)]
    pub dim_cap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Region JSON; the frontier CSV and manifest are written beside it
    /// [default: <kind>_region.json]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PropsArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2, 3, 4])]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "props_report.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Region JSON written by `region`.
    #[arg(long)]
    pub region: PathBuf,
    /// Overlay the analytic region of a named channel.
    #[arg(long, value_enum)]
    pub oracle: Option<Builtin>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Quantity {
    Entropy,
    Mi,
    Ic,
    CondIc,
    Fidelity,
    TraceDistance,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(value_enum)]
    pub quantity: Quantity,
    /// State JSON: a matrix, or {"matrix", "dims", "labels"}.
    #[arg(long)]
    pub state: PathBuf,
    /// Second state (fidelity, trace_distance).
    #[arg(long)]
    pub other: Option<PathBuf>,
    /// Channel spec; with `ic`, evaluates the channel's coherent information
    /// at the given input state.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    /// Optional JSON result file (plus manifest).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Region(a) => cmd_region(&a),
        Command::Props(a) => cmd_props(&a),
        Command::Plot(a) => cmd_plot(&a),
        Command::Eval(a) => cmd_eval(&a),
    }
}

fn finish(mut manifest: RunManifest, primary: &Path, started: Instant) -> Result<(), CliError> {
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    manifest.write_beside(primary)?;
    Ok(())
}

pub fn cmd_region(a: &RegionArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let (ch, id) = a.channel.load()?;
    let cfg = OptimizerConfig {
        restarts: a.restarts,
        max_iters: a.max_iters,
        simplex_tolerance: a.simplex_tolerance,
        ensemble_size: a.ensemble_size,
        seed: a.seed,
        dim_cap: a.dim_cap,
        weights: a.weights,
    };
    cfg.validate()?;
    let kind = match a.kind {
        Kind::Cq => RegionKind::Cq,
        Kind::Qq => RegionKind::Qq,
    };
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}_region.json", kind.as_str())));
    let mut region = regularized_region(&ch, kind, a.k, &cfg)?;
    region.metadata.channel = id;
    let mut manifest = RunManifest::new(
        "region",
        json!({"kind": kind.as_str(), "channel": a.channel.echo(), "k": a.k, "optimizer": cfg}),
        Some(a.seed),
    );
    let h = write_atomic(&out, &files::to_json_bytes(&region))?;
    manifest.record(&out, h);
    let csv_path = files::sibling(&out, "csv");
    let h = write_atomic(&csv_path, frontier_csv(&region).as_bytes())?;
    manifest.record(&csv_path, h);
    println!(
        "{} region, k = {}: {} generators, {} frontier points, max sum rate {:.6}",
        kind.as_str(),
        region.k,
        region.generators.len(),
        region.frontier.len(),
        region.max_sum_rate()
    );
    finish(manifest, &out, started)
}

pub fn cmd_props(a: &PropsArgs) -> Result<(), CliError> {
    let started = Instant::now();
    if a.trials == 0 {
        return Err(CliError::Validation("--trials must be >= 1".into()));
    }
    if a.dims.is_empty() || a.dims.contains(&0) {
        return Err(CliError::Validation("--dims must be positive".into()));
    }
    let cfg = SuiteConfig {
        trials: a.trials,
        dims: a.dims.clone(),
        seed: a.seed,
    };
    let reports = run_property_suite(&cfg);
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.check.as_str())
        .collect();
    let doc = json!({
        "trials": a.trials,
        "dims": a.dims,
        "seed": a.seed,
        "passed": failed.is_empty(),
        "checks": reports,
    });
    let mut manifest = RunManifest::new(
        "props",
        json!({"trials": a.trials, "dims": a.dims}),
        Some(a.seed),
    );
    let h = write_atomic(&a.out, &files::to_json_bytes(&doc))?;
    manifest.record(&a.out, h);
    for r in &reports {
        println!(
            "{:<36} {} violations {:>4} / {}  worst {:.3e}",
            r.check,
            if r.passed() { "ok  " } else { "FAIL" },
            r.violations,
            r.trials,
            r.worst_violation
        );
    }
    finish(manifest, &a.out, started)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violation(format!(
            "violated: {}",
            failed.join(", ")
        )))
    }
}

pub fn cmd_plot(a: &PlotArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let region = load_region(&a.region)?;
    let oracle: Option<(String, RateRegion)> = match a.oracle {
        None => None,
        Some(Builtin::Erasure) => Some((
            format!("analytic erasure (d = {})", a.d),
            analytic_erasure_region(a.d, 101)?,
        )),
        Some(Builtin::PhaseFlip) => Some((
            format!("analytic phase flip (p = {})", a.p),
            analytic_phase_flip_region(a.p)?,
        )),
    };
    let title = if region.metadata.channel.is_empty() {
        "rate region".to_string()
    } else {
        format!(
            "{} region of {}",
            region.metadata.kind, region.metadata.channel
        )
    };
    let svg = render_svg(
        &region,
        oracle.as_ref().map(|(n, r)| (n.as_str(), r)),
        &title,
    );
    let mut manifest = RunManifest::new(
        "plot",
        json!({"region": a.region.display().to_string(), "oracle": a.oracle.map(|b| b.name()), "d": a.d, "p": a.p}),
        None,
    );
    manifest.record(
        &a.region,
        sha256_hex(&std::fs::read(&a.region).unwrap_or_default()),
    );
    let h = write_atomic(&a.out, svg.as_bytes())?;
    manifest.record(&a.out, h);
    finish(manifest, &a.out, started)
}

pub fn eval_quantity(a: &EvalArgs) -> Result<f64, CliError> {
    let rho = load_state(&a.state)?;
    let other = || -> Result<_, CliError> {
        let path = a
            .other
            .as_ref()
            .ok_or_else(|| CliError::Validation("--other is required for this quantity".into()))?;
        load_state(path)
    };
    Ok(match a.quantity {
        Quantity::Entropy => entropy(&rho)?.0,
        Quantity::Mi => mutual_information(&rho)?.0,
        Quantity::Ic => match &a.channel {
            Some(path) => {
                let ch = load_channel(path)?;
                let rho = rho.with_layout(ch.input_layout().clone())?;
                channel_coherent_information(&rho, &ch)?.0
            }
            None => coherent_information(&rho)?.0,
        },
        Quantity::CondIc => {
            let cqq = split_cqq(&rho)?;
            conditional_coherent_information(&cqq, Direction::FirstToSecond)?.0
        }
        Quantity::Fidelity => fidelity(&rho, &other()?)?,
        Quantity::TraceDistance => trace_distance(&rho, &other()?)?,
    })
}

pub fn cmd_eval(a: &EvalArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let value = eval_quantity(a)?;
    println!("{value:.12}");
    if let Some(out) = &a.out {
        let name = a
            .quantity
            .to_possible_value()
            .expect("named")
            .get_name()
            .to_string();
        let doc = json!({"quantity": name, "value": value});
        let mut manifest = RunManifest::new(
            "eval",
            json!({
                "quantity": name,
                "state": a.state.display().to_string(),
                "other": a.other.as_ref().map(|p| p.display().to_string()),
                "channel": a.channel.as_ref().map(|p| p.display().to_string()),
            }),
            None,
        );
        let h = write_atomic(out, &files::to_json_bytes(&doc))?;
        manifest.record(out, h);
        finish(manifest, out, started)?;
    }
    Ok(())
}
