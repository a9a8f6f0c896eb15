//! The `fluxknot` command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3
//! numerical-domain error. Machine output goes to files, human summaries
//! to stdout. `FLUXKNOT_THREADS` caps the worker count; results do not
//! depend on it.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{RatioSetting, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(crate::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(e) => write!(f, "numerical-domain error: {e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Numeric(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "fluxknot", version, about = "Knotted flux-tube geometry, knot energy and reduced dynamo solutions")]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file for machine-readable results.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Tabular output format.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    pub format: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frenet frames, curvature, torsion and Frenet-Serret residuals along a curve.
    Frenet(FrenetArgs),
    /// Tube metric over a sample grid, or the printed-matrix report.
    Metric(MetricArgs),
    /// Rotation coefficients over a sample grid, or the printed-formula check.
    Rrc(RrcArgs),
    /// Knot energy, surface volumes and mean-field energy.
    Energy(EnergyArgs),
    /// Radius profile and poloidal field of the reduced dynamo.
    Dynamo(DynamoArgs),
    /// Run every discrepancy report on the default helical scenario.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CurveArgs {
    /// Curve preset: line, circle, helix or torus_knot.
    #[arg(long)]
    pub curve: Option<String>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub major: Option<f64>,
    #[arg(long)]
    pub minor: Option<f64>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Panels of the arclength table.
    #[arg(long)]
    pub table_samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ShapeArgs {
    /// Shape preset: constant, linear_chi or separable.
    #[arg(long)]
    pub shape: Option<String>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub chi_rate: Option<f64>,
    #[arg(long = "shape-r0")]
    pub shape_r0: Option<f64>,
    #[arg(long)]
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TubeArgs {
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub linking: Option<i64>,
    #[arg(long)]
    pub kappa0: Option<f64>,
    #[arg(long)]
    pub tau0: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub n_s: Option<usize>,
    #[arg(long)]
    pub n_chi: Option<usize>,
    #[arg(long)]
    pub n_phi: Option<usize>,
    #[arg(long)]
    pub chi_min: Option<f64>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct FrenetArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    /// Output rows, at cell midpoints of [0, L].
    #[arg(long)]
    pub n_points: Option<usize>,
    /// Arclength step of the frame stencils.
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct MetricArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub tube: TubeArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Emit the printed-matrix discrepancy report (JSON) instead of the grid.
    #[arg(long)]
    pub report: bool,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct RrcArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub tube: TubeArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Emit the printed-formula vs direct-differentiation report (JSON).
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub tube: TubeArgs,
    /// Quadrature rule: simpson or gauss_legendre.
    #[arg(long)]
    pub rule: Option<String>,
    #[arg(long)]
    pub n_s: Option<usize>,
    #[arg(long)]
    pub n_chi: Option<usize>,
    #[arg(long)]
    pub n_phi: Option<usize>,
    /// Field ratio: a number or `unstretched`.
    #[arg(long)]
    pub b: Option<String>,
    /// Comma-separated surface levels in [0, 1].
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    #[arg(long)]
    pub b3_sq_mean: Option<f64>,
    /// as_printed or one_third.
    #[arg(long)]
    pub epsilon_mode: Option<String>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct DynamoArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub v1: Option<f64>,
    #[arg(long)]
    pub v3: Option<f64>,
    #[arg(long)]
    pub kappa0: Option<f64>,
    #[arg(long)]
    pub b0: Option<f64>,
    #[arg(long = "A0")]
    pub a0: Option<f64>,
    #[arg(long = "R0")]
    pub r0: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub omega_s: Option<f64>,
    #[arg(long)]
    pub s_max: Option<f64>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    /// printed or exact.
    #[arg(long, value_parser = ["printed", "exact"])]
    pub mode: Option<String>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    /// Emit the printed-vs-exact discrepancy summary (JSON).
    #[arg(long)]
    pub report: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {}

impl CurveArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let c = &mut cfg.curve;
        set(&mut c.preset, &self.curve);
        set(&mut c.a, &self.a);
        set(&mut c.c, &self.c);
        set(&mut c.p, &self.p);
        set(&mut c.q, &self.q);
        set(&mut c.major, &self.major);
        set(&mut c.minor, &self.minor);
        set(&mut c.t_min, &self.t_min);
        set(&mut c.t_max, &self.t_max);
        set(&mut c.table_samples, &self.table_samples);
    }
}

impl ShapeArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let s = &mut cfg.shape;
        set(&mut s.preset, &self.shape);
        set(&mut s.radius, &self.radius);
        set(&mut s.chi_rate, &self.chi_rate);
        set(&mut s.r0, &self.shape_r0);
        set(&mut s.slope, &self.slope);
    }
}

impl TubeArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let t = &mut cfg.tube;
        set(&mut t.length, &self.length);
        set(&mut t.linking, &self.linking);
        set(&mut t.kappa0, &self.kappa0);
        set(&mut t.tau0, &self.tau0);
    }
}

impl GridArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let g = &mut cfg.grid;
        set(&mut g.n_s, &self.n_s);
        set(&mut g.n_chi, &self.n_chi);
        set(&mut g.n_phi, &self.n_phi);
        set(&mut g.chi_min, &self.chi_min);
    }
}

fn set<T: Clone>(dst: &mut Option<T>, src: &Option<T>) {
    if src.is_some() {
        *dst = src.clone();
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Frenet(_) => "frenet",
            Command::Metric(_) => "metric",
            Command::Rrc(_) => "rrc",
            Command::Energy(_) => "energy",
            Command::Dynamo(_) => "dynamo",
            Command::Validate(_) => "validate",
        }
    }

    /// Flag values as a sparse configuration.
    fn flag_config(&self) -> RunConfig {
        let mut cfg = RunConfig::default();
        match self {
            Command::Frenet(a) => {
                a.curve.apply(&mut cfg);
                set(&mut cfg.curve.n_points, &a.n_points);
                set(&mut cfg.curve.step, &a.step);
            }
            Command::Metric(a) => {
                a.curve.apply(&mut cfg);
                a.shape.apply(&mut cfg);
                a.tube.apply(&mut cfg);
                a.grid.apply(&mut cfg);
            }
            Command::Rrc(a) => {
                a.curve.apply(&mut cfg);
                a.shape.apply(&mut cfg);
                a.tube.apply(&mut cfg);
                a.grid.apply(&mut cfg);
            }
            Command::Energy(a) => {
                a.curve.apply(&mut cfg);
                a.shape.apply(&mut cfg);
                a.tube.apply(&mut cfg);
                let q = &mut cfg.quadrature;
                set(&mut q.rule, &a.rule);
                set(&mut q.n_s, &a.n_s);
                set(&mut q.n_chi, &a.n_chi);
                set(&mut q.n_phi, &a.n_phi);
                let e = &mut cfg.energy;
                e.b = a.b.as_ref().map(|b| match b.parse::<f64>() {
                    Ok(v) => RatioSetting::Value(v),
                    Err(_) => RatioSetting::Keyword(b.clone()),
                });
                set(&mut e.levels, &a.levels);
                set(&mut e.b3_sq_mean, &a.b3_sq_mean);
                set(&mut e.epsilon_mode, &a.epsilon_mode);
            }
            Command::Dynamo(a) => {
                let d = &mut cfg.dynamo;
                set(&mut d.lambda, &a.lambda);
                set(&mut d.v1, &a.v1);
                set(&mut d.v3, &a.v3);
                set(&mut d.kappa0, &a.kappa0);
                set(&mut d.b0, &a.b0);
                set(&mut d.a0, &a.a0);
                set(&mut d.r0, &a.r0);
                set(&mut d.theta, &a.theta);
                set(&mut d.omega_s, &a.omega_s);
                set(&mut d.s_max, &a.s_max);
                set(&mut d.n_samples, &a.n_samples);
                set(&mut d.mode, &a.mode);
                set(&mut d.t0, &a.t0);
                set(&mut d.t1, &a.t1);
            }
            Command::Validate(_) => {}
        }
        cfg
    }
}

/// Effective configuration: base (file or built-in scenario), then flags.
pub fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => config::load_config(path)?,
        None if matches!(cli.command, Command::Validate(_)) => RunConfig::default_helical(),
        None => RunConfig::default(),
    };
    let mut flags = cli.command.flag_config();
    if let Some(out) = &cli.out {
        flags.output.path = Some(out.display().to_string());
    }
    flags.output.format = cli.format.clone();
    cfg.overlay(&flags);
    Ok(cfg)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("FLUXKNOT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("FLUXKNOT_THREADS must be a positive integer, got `{raw}`")))?;
    // A pool that already exists (repeated calls in one process) is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parse arguments, run the command and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match configure_threads().and_then(|_| commands::execute(&cli)) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("fluxknot: {e}");
            e.exit_code()
        }
    }
}
