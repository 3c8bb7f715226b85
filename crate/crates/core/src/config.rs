//! Run configuration from command-line flags and an optional TOML file.
//! Flags win over file values; file values win over defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusParams, CURVE_NAMES, SURFACE_NAMES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Check,
    Variation,
    Symmetry,
    CorpusList,
    All,
}

#[derive(Debug, Parser)]
#[command(
    name = "hyposym",
    version,
    about = "Numerical checks of curvature ordering, tangent conditions and shear variations on closed surfaces",
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Main assumption, Condition S and Condition S′ verdicts.
    Check(RunArgs),
    /// Cut-off, shear field, first variation and the bulk/collar bounds.
    Variation(RunArgs),
    /// Horizontal mirror-symmetry test.
    Symmetry(RunArgs),
    /// List corpus entries and their expected profiles.
    CorpusList(RunArgs),
    /// Everything above, in dependency order.
    All(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Corpus entry [default: sphere]
    #[arg(long)]
    pub surface: Option<String>,
    /// Sphere or circle radius [default: 1]
    #[arg(long)]
    pub radius: Option<f64>,
    /// Ellipsoid equatorial semi-axis, ellipse x semi-axis [default: 1]
    #[arg(long)]
    pub a: Option<f64>,
    /// Ellipsoid polar semi-axis, ellipse y semi-axis [default: 0.5]
    #[arg(long)]
    pub c: Option<f64>,
    /// Torus center-circle radius [default: 2]
    #[arg(long = "R0")]
    pub r0: Option<f64>,
    /// Torus tube radius [default: 0.5]
    #[arg(long)]
    pub rho: Option<f64>,
    /// Perturbation amplitude [default: 0.1]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Vertical offset of the whole surface [default: 0]
    #[arg(long)]
    pub lift: Option<f64>,
    /// Cylinder radius for Condition S′ [default: largest passing radius]
    #[arg(long)]
    pub r: Option<f64>,
    /// Cut-off width; repeat for a ladder [default: 0.3]
    #[arg(long = "delta")]
    pub deltas: Vec<f64>,
    /// Erosion depth for curvature comparisons [default: 0.1]
    #[arg(long)]
    pub delta_eval: Option<f64>,
    /// Curvature comparison tolerance [default: 0.001]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Tolerance on |f1 + f2 − c0| for symmetry [default: 1e-6]
    #[arg(long)]
    pub sym_tol: Option<f64>,
    /// Grid spacing [default: 0.01]
    #[arg(long)]
    pub h: Option<f64>,
    /// Time step of the area difference quotient [default: 0.001]
    #[arg(long)]
    pub ht: Option<f64>,
    /// JSON report path
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for CSV field dumps
    #[arg(long)]
    pub csv_dir: Option<PathBuf>,
    /// Seed for randomized audits [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML file with any of the settings above
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file. Keys match the long flag names.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    surface: Option<String>,
    radius: Option<f64>,
    a: Option<f64>,
    c: Option<f64>,
    #[serde(rename = "R0")]
    r0: Option<f64>,
    rho: Option<f64>,
    eps: Option<f64>,
    lift: Option<f64>,
    r: Option<f64>,
    delta: Option<Vec<f64>>,
    delta_eval: Option<f64>,
    tol: Option<f64>,
    sym_tol: Option<f64>,
    h: Option<f64>,
    ht: Option<f64>,
    out: Option<PathBuf>,
    csv_dir: Option<PathBuf>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub surface: String,
    pub params: CorpusParams,
    pub h: f64,
    pub deltas: Vec<f64>,
    pub delta_eval: f64,
    pub r: Option<f64>,
    pub tol: f64,
    pub sym_tol: f64,
    pub ht: f64,
    pub out: Option<PathBuf>,
    pub csv_dir: Option<PathBuf>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(ParseOutcome::Clap)?;
    let (command, args) = match cli.command {
        CliCommand::Check(a) => (Command::Check, a),
        CliCommand::Variation(a) => (Command::Variation, a),
        CliCommand::Symmetry(a) => (Command::Symmetry, a),
        CliCommand::CorpusList(a) => (Command::CorpusList, a),
        CliCommand::All(a) => (Command::All, a),
    };
    resolve(command, args).map_err(ParseOutcome::Usage)
}

/// Why parsing stopped: clap's own errors and help output, or a semantic
/// usage error.
#[derive(Debug)]
pub enum ParseOutcome {
    Clap(clap::Error),
    Usage(UsageError),
}

fn read_file(path: &Path) -> Result<FileConfig, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| UsageError(format!("bad config {}: {e}", path.display())))
}

pub fn resolve(command: Command, a: RunArgs) -> Result<RunConfig, UsageError> {
    let f = match &a.config {
        Some(p) => read_file(p)?,
        None => FileConfig::default(),
    };
    let d = CorpusParams::default();
    let params = CorpusParams {
        radius: a.radius.or(f.radius).unwrap_or(d.radius),
        a: a.a.or(f.a).unwrap_or(d.a),
        c: a.c.or(f.c).unwrap_or(d.c),
        major: a.r0.or(f.r0).unwrap_or(d.major),
        minor: a.rho.or(f.rho).unwrap_or(d.minor),
        eps: a.eps.or(f.eps).unwrap_or(d.eps),
        lift: a.lift.or(f.lift).unwrap_or(d.lift),
    };
    let deltas = if !a.deltas.is_empty() {
        a.deltas
    } else {
        f.delta.unwrap_or_else(|| vec![0.3])
    };
    let cfg = RunConfig {
        command,
        surface: a.surface.or(f.surface).unwrap_or_else(|| "sphere".into()),
        params,
        h: a.h.or(f.h).unwrap_or(0.01),
        deltas,
        delta_eval: a.delta_eval.or(f.delta_eval).unwrap_or(0.1),
        r: a.r.or(f.r),
        tol: a.tol.or(f.tol).unwrap_or(1e-3),
        sym_tol: a.sym_tol.or(f.sym_tol).unwrap_or(1e-6),
        ht: a.ht.or(f.ht).unwrap_or(1e-3),
        out: a.out.or(f.out),
        csv_dir: a.csv_dir.or(f.csv_dir),
        seed: a.seed.or(f.seed).unwrap_or(0),
    };
    validate(&cfg)?;
    Ok(cfg)
}

pub fn validate(c: &RunConfig) -> Result<(), UsageError> {
    let known = SURFACE_NAMES
        .iter()
        .chain(CURVE_NAMES.iter())
        .any(|n| *n == c.surface);
    if !known {
        return Err(UsageError(format!(
            "unknown surface '{}'; known: {}",
            c.surface,
            SURFACE_NAMES
                .iter()
                .chain(CURVE_NAMES.iter())
                .copied()
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    if !(c.h > 0.0 && c.h.is_finite()) {
        return Err(UsageError(format!("h must be positive, got {}", c.h)));
    }
    for &d in &c.deltas {
        if !(d >= 9.0 * c.h * (1.0 - 1e-12)) {
            return Err(UsageError(format!(
                "delta must be ≥ 9h (delta = {d}, 9h = {})",
                9.0 * c.h
            )));
        }
    }
    if c.delta_eval < 2.0 * c.h * (1.0 - 1e-12) {
        return Err(UsageError(format!(
            "delta-eval must be ≥ 2h, got {}",
            c.delta_eval
        )));
    }
    for (name, v) in [("tol", c.tol), ("sym-tol", c.sym_tol), ("ht", c.ht)] {
        if !(v > 0.0) {
            return Err(UsageError(format!("{name} must be positive, got {v}")));
        }
    }
    if let Some(r) = c.r {
        if !(r > 0.0) {
            return Err(UsageError(format!("r must be positive, got {r}")));
        }
    }
    Ok(())
}
