//! Command-line front end: argument parsing, config files and output files.
//!
//! Every command prints (or writes with `--out`) either a JSON document of the
//! form `{"manifest": …, "result": …}` or a CSV table. CSV files written with
//! `--out` get a sidecar `<file>.manifest.json`.
//!
//! Exit codes: 0 success, 1 invalid input or I/O failure, 2 numerical failure.

mod commands;
mod output;
mod selftest;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use treeperc::model::RawParams;
use treeperc::ModelParams;

/// Environment variable naming the directory relative `--out` paths resolve against.
pub const OUT_DIR_ENV: &str = "TREEPERC_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "treeperc", version, about = "Critical surfaces of long-range percolation on d-ary trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Transition matrix Q (or the full chain with --full).
    Matrix {
        #[command(flatten)]
        params: ParamArgs,
        /// Include the absorbing all-zero word.
        #[arg(long)]
        full: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Spectral radius of Q.
    Rho {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        power: PowerArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Characteristic polynomial det(xI - Q) at a point.
    Charpoly {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_negative_numbers = true)]
        at: f64,
        /// Also print the coefficients (small instances only).
        #[arg(long)]
        coefficients: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact u_i = P(Y_i = 1), i = 0..=n.
    Useq {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Quasi-stationary law and the limiting ratio r.
    Yaglom {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        power: PowerArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Closed-form bounds on q_c(p).
    Bounds {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Critical value of one probability with the others fixed.
    Critical {
        #[command(flatten)]
        params: ParamArgs,
        /// 1-based index of the free probability (default: the last).
        #[arg(long)]
        free: Option<usize>,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// q_c and its bounds on a grid of p.
    Curve {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Critical p3 over a grid of (p1, p2).
    Surface {
        #[arg(long)]
        d: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<u32>,
        #[arg(long, default_value_t = 41)]
        grid: usize,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte-Carlo estimates.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Horizon n (spine, default 30), generations (gw, default 200) or tree depth (tree, default 10).
        #[arg(long)]
        depth: Option<usize>,
        /// Population counted as survival (gw).
        #[arg(long, default_value_t = 100_000)]
        cap: u64,
        /// Ancestor type (gw).
        #[arg(long, value_enum, default_value_t = Root::AllOnes)]
        root: Root,
        /// Largest d^depth allowed (tree).
        #[arg(long, default_value_t = treeperc::simulate::DEFAULT_TREE_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Slope of q_c at p = 1/d.
    ProbeSlope {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Second differences of q_c on [0, p_max].
    ProbeConvexity {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 0.05)]
        p_max: f64,
        #[arg(long, default_value_t = 11)]
        grid: usize,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Compare q_c with the identity built from the Yaglom ratio.
    CheckConsistency {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the bundled invariant checks.
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Matrix { .. } => "matrix",
            Command::Rho { .. } => "rho",
            Command::Charpoly { .. } => "charpoly",
            Command::Useq { .. } => "useq",
            Command::Yaglom { .. } => "yaglom",
            Command::Bounds { .. } => "bounds",
            Command::Critical { .. } => "critical",
            Command::Curve { .. } => "curve",
            Command::Surface { .. } => "surface",
            Command::Simulate { .. } => "simulate",
            Command::ProbeSlope { .. } => "probe-slope",
            Command::ProbeConvexity { .. } => "probe-convexity",
            Command::CheckConsistency { .. } => "check-consistency",
            Command::Selftest => "selftest",
        }
    }
}

/// Instance parameters: a config file, overridden field by field by flags.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct ParamArgs {
    /// File of `key = value` lines (`d`, `lengths`, `probs`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<u64>,
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["l", "k"])]
    pub lengths: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["p", "q"])]
    pub probs: Option<Vec<f64>>,
    /// Short length of a two-length instance (with --k).
    #[arg(long, requires = "k")]
    pub l: Option<u32>,
    #[arg(long, requires = "l")]
    pub k: Option<u32>,
    /// Probability of the short edge (with --q).
    #[arg(long, requires = "q")]
    pub p: Option<f64>,
    #[arg(long, requires = "p")]
    pub q: Option<f64>,
}

impl ParamArgs {
    pub fn resolve(&self) -> Result<ModelParams, CliError> {
        let base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                RawParams::parse_config(&text)?
            }
            None => RawParams::default(),
        };
        let flags = RawParams {
            d: self.d,
            lengths: self.lengths.clone().or(self.l.zip(self.k).map(|(l, k)| vec![l, k])),
            probs: self.probs.clone().or(self.p.zip(self.q).map(|(p, q)| vec![p, q])),
        };
        Ok(base.overridden_by(flags).resolve()?)
    }
}

/// `(d, l, k)` of a two-length family.
#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct ShapeArgs {
    #[arg(long)]
    pub d: u64,
    #[arg(long)]
    pub l: u32,
    #[arg(long)]
    pub k: u32,
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct PowerArgs {
    /// Relative change at which power iteration stops.
    #[arg(long, default_value_t = 1e-13)]
    pub power_tol: f64,
    /// Required eigenvector residual.
    #[arg(long, default_value_t = 1e-11)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iter: usize,
}

impl PowerArgs {
    pub fn options(&self) -> treeperc::spectral::PowerOptions {
        treeperc::spectral::PowerOptions {
            tol: self.power_tol,
            residual_tol: self.residual_tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct TolArgs {
    /// Bisection bracket width.
    #[arg(long, default_value_t = 1e-11)]
    pub tol: f64,
    #[command(flatten)]
    pub power: PowerArgs,
}

impl TolArgs {
    pub fn options(&self) -> treeperc::critical::CriticalOptions {
        treeperc::critical::CriticalOptions {
            tol: self.tol,
            power: self.power.options(),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutArgs {
    /// Output file; relative paths resolve against $TREEPERC_OUT_DIR when set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Significant digits of floating-point CSV fields.
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u32).range(1..=17))]
    pub precision: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Spine,
    Gw,
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Root {
    AllOnes,
    Single,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Model(treeperc::Error),
}

impl From<treeperc::Error> for CliError {
    fn from(e: treeperc::Error) -> Self {
        CliError::Model(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Model(e) => write!(f, "{e}"),
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    if let Command::Selftest = cli.command {
        return selftest::run(stdout);
    }
    match commands::execute(&cli.command, stderr).and_then(|out| out.emit(stdout)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
