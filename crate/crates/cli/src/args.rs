use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qudit_purify::purification::{ProtocolKind, DEFAULT_MAX_STEPS};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "qpurify", version, about = "Simulate GXOR-based qudit entanglement purification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the amplitudes of the Bell state ψ_lm.
    Bell {
        #[arg(long, value_parser = parse_dim)]
        dim: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        m: usize,
    },
    /// Verify the teleportation identity on seeded random states.
    TeleportCheck {
        #[arg(long, value_parser = parse_dim)]
        dim: usize,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Iterate one protocol from a Werner state and print every step.
    Purify {
        #[arg(long, value_parser = parse_dim)]
        dim: usize,
        #[arg(long, default_value = "gxor")]
        protocol: ProtocolKind,
        /// Initial fidelity with ψ_00.
        #[arg(long, value_parser = parse_fidelity)]
        fidelity: f64,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the protocols over a grid of initial fidelities.
    Sweep {
        #[arg(long, value_parser = parse_dim)]
        dim: usize,
        #[arg(long, value_delimiter = ',', default_value = "gxor,horodecki")]
        protocols: Vec<ProtocolKind>,
        /// Initial fidelities as `lo:hi:step`, both ends inclusive.
        #[arg(long, value_parser = parse_grid)]
        grid: Grid,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Bisect for the smallest initial fidelity that still reaches the target.
    Radius {
        /// Dimensions as `lo:hi` or a comma list.
        #[arg(long, value_parser = parse_dims, default_value = "2:12")]
        dims: Dims,
        #[arg(long, value_delimiter = ',', default_value = "gxor,horodecki")]
        protocols: Vec<ProtocolKind>,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Target fidelity, either a decimal or `EPS@below1` for 1 − EPS.
    #[arg(long, value_parser = parse_target, default_value = "1e-5@below1")]
    pub target: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS, value_parser = parse_steps)]
    pub max_steps: usize,
    /// Count only the |00⟩ outcome as success for the baseline protocol.
    #[arg(long)]
    pub baseline_single_outcome: bool,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct Dims(pub Vec<usize>);

pub fn parse_dim(s: &str) -> Result<usize, String> {
    let d: usize = s.trim().parse().map_err(|_| format!("'{s}' is not an integer"))?;
    if !(MIN_DIM..=MAX_DIM).contains(&d) {
        return Err(format!("dimension {d} outside [{MIN_DIM}, {MAX_DIM}]"));
    }
    Ok(d)
}

fn parse_steps(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("max steps must be a positive integer, got '{s}'")),
    }
}

fn parse_float(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !x.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(x)
}

pub fn parse_fidelity(s: &str) -> Result<f64, String> {
    let f = parse_float(s)?;
    if !(f > 0.0 && f <= 1.0) {
        return Err(format!("fidelity {f} outside (0, 1]"));
    }
    Ok(f)
}

/// `0.99999` or `1e-5@below1`.
pub fn parse_target(s: &str) -> Result<f64, String> {
    let target = match s.trim().strip_suffix("@below1") {
        Some(eps) => {
            let eps = parse_float(eps)?;
            if !(eps > 0.0 && eps < 1.0) {
                return Err(format!("distance below 1 must lie in (0, 1), got {eps}"));
            }
            1.0 - eps
        }
        None => parse_float(s)?,
    };
    if !(target > 0.0 && target <= 1.0) {
        return Err(format!("target {target} outside (0, 1]"));
    }
    Ok(target)
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts[..] else {
        return Err(format!("grid '{s}' is not lo:hi:step"));
    };
    let (lo, hi, step) = (parse_float(lo)?, parse_float(hi)?, parse_float(step)?);
    if step <= 0.0 || hi < lo {
        return Err(format!("grid '{s}' needs lo ≤ hi and a positive step"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    // snap to 12 decimals so 0.4 + 3·0.05 prints as 0.55
    let points = (0..count).map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12).collect();
    Ok(Grid(points))
}

pub fn parse_dims(s: &str) -> Result<Dims, String> {
    let dims: Vec<usize> = match s.split_once(':') {
        Some((lo, hi)) => {
            let (lo, hi) = (parse_dim(lo)?, parse_dim(hi)?);
            if hi < lo {
                return Err(format!("empty dimension range '{s}'"));
            }
            (lo..=hi).collect()
        }
        None => s.split(',').map(parse_dim).collect::<Result<_, _>>()?,
    };
    Ok(Dims(dims))
}
