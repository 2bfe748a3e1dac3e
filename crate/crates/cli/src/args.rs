use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "slitspec", version, about = "Neumann spectra of cracked spheres and crack-tip energy monotonicity")]
pub struct Cli {
    /// Report errors as one JSON object on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,

    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Run every parallel section sequentially.
    #[arg(long, global = true)]
    pub sequential: bool,

    /// Solver seed; overrides SLITSPEC_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Eigensolver residual tolerance, relative to max(1, lambda).
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,

    /// Output prefix: writes PREFIX.csv and PREFIX.manifest.json.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of the sphere minus the arc S_beta.
    EigSphere(EigSphereArgs),
    /// First eigenvalue across apertures, or across gapped half-equators.
    Sweep(SweepArgs),
    /// Slope of lambda1 against cos(beta) near beta = pi/2.
    Legendre(LegendreArgs),
    /// Normalized energy profile of a crack-tip or harmonic field.
    Monotonicity(MonotonicityArgs),
    /// Refinement study of a target quantity.
    Convergence(ConvergenceArgs),
    /// First eigenvalue of a circle minus cuts.
    Circle(CircleArgs),
    /// Rerun the command recorded in a manifest and compare its output.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct MeshArgs {
    #[arg(long, default_value_t = 5)]
    pub level: u32,
    /// Mesh grading exponent toward crack tips.
    #[arg(long, default_value_t = 2.0)]
    pub grading: f64,
}

#[derive(Debug, Args)]
pub struct EigSphereArgs {
    /// Half-aperture in radians; accepts a `pi` suffix, e.g. `0.5pi`.
    #[arg(long, value_parser = parse_real)]
    pub beta: f64,
    #[command(flatten)]
    pub mesh: MeshArgs,
    /// Number of eigenpairs; defaults to the component count plus three.
    #[arg(long)]
    pub k: Option<usize>,
}

/// Comma-separated reals.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<f64>);

/// Comma-separated `a:b` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairs(pub Vec<(f64, f64)>);

#[derive(Debug, Clone, PartialEq)]
pub struct Levels(pub Vec<u32>);

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated apertures.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true, conflicts_with = "gaps", required_unless_present = "gaps")]
    pub betas: Option<List>,
    /// Gap set `a:b,c:d` removed from the half-equator, or `none`. Repeat
    /// for several sets.
    #[arg(long, value_parser = parse_gaps, allow_hyphen_values = true)]
    pub gaps: Vec<Pairs>,
    #[command(flatten)]
    pub mesh: MeshArgs,
}

#[derive(Debug, Args)]
pub struct LegendreArgs {
    /// Half-width of the aperture window around pi/2.
    #[arg(long, default_value_t = 0.1)]
    pub window: f64,
    #[arg(long, default_value_t = 5)]
    pub points: usize,
    #[command(flatten)]
    pub mesh: MeshArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataKind {
    /// The crack-tip function.
    Cracktip,
    /// Crack-tip plus 0.3 x.
    Perturbed,
    Constant,
    /// Random smooth boundary data drawn from the seed.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Closed form where available, finite elements otherwise.
    Auto,
    Analytic,
    Fem,
}

#[derive(Debug, Args)]
pub struct MonotonicityArgs {
    #[arg(long, value_enum)]
    pub data: DataKind,
    /// Ambient dimension for closed-form fields.
    #[arg(long, default_value_t = 2)]
    pub dim: u32,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
    /// Log-spaced radii `min:max:count`.
    #[arg(long, value_parser = parse_radii)]
    pub radii: Option<(f64, f64, usize)>,
    /// Radii of the boundary-inequality checks (finite elements only).
    #[arg(long, value_parser = parse_list, default_value = "0.3,0.5,0.7")]
    pub boundary_radii: List,
    #[command(flatten)]
    pub mesh: MeshArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// First eigenvalue of the sphere minus the half-equator.
    #[value(name = "lambda1_half_equator")]
    Lambda1HalfEquator,
    /// phi(1/2) of the finite-element crack-tip solution on the slit disk.
    #[value(name = "phi_cracktip")]
    PhiCracktip,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    /// Levels as `a..b` (inclusive) or a comma list.
    #[arg(long, value_parser = parse_levels, default_value = "3..6")]
    pub levels: Levels,
    #[arg(long, value_enum)]
    pub target: Target,
    #[arg(long, default_value_t = 2.0)]
    pub grading: f64,
}

#[derive(Debug, Args)]
pub struct CircleArgs {
    /// Cuts `a:b,...`; `a = b` removes a point.
    #[arg(long, value_parser = parse_gaps, default_value = "pi:pi", allow_hyphen_values = true)]
    pub cuts: Pairs,
    #[arg(long, default_value_t = 512)]
    pub segments: usize,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Allowed relative difference per CSV cell.
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
}

/// A real number, optionally followed by `pi` (`0.4pi`, `pi`, `-pi`).
pub fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let value = if let Some(head) = t.strip_suffix("pi") {
        let factor = match head {
            "" | "+" => 1.0,
            "-" => -1.0,
            h => h.trim_end_matches('*').parse::<f64>().map_err(|e| format!("{s:?}: {e}"))?,
        };
        factor * PI
    } else {
        t.parse::<f64>().map_err(|e| format!("{s:?}: {e}"))?
    };
    if !value.is_finite() {
        return Err(format!("{s:?} is not finite"));
    }
    Ok(value)
}

pub fn parse_list(s: &str) -> Result<List, String> {
    let out = s.split(',').filter(|p| !p.trim().is_empty()).map(parse_real).collect::<Result<Vec<_>, _>>()?;
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(List(out))
}

pub fn parse_gaps(s: &str) -> Result<Pairs, String> {
    if s.trim() == "none" {
        return Ok(Pairs(Vec::new()));
    }
    let pairs = s
        .split(',')
        .map(|pair| {
            let (a, b) = pair.split_once(':').ok_or_else(|| format!("{pair:?} is not of the form a:b"))?;
            Ok((parse_real(a)?, parse_real(b)?))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(Pairs(pairs))
}

pub fn parse_radii(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("{s:?} is not of the form min:max:count"));
    };
    let n = n.parse::<usize>().map_err(|e| format!("{n:?}: {e}"))?;
    Ok((parse_real(a)?, parse_real(b)?, n))
}

pub fn parse_levels(s: &str) -> Result<Levels, String> {
    let levels: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let a = a.parse::<u32>().map_err(|e| format!("{a:?}: {e}"))?;
        let b = b.parse::<u32>().map_err(|e| format!("{b:?}: {e}"))?;
        (a..=b).collect()
    } else {
        s.split(',').map(|p| p.trim().parse::<u32>().map_err(|e| format!("{p:?}: {e}"))).collect::<Result<_, _>>()?
    };
    if levels.len() < 2 {
        return Err("a convergence study needs at least two levels".into());
    }
    Ok(Levels(levels))
}
