//! Command-line arguments and their validation into a [`RunConfig`].

use std::path::PathBuf;

use bakerspec::spectral::{default_radius_grid, uniform_radius_grid, MapKind};
use bakerspec::Scheme;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Largest dense dimension accepted; a 6561² complex matrix is about 0.7 GB.
pub const MAX_N: usize = 6561;

#[derive(Debug, Parser)]
#[command(name = "bakerspec", version, about = "Spectra of quantized 3-baker maps and the Walsh toy model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Diagonalize the chosen map for each N and write one spectrum CSV per N.
    Spectrum(SpectrumArgs),
    /// Counting curves, power-law fits in N and a summary table.
    Weyl(WeylArgs),
    /// Trapped-set cover, box dimension and escape-time histogram of the classical map.
    Classical(ClassicalArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapArg {
    ClosedBaker,
    OpenBaker,
    Walsh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Plain,
    Antiperiodic,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Plain => Scheme::Plain,
            SchemeArg::Antiperiodic => Scheme::Antiperiodic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    None,
    Even,
    Odd,
}

#[derive(Debug, Args)]
pub struct SequenceArgs {
    #[arg(long, value_enum, default_value = "open-baker")]
    pub map: MapArg,
    #[arg(long, value_enum, default_value = "plain")]
    pub scheme: SchemeArg,
    /// Planck index; repeat for several values.
    #[arg(long = "N", value_name = "N", conflicts_with = "geometric")]
    pub n: Vec<usize>,
    /// `N0:kmax` for N = N0·3^k, k = 1..=kmax.
    #[arg(long, value_name = "N0:KMAX")]
    pub geometric: Option<String>,
    /// Restrict the open baker to one parity sector (antiperiodic scheme only).
    #[arg(long, value_enum, default_value = "none")]
    pub parity: ParityArg,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub seq: SequenceArgs,
    /// Eigenvalues below this modulus are reported as kernel.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_kernel: f64,
}

#[derive(Debug, Args)]
pub struct WeylArgs {
    #[command(flatten)]
    pub seq: SequenceArgs,
    /// Counting grid `lo:hi:steps`; defaults to 200 points i/200.
    #[arg(long, value_name = "LO:HI:STEPS")]
    pub radii: Option<String>,
    /// Radius for a power-law fit; repeatable.
    #[arg(long = "r", value_name = "R", default_values_t = [0.03, 0.5])]
    pub r: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ClassicalArgs {
    /// Refinement depth of the trapped cover.
    #[arg(long, default_value_t = 10)]
    pub depth: u32,
    /// Longest escape time followed.
    #[arg(long, default_value_t = 30)]
    pub tmax: usize,
    /// Number of grid points q = i/grid on the p = 0 line.
    #[arg(long, default_value_t = 531_441)]
    pub grid: i64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// A rejected configuration; reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// A validated sequence of jobs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub ns: Vec<usize>,
    pub map_kind: MapKind,
    pub scheme: Scheme,
    pub out: PathBuf,
}

impl RunConfig {
    /// File-name stem shared by every output of this run.
    pub fn tag(&self) -> String {
        match self.map_kind {
            MapKind::WalshToy => self.map_kind.name().to_string(),
            kind => format!("{}_{}", kind.name(), self.scheme.name()),
        }
    }
}

pub fn parse_geometric(spec: &str) -> Result<Vec<usize>, UsageError> {
    let bad = || UsageError(format!("--geometric expects N0:kmax with positive integers, got '{spec}'"));
    let (n0, kmax) = spec.split_once(':').ok_or_else(bad)?;
    let n0: usize = n0.trim().parse().map_err(|_| bad())?;
    let kmax: u32 = kmax.trim().parse().map_err(|_| bad())?;
    if n0 == 0 || kmax == 0 {
        return Err(bad());
    }
    (1..=kmax)
        .map(|k| {
            3usize
                .checked_pow(k)
                .and_then(|p| p.checked_mul(n0))
                .ok_or_else(|| UsageError(format!("N = {n0}·3^{k} overflows")))
        })
        .collect()
}

pub fn parse_radii(spec: &str) -> Result<Vec<f64>, UsageError> {
    let bad = || UsageError(format!("--radii expects lo:hi:steps, got '{spec}'"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if hi < lo {
        return Err(UsageError(format!("--radii needs lo ≤ hi, got '{spec}'")));
    }
    uniform_radius_grid(lo, hi, steps).map_err(|e| UsageError(e.to_string()))
}

/// The counting grid with every fit radius merged in.
pub fn radius_grid(args: &WeylArgs) -> Result<Vec<f64>, UsageError> {
    let mut grid = match &args.radii {
        Some(spec) => parse_radii(spec)?,
        None => default_radius_grid(),
    };
    for &r in &args.r {
        if !(r > 0.0 && r <= 1.0) {
            return Err(UsageError(format!("--r {r} is outside (0, 1]")));
        }
        if !grid.iter().any(|g| (g - r).abs() <= 1e-12) {
            grid.push(r);
        }
    }
    grid.sort_by(f64::total_cmp);
    Ok(grid)
}

pub fn resolve(seq: &SequenceArgs) -> Result<RunConfig, UsageError> {
    let ns = match (&seq.geometric, seq.n.is_empty()) {
        (Some(spec), _) => parse_geometric(spec)?,
        (None, false) => seq.n.clone(),
        (None, true) => return Err(UsageError("give --N <int> or --geometric N0:kmax".into())),
    };
    if let Some(&bad) = ns.iter().find(|&&n| n == 0 || n % 3 != 0) {
        return Err(UsageError(format!("N = {bad} is invalid: every N must be a positive multiple of 3")));
    }
    if let Some(&big) = ns.iter().find(|&&n| n > MAX_N) {
        let gib = (big * big * 16) as f64 / (1u64 << 30) as f64;
        return Err(UsageError(format!(
            "N = {big} exceeds the dense limit {MAX_N} (one matrix needs {gib:.1} GiB)"
        )));
    }
    let mut sorted = ns.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != ns.len() {
        return Err(UsageError("repeated N values".into()));
    }
    let scheme: Scheme = seq.scheme.into();
    let map_kind = match (seq.map, seq.parity) {
        (MapArg::ClosedBaker, ParityArg::None) => MapKind::ClosedBaker,
        (MapArg::OpenBaker, ParityArg::None) => MapKind::OpenBaker,
        (MapArg::OpenBaker, parity) => {
            if scheme != Scheme::Antiperiodic {
                return Err(UsageError("--parity requires --scheme antiperiodic".into()));
            }
            if parity == ParityArg::Even {
                MapKind::OpenBakerEven
            } else {
                MapKind::OpenBakerOdd
            }
        }
        (MapArg::Walsh, ParityArg::None) => MapKind::WalshToy,
        (_, _) => return Err(UsageError("--parity applies only to --map open-baker".into())),
    };
    Ok(RunConfig {
        ns: sorted,
        map_kind,
        scheme: if map_kind == MapKind::WalshToy { Scheme::Plain } else { scheme },
        out: seq.out.clone(),
    })
}
