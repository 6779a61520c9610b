use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use bakerspec::classical::{box_dimension, grid_escape_histogram, trapped_cover, MAX_COVER_DEPTH, MAX_GRID_TMAX};
use bakerspec::io::{
    read_spectrum_csv, write_analytic_spectrum_csv, write_counting_csv, write_cover_csv, write_escape_csv,
    write_spectrum_csv, write_weyl_json, write_weyl_summary,
};
use bakerspec::spectral::{counting_function, kernel_dimension, rescale, weyl_fit, SpectrumRecord};
use bakerspec::walsh::{analytic_spectrum, MAX_ANALYTIC_K};
use bakerspec::{PlanckIndex, LOG2_LOG3};
use rayon::prelude::*;

use crate::config::{radius_grid, resolve, ClassicalArgs, RunConfig, SpectrumArgs, UsageError, WeylArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Solver(bakerspec::Error),
    Other(bakerspec::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Solver(e) => write!(f, "solver failure: {e}"),
            CliError::Other(e) => write!(f, "{e}"),
        }
    }
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e.0)
    }
}

impl From<bakerspec::Error> for CliError {
    fn from(e: bakerspec::Error) -> Self {
        use bakerspec::Error as E;
        match e {
            E::NonConvergence { .. } | E::NonFinite | E::SpectrumMismatch { .. } => CliError::Solver(e),
            E::NotDivisibleByThree(_) | E::ParityRequiresAntiperiodic | E::InvalidArgument(_) | E::InsufficientData(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Other(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}

type CliResult<T> = Result<T, CliError>;

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn spectrum_path(cfg: &RunConfig, n: usize) -> PathBuf {
    cfg.out.join(format!("spectrum_{}_N{n}.csv", cfg.tag()))
}

/// `k` with `N = 3^k`, if there is one.
fn power_of_three(n: usize) -> Option<u32> {
    let mut k = 0;
    let mut m = n;
    while m > 1 && m.is_multiple_of(3) {
        m /= 3;
        k += 1;
    }
    (m == 1 && k >= 1).then_some(k)
}

fn compute(cfg: &RunConfig, n: usize) -> CliResult<SpectrumRecord> {
    let index = PlanckIndex::new(n, cfg.scheme)?;
    Ok(SpectrumRecord::compute(cfg.map_kind, index)?)
}

fn expected_dim(cfg: &RunConfig, n: usize) -> CliResult<usize> {
    Ok(cfg.map_kind.matrix(PlanckIndex::new(n, cfg.scheme)?)?.dim())
}

/// A previously written spectrum for this job, if it parses and has the right shape.
fn cached(cfg: &RunConfig, n: usize) -> CliResult<Option<SpectrumRecord>> {
    let path = spectrum_path(cfg, n);
    let Ok(file) = File::open(&path) else {
        return Ok(None);
    };
    let Ok(mut records) = read_spectrum_csv(BufReader::new(file)) else {
        return Ok(None);
    };
    if records.len() != 1 {
        return Ok(None);
    }
    let record = records.remove(0);
    let fits = record.n == n
        && record.map_kind == cfg.map_kind
        && record.scheme == cfg.scheme
        && record.eigenvalues.len() == expected_dim(cfg, n)?;
    Ok(fits.then_some(record))
}

fn write_spectrum(cfg: &RunConfig, record: &SpectrumRecord) -> CliResult<()> {
    let mut w = create(&spectrum_path(cfg, record.n))?;
    write_spectrum_csv(&mut w, record)?;
    w.flush()?;
    Ok(())
}

pub fn spectrum(args: &SpectrumArgs) -> CliResult<()> {
    let cfg = resolve(&args.seq)?;
    if args.tol_kernel.is_nan() || args.tol_kernel <= 0.0 {
        return Err(CliError::Usage("--tol-kernel must be positive".into()));
    }
    fs::create_dir_all(&cfg.out)?;
    let records: Vec<SpectrumRecord> = cfg
        .ns
        .par_iter()
        .map(|&n| {
            let record = compute(&cfg, n)?;
            write_spectrum(&cfg, &record)?;
            Ok(record)
        })
        .collect::<CliResult<_>>()?;
    for r in &records {
        println!(
            "N={} map={} scheme={} eigenvalues={} kernel(<{:e})={} spectral_radius={:.12} residual={:.3e}",
            r.n,
            r.map_kind,
            r.scheme,
            r.eigenvalues.len(),
            args.tol_kernel,
            kernel_dimension(r, args.tol_kernel),
            r.spectral_radius(),
            r.solver_residual
        );
    }
    if cfg.map_kind == bakerspec::spectral::MapKind::WalshToy {
        for &n in &cfg.ns {
            if let Some(k) = power_of_three(n).filter(|&k| k <= MAX_ANALYTIC_K) {
                let path = cfg.out.join(format!("analytic_walsh_k{k}.csv"));
                let mut w = create(&path)?;
                write_analytic_spectrum_csv(&mut w, &analytic_spectrum(k)?)?;
                w.flush()?;
            }
        }
    }
    Ok(())
}

fn radius_label(r: f64) -> String {
    format!("{r}").replace('.', "p")
}

pub fn weyl(args: &WeylArgs) -> CliResult<()> {
    let cfg = resolve(&args.seq)?;
    let grid = radius_grid(args)?;
    if cfg.ns.len() < 3 {
        return Err(CliError::Usage(format!(
            "a Weyl fit needs at least 3 values of N, got {}",
            cfg.ns.len()
        )));
    }
    fs::create_dir_all(&cfg.out)?;
    let records: Vec<SpectrumRecord> = cfg
        .ns
        .par_iter()
        .map(|&n| match cached(&cfg, n)? {
            Some(record) => Ok(record),
            None => {
                let record = compute(&cfg, n)?;
                write_spectrum(&cfg, &record)?;
                Ok(record)
            }
        })
        .collect::<CliResult<_>>()?;
    let curves = records
        .iter()
        .map(|r| counting_function(r, &grid))
        .collect::<Result<Vec<_>, _>>()?;

    let samples: Vec<_> = curves.iter().flat_map(rescale).collect();
    let mut w = create(&cfg.out.join(format!("counting_{}.csv", cfg.tag())))?;
    write_counting_csv(&mut w, &samples)?;
    w.flush()?;

    let mut fits = Vec::new();
    for &r in &args.r {
        let fit = weyl_fit(&curves, r)?;
        let path = cfg.out.join(format!("weyl_{}_r{}.json", cfg.tag(), radius_label(r)));
        let mut w = create(&path)?;
        write_weyl_json(&mut w, &fit)?;
        w.flush()?;
        println!(
            "r={r} slope={:.6} target={LOG2_LOG3:.6} deviation={:+.6} rms={:.3e} points={}",
            fit.slope,
            fit.slope - LOG2_LOG3,
            fit.rms_residual,
            fit.sequence.len()
        );
        fits.push(fit);
    }
    let mut w = create(&cfg.out.join(format!("weyl_{}_summary.csv", cfg.tag())))?;
    write_weyl_summary(&mut w, &fits)?;
    w.flush()?;
    Ok(())
}

pub fn classical(args: &ClassicalArgs) -> CliResult<()> {
    if args.depth > MAX_COVER_DEPTH {
        return Err(CliError::Usage(format!(
            "--depth {} exceeds the limit {MAX_COVER_DEPTH}",
            args.depth
        )));
    }
    if args.tmax > MAX_GRID_TMAX {
        return Err(CliError::Usage(format!("--tmax {} exceeds the limit {MAX_GRID_TMAX}", args.tmax)));
    }
    if args.grid <= 0 {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    fs::create_dir_all(&args.out)?;
    let cover = trapped_cover(args.depth)?;
    let fit = if args.depth >= 2 { Some(box_dimension(&cover)?) } else { None };
    let mut w = create(&args.out.join(format!("cover_depth{}.csv", args.depth)))?;
    write_cover_csv(&mut w, &cover, fit.as_ref())?;
    w.flush()?;
    match &fit {
        Some(f) => println!(
            "depth={} intervals={} dimension={:.12} target={LOG2_LOG3:.12} residual={:.3e}",
            args.depth,
            cover.len(),
            f.value,
            f.residual
        ),
        None => println!("depth={} intervals={} (dimension needs depth ≥ 2)", args.depth, cover.len()),
    }

    let hist = grid_escape_histogram(args.grid, args.tmax)?;
    let mut w = create(&args.out.join(format!("escape_grid{}_t{}.csv", args.grid, args.tmax)))?;
    write_escape_csv(&mut w, &hist)?;
    w.flush()?;
    println!(
        "grid={} tmax={} survivors(tmax)={} fraction={:.6e} expected={:.6e}",
        args.grid,
        args.tmax,
        hist.survivors_at(args.tmax),
        hist.survivor_fraction(args.tmax),
        (2.0f64 / 3.0).powi(args.tmax as i32)
    );
    Ok(())
}
