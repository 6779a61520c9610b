//! Resonance spectra, counting functions `n(N, r)`, power-law fits in `N`
//! and rescaled shape functions.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::eigen::eigenvalues;
use crate::fit::fit_line;
use crate::matrix::{ComplexMatrix, C64};
use crate::quantum::{closed_baker_matrix, open_baker_matrix, parity_blocks, PlanckIndex, Scheme};
use crate::walsh::toy_matrix;
use crate::{Error, Result, LOG2_LOG3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    ClosedBaker,
    OpenBaker,
    OpenBakerEven,
    OpenBakerOdd,
    WalshToy,
}

impl MapKind {
    pub const ALL: [MapKind; 5] = [
        MapKind::ClosedBaker,
        MapKind::OpenBaker,
        MapKind::OpenBakerEven,
        MapKind::OpenBakerOdd,
        MapKind::WalshToy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MapKind::ClosedBaker => "closed-baker",
            MapKind::OpenBaker => "open-baker",
            MapKind::OpenBakerEven => "open-baker-even",
            MapKind::OpenBakerOdd => "open-baker-odd",
            MapKind::WalshToy => "walsh-toy",
        }
    }

    /// Every kind except the closed map has operator norm at most 1 and a hole.
    pub fn is_open(self) -> bool {
        self != MapKind::ClosedBaker
    }

    /// Dense matrix for this kind at Planck index `N`.
    ///
    /// The Walsh toy ignores the scheme; parity blocks require the
    /// antiperiodic one.
    pub fn matrix(self, index: PlanckIndex) -> Result<ComplexMatrix> {
        match self {
            MapKind::ClosedBaker => Ok(closed_baker_matrix(index)),
            MapKind::OpenBaker => Ok(open_baker_matrix(index)),
            MapKind::OpenBakerEven => Ok(parity_blocks(index)?.0),
            MapKind::OpenBakerOdd => Ok(parity_blocks(index)?.1),
            MapKind::WalshToy => toy_matrix(index.n()),
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown map kind '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRecord {
    pub n: usize,
    pub map_kind: MapKind,
    pub scheme: Scheme,
    pub eigenvalues: Vec<C64>,
    pub solver_residual: f64,
}

impl SpectrumRecord {
    /// Diagonalizes `m`; `n` is the Planck index, which differs from
    /// `m.dim()` for parity blocks.
    pub fn from_matrix(n: usize, map_kind: MapKind, scheme: Scheme, m: &ComplexMatrix) -> Result<Self> {
        let eig = eigenvalues(m)?;
        Ok(Self {
            n,
            map_kind,
            scheme,
            eigenvalues: eig.values,
            solver_residual: eig.residual,
        })
    }

    pub fn compute(map_kind: MapKind, index: PlanckIndex) -> Result<Self> {
        let m = map_kind.matrix(index)?;
        Self::from_matrix(index.n(), map_kind, index.scheme(), &m)
    }

    /// Moduli in descending order.
    pub fn moduli(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.eigenvalues.iter().map(|z| z.norm()).collect();
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        self.eigenvalues.iter().sum()
    }
}

/// Eigenvalues of `m` as a bare list.
pub fn full_spectrum(m: &ComplexMatrix) -> Result<Vec<C64>> {
    Ok(eigenvalues(m)?.values)
}

/// `n(N, r)` sampled on a radius grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingCurve {
    pub n: usize,
    pub samples: Vec<(f64, usize)>,
}

fn validate_radii(radii: &[f64]) -> Result<()> {
    if let Some(bad) = radii.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
        return Err(Error::InvalidArgument(format!("radius {bad} is outside (0, 1]")));
    }
    if radii.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("radii must be sorted ascending".into()));
    }
    Ok(())
}

impl CountingCurve {
    /// Counts moduli with `|λ| ≥ r` for each radius.
    pub fn from_moduli(n: usize, moduli: &[f64], radii: &[f64]) -> Result<Self> {
        validate_radii(radii)?;
        let mut sorted = moduli.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let samples = radii
            .iter()
            .map(|&r| (r, sorted.len() - sorted.partition_point(|&m| m < r)))
            .collect();
        Ok(Self { n, samples })
    }

    /// Count at a grid radius, matched to within `1e-12`.
    pub fn count_at(&self, r: f64) -> Option<usize> {
        self.samples
            .iter()
            .find(|(s, _)| (s - r).abs() <= 1e-12)
            .map(|(_, c)| *c)
    }

    pub fn radii(&self) -> Vec<f64> {
        self.samples.iter().map(|(r, _)| *r).collect()
    }
}

pub fn counting_function(s: &SpectrumRecord, radii: &[f64]) -> Result<CountingCurve> {
    let moduli: Vec<f64> = s.eigenvalues.iter().map(|z| z.norm()).collect();
    CountingCurve::from_moduli(s.n, &moduli, radii)
}

pub const DEFAULT_GRID_SIZE: usize = 200;

/// `i / steps` for `i = 1..=steps`.
pub fn default_radius_grid() -> Vec<f64> {
    uniform_radius_grid(1.0 / DEFAULT_GRID_SIZE as f64, 1.0, DEFAULT_GRID_SIZE).expect("valid grid")
}

/// `steps` equally spaced radii from `lo` to `hi` inclusive.
pub fn uniform_radius_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("radius grid needs at least one step".into()));
    }
    if steps == 1 {
        validate_radii(&[lo])?;
        return Ok(vec![lo]);
    }
    let grid: Vec<f64> = (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect();
    validate_radii(&grid)?;
    Ok(grid)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylFit {
    pub radius: f64,
    /// `(N, n(N, r))` pairs that entered the fit.
    pub sequence: Vec<(usize, usize)>,
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

/// Least-squares slope of `log n(N, r)` against `log N`.
///
/// Curves whose count at `r` is zero are skipped; at least three must remain.
pub fn weyl_fit(curves: &[CountingCurve], r: f64) -> Result<WeylFit> {
    let mut sequence = Vec::new();
    for c in curves {
        let count = c
            .count_at(r)
            .ok_or_else(|| Error::InvalidArgument(format!("radius {r} is not on the grid of curve N = {}", c.n)))?;
        if count >= 1 {
            sequence.push((c.n, count));
        }
    }
    if sequence.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "Weyl fit at r = {r} needs 3 curves with nonzero counts, found {}",
            sequence.len()
        )));
    }
    if sequence.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::InvalidArgument("N values must be strictly increasing".into()));
    }
    let xs: Vec<f64> = sequence.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = sequence.iter().map(|(_, c)| (*c as f64).ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    Ok(WeylFit {
        radius: r,
        sequence,
        slope: fit.slope,
        intercept: fit.intercept,
        rms_residual: fit.rms_residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeSample {
    pub n: usize,
    pub r: f64,
    pub count: usize,
    pub rescaled: f64,
}

/// `n(N, r) · N^{-log 2/log 3}` for one curve.
pub fn rescale(curve: &CountingCurve) -> Vec<ShapeSample> {
    let factor = (curve.n as f64).powf(-LOG2_LOG3);
    curve
        .samples
        .iter()
        .map(|&(r, count)| ShapeSample {
            n: curve.n,
            r,
            count,
            rescaled: count as f64 * factor,
        })
        .collect()
}

pub fn shape_function(curves: &[CountingCurve]) -> Result<Vec<ShapeSample>> {
    if curves.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "shape function needs at least 2 curves, found {}",
            curves.len()
        )));
    }
    let grid = curves[0].radii();
    if let Some(c) = curves.iter().find(|c| c.radii() != grid) {
        return Err(Error::InvalidArgument(format!(
            "curve N = {} is sampled on a different radius grid",
            c.n
        )));
    }
    Ok(curves.iter().flat_map(rescale).collect())
}

/// `sup |a(r) − b(r)|` over grid points in `[lo, hi]`, for curves on the same grid.
pub fn sup_distance(a: &[ShapeSample], b: &[ShapeSample], lo: f64, hi: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let mut sup = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        if (x.r - y.r).abs() > 1e-12 {
            return Err(Error::InvalidArgument("curves are sampled on different radii".into()));
        }
        if x.r >= lo && x.r <= hi {
            sup = sup.max((x.rescaled - y.rescaled).abs());
        }
    }
    Ok(sup)
}

/// Comparison of two consecutive rescaled curves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollapseStep {
    pub n_small: usize,
    pub n_large: usize,
    pub distance: f64,
    /// `max_r c_{N_large}(r)` over the whole grid.
    pub peak_large: f64,
}

impl CollapseStep {
    pub fn within(&self, fraction: f64) -> bool {
        self.distance <= fraction * self.peak_large
    }
}

/// Sup-distances between consecutive curves over `[lo, hi]`.
pub fn collapse_steps(curves: &[CountingCurve], lo: f64, hi: f64) -> Result<Vec<CollapseStep>> {
    shape_function(curves)?;
    let rescaled: Vec<Vec<ShapeSample>> = curves.iter().map(rescale).collect();
    rescaled
        .windows(2)
        .map(|w| {
            Ok(CollapseStep {
                n_small: w[0][0].n,
                n_large: w[1][0].n,
                distance: sup_distance(&w[0], &w[1], lo, hi)?,
                peak_large: w[1].iter().map(|s| s.rescaled).fold(0.0, f64::max),
            })
        })
        .collect()
}

/// Eigenvalues with `|λ| < tol`.
pub fn kernel_dimension(s: &SpectrumRecord, tol: f64) -> usize {
    s.eigenvalues.iter().filter(|z| z.norm() < tol).count()
}

/// Smallest `δ` admitting a perfect matching of `a` onto `b` with every
/// matched pair within `δ`.
pub fn bottleneck_distance(a: &[C64], b: &[C64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let n = a.len();
    let dist: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| (x - y).norm())).collect();
    let mut levels = dist.clone();
    levels.sort_by(|x, y| x.total_cmp(y));
    levels.dedup();
    // The largest level always admits a matching.
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if has_perfect_matching(n, &dist, levels[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(levels[lo])
}

/// Hopcroft–Karp on the bipartite graph `{(i, j) : dist[i·n + j] ≤ delta}`.
fn has_perfect_matching(n: usize, dist: &[f64], delta: f64) -> bool {
    const FREE: usize = usize::MAX;
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| dist[i * n + j] <= delta).collect())
        .collect();
    if adj.iter().any(Vec::is_empty) {
        return false;
    }
    let mut match_left = vec![FREE; n];
    let mut match_right = vec![FREE; n];
    let mut layer = vec![0usize; n];
    let mut matched = 0;
    loop {
        // Layer the free left vertices and everything reachable by alternating paths.
        let mut queue = VecDeque::new();
        for i in 0..n {
            if match_left[i] == FREE {
                layer[i] = 0;
                queue.push_back(i);
            } else {
                layer[i] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                let partner = match_right[j];
                if partner == FREE {
                    found = true;
                } else if layer[partner] == usize::MAX {
                    layer[partner] = layer[i] + 1;
                    queue.push_back(partner);
                }
            }
        }
        if !found {
            return matched == n;
        }
        let mut next = vec![0usize; n];
        for i in 0..n {
            if match_left[i] == FREE
                && augment(i, &adj, &mut match_left, &mut match_right, &mut layer, &mut next)
            {
                matched += 1;
            }
        }
    }
}

fn augment(
    i: usize,
    adj: &[Vec<usize>],
    match_left: &mut [usize],
    match_right: &mut [usize],
    layer: &mut [usize],
    next: &mut [usize],
) -> bool {
    while next[i] < adj[i].len() {
        let j = adj[i][next[i]];
        next[i] += 1;
        let partner = match_right[j];
        let ok = partner == usize::MAX
            || (layer[partner] == layer[i] + 1 && augment(partner, adj, match_left, match_right, layer, next));
        if ok {
            match_left[i] = j;
            match_right[j] = i;
            return true;
        }
    }
    layer[i] = usize::MAX;
    false
}
