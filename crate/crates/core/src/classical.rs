//! Classical 3-baker's map on the torus, its opening on the middle
//! Markov rectangle `R₁`, ternary symbolic coding, and the Cantor-set
//! approximations of the forward trapped set.
//!
//! Every map is generic over [`Coordinate`], implemented for `f64` and
//! for exact rationals (`Rational64`). Points on 3-adic grids stay exact
//! under the rational implementation, which is what the shift and
//! inverse properties are tested with.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use num_rational::Rational64;
use num_traits::ToPrimitive;

use crate::fit::fit_line;
use crate::{Error, Result};

pub trait Coordinate:
    Copy
    + PartialOrd
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn from_int(n: i64) -> Self;

    /// Folds a value that rounding pushed onto 1 back into `[0, 1)`.
    fn wrap_unit(self) -> Self;

    fn to_f64(self) -> f64;
}

impl Coordinate for f64 {
    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn wrap_unit(self) -> Self {
        if self >= 1.0 {
            self - 1.0
        } else if self < 0.0 {
            0.0
        } else {
            self
        }
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Coordinate for Rational64 {
    fn from_int(n: i64) -> Self {
        Rational64::from_integer(n)
    }

    fn wrap_unit(self) -> Self {
        self
    }

    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

fn third<T: Coordinate>() -> T {
    T::from_int(1) / T::from_int(3)
}

/// Index of the Markov rectangle `R_j = [j/3, (j+1)/3)` holding `x`,
/// following the half-open inequalities literally.
pub fn ternary_digit<T: Coordinate>(x: T) -> u8 {
    let one_third = third::<T>();
    if x < one_third {
        0
    } else if x < one_third + one_third {
        1
    } else {
        2
    }
}

/// A point `(q, p)` of `T² = [0,1) × [0,1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusPoint<T = f64> {
    q: T,
    p: T,
}

impl<T: Coordinate> TorusPoint<T> {
    pub fn new(q: T, p: T) -> Result<Self> {
        let zero = T::from_int(0);
        let one = T::from_int(1);
        let inside = |x: T| x >= zero && x < one;
        if inside(q) && inside(p) {
            Ok(Self { q, p })
        } else {
            Err(Error::InvalidArgument(format!(
                "torus point ({q:?}, {p:?}) is outside [0,1)²"
            )))
        }
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn p(&self) -> T {
        self.p
    }

    /// Markov rectangle index `ε₀(x)`.
    pub fn rectangle(&self) -> u8 {
        ternary_digit(self.q)
    }

    pub fn in_hole(&self) -> bool {
        self.rectangle() == 1
    }

    fn branch(&self, j: u8) -> Self {
        let three = T::from_int(3);
        let shift = T::from_int(j as i64);
        Self {
            q: (three * self.q - shift).wrap_unit(),
            p: ((self.p + shift) / three).wrap_unit(),
        }
    }
}

/// The closed 3-baker map `B`.
pub fn closed_step<T: Coordinate>(x: TorusPoint<T>) -> TorusPoint<T> {
    x.branch(x.rectangle())
}

/// The open map `C = B` restricted to `S = R₀ ∪ R₂`; `None` when `x ∈ R₁`.
pub fn open_step<T: Coordinate>(x: TorusPoint<T>) -> Option<TorusPoint<T>> {
    match x.rectangle() {
        1 => None,
        j => Some(x.branch(j)),
    }
}

/// `C⁻¹` on `C(S) = {p ∉ [1/3, 2/3)}`; `None` outside it.
pub fn inverse_open_step<T: Coordinate>(x: TorusPoint<T>) -> Option<TorusPoint<T>> {
    let three = T::from_int(3);
    let j = match ternary_digit(x.p) {
        1 => return None,
        j => T::from_int(j as i64),
    };
    Some(TorusPoint {
        q: ((x.q + j) / three).wrap_unit(),
        p: (three * x.p - j).wrap_unit(),
    })
}

/// A finite window `ε_{-d} … ε_{-1} · ε₀ … ε_{d'-1}` of a symbolic sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolWord {
    symbols: Vec<u8>,
    /// Position of `ε₀` inside `symbols`.
    offset: usize,
}

impl SymbolWord {
    pub fn new(symbols: Vec<u8>, offset: usize) -> Result<Self> {
        if let Some(bad) = symbols.iter().find(|&&s| s > 2) {
            return Err(Error::InvalidArgument(format!("symbol {bad} is not in {{0,1,2}}")));
        }
        if offset > symbols.len() {
            return Err(Error::InvalidArgument(format!(
                "offset {offset} exceeds word length {}",
                symbols.len()
            )));
        }
        Ok(Self { symbols, offset })
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    /// `ε₀ ε₁ …`, the digits of `q`.
    pub fn forward(&self) -> &[u8] {
        &self.symbols[self.offset..]
    }

    /// `ε₋₁ ε₋₂ …`, the digits of `p`, most significant first.
    pub fn backward(&self) -> Vec<u8> {
        self.symbols[..self.offset].iter().rev().copied().collect()
    }

    /// The action of the baker map: move the decimal point one symbol right.
    pub fn shifted(&self) -> Self {
        Self {
            symbols: self.symbols.clone(),
            offset: (self.offset + 1).min(self.symbols.len()),
        }
    }

    /// Keeps at most `depth` symbols on each side of the decimal point.
    pub fn window(&self, depth: usize) -> Self {
        let start = self.offset.saturating_sub(depth);
        let end = (self.offset + depth).min(self.symbols.len());
        Self {
            symbols: self.symbols[start..end].to_vec(),
            offset: self.offset - start,
        }
    }

    pub fn decode<T: Coordinate>(&self) -> TorusPoint<T> {
        let digits_value = |digits: &[u8]| {
            let three = T::from_int(3);
            let mut acc = T::from_int(0);
            for &d in digits.iter().rev() {
                acc = (acc + T::from_int(d as i64)) / three;
            }
            acc
        };
        TorusPoint {
            q: digits_value(self.forward()),
            p: digits_value(&self.backward()),
        }
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i == self.offset {
                f.write_str("·")?;
            }
            write!(f, "{s}")?;
        }
        if self.offset == self.symbols.len() {
            f.write_str("·")?;
        }
        Ok(())
    }
}

fn ternary_digits<T: Coordinate>(mut x: T, depth: usize) -> Vec<u8> {
    let three = T::from_int(3);
    let mut digits = Vec::with_capacity(depth);
    for _ in 0..depth {
        let d = ternary_digit(x);
        digits.push(d);
        x = (three * x - T::from_int(d as i64)).wrap_unit();
    }
    digits
}

/// Ternary coding of `x`: `depth` digits of `q` forward and of `p` backward.
///
/// Boundary points use the expansion terminating from below, so
/// `1/3 = 0·1000…`, consistent with the half-open rectangles.
pub fn encode<T: Coordinate>(x: TorusPoint<T>, depth: usize) -> SymbolWord {
    let mut symbols: Vec<u8> = ternary_digits(x.p, depth).into_iter().rev().collect();
    symbols.extend(ternary_digits(x.q, depth));
    SymbolWord {
        symbols,
        offset: depth,
    }
}

/// Checks that `B` acts as the left shift on the depth-`depth` coding of `x`.
pub fn shift_consistency<T: Coordinate>(x: TorusPoint<T>, depth: usize) -> bool {
    assert!(depth >= 2, "shift consistency needs depth ≥ 2");
    let word = encode(x, depth);
    let image = encode(closed_step(x), depth - 1);
    image == word.shifted().window(depth - 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EscapeResult {
    Survived,
    /// First `t` with `Bᵗ(x) ∈ R₁`; a point starting in the hole escapes at 0.
    Escaped { time: usize },
}

pub fn escape_time<T: Coordinate>(x: TorusPoint<T>, tmax: usize) -> EscapeResult {
    let mut point = x;
    for t in 0..=tmax {
        if point.in_hole() {
            return EscapeResult::Escaped { time: t };
        }
        point = closed_step(point);
    }
    EscapeResult::Survived
}

/// Escape-time statistics of a finite point sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EscapeHistogram {
    pub tmax: usize,
    pub total: usize,
    /// `escaped_at[t]` counts points with escape time exactly `t`.
    pub escaped_at: Vec<usize>,
    pub survived: usize,
}

impl EscapeHistogram {
    pub fn from_points<T: Coordinate>(points: impl IntoIterator<Item = TorusPoint<T>>, tmax: usize) -> Self {
        let mut escaped_at = vec![0; tmax + 1];
        let mut survived = 0;
        let mut total = 0;
        for x in points {
            total += 1;
            match escape_time(x, tmax) {
                EscapeResult::Escaped { time } => escaped_at[time] += 1,
                EscapeResult::Survived => survived += 1,
            }
        }
        Self {
            tmax,
            total,
            escaped_at,
            survived,
        }
    }

    /// Points still inside `S` at times `0, …, t − 1`.
    pub fn survivors_at(&self, t: usize) -> usize {
        self.total - self.escaped_at.iter().take(t).sum::<usize>()
    }

    pub fn survivor_fraction(&self, t: usize) -> f64 {
        self.survivors_at(t) as f64 / self.total as f64
    }
}

/// Longest orbit [`grid_escape_histogram`] follows; `p` gains a factor 3
/// of denominator per step and must stay representable in `i64`.
pub const MAX_GRID_TMAX: usize = 36;

/// Escape histogram over the exact rational grid `q = i/size`, `p = 0`.
pub fn grid_escape_histogram(size: i64, tmax: usize) -> Result<EscapeHistogram> {
    if size < 1 {
        return Err(Error::InvalidArgument(format!("grid size must be positive, got {size}")));
    }
    if tmax > MAX_GRID_TMAX {
        return Err(Error::InvalidArgument(format!(
            "tmax {tmax} exceeds {MAX_GRID_TMAX} for exact rational orbits"
        )));
    }
    let zero = Rational64::from_integer(0);
    let points = (0..size).map(move |i| TorusPoint {
        q: Rational64::new(i, size),
        p: zero,
    });
    Ok(EscapeHistogram::from_points(points, tmax))
}

/// A finite union of disjoint grid intervals `[n/3^depth, (n+1)/3^depth)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalCover {
    depth: u32,
    /// Sorted, distinct numerators of the left endpoints.
    numerators: Vec<u64>,
}

pub const MAX_COVER_DEPTH: u32 = 20;

impl IntervalCover {
    pub fn new(depth: u32, mut numerators: Vec<u64>) -> Result<Self> {
        if depth > MAX_COVER_DEPTH {
            return Err(Error::InvalidArgument(format!(
                "cover depth {depth} exceeds the supported maximum {MAX_COVER_DEPTH}"
            )));
        }
        numerators.sort_unstable();
        numerators.dedup();
        let boxes = 3u64.pow(depth);
        if numerators.last().is_some_and(|&n| n >= boxes) {
            return Err(Error::InvalidArgument(format!(
                "interval numerator out of range for depth {depth}"
            )));
        }
        Ok(Self { depth, numerators })
    }

    /// Every interval of the given depth, i.e. `[0,1)` itself.
    pub fn full(depth: u32) -> Result<Self> {
        Self::new(depth, (0..3u64.pow(depth)).collect())
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn numerators(&self) -> &[u64] {
        &self.numerators
    }

    /// Interval width `3^{-depth}`.
    pub fn width(&self) -> Rational64 {
        Rational64::new(1, 3i64.pow(self.depth))
    }

    /// `(left endpoint, width)` in exact arithmetic.
    pub fn intervals(&self) -> impl Iterator<Item = (Rational64, Rational64)> + '_ {
        let denom = 3i64.pow(self.depth);
        self.numerators
            .iter()
            .map(move |&n| (Rational64::new(n as i64, denom), Rational64::new(1, denom)))
    }

    /// Splits every interval in three and keeps the outer thirds.
    pub fn refine(&self) -> Result<Self> {
        let numerators = self
            .numerators
            .iter()
            .flat_map(|&n| [3 * n, 3 * n + 2])
            .collect();
        Self::new(self.depth + 1, numerators)
    }

    /// Number of grid boxes of size `3^{-scale}` meeting the cover.
    pub fn box_count(&self, scale: u32) -> usize {
        assert!(scale <= self.depth);
        let coarsen = 3u64.pow(self.depth - scale);
        let mut count = 0;
        let mut last = None;
        for &n in &self.numerators {
            let b = n / coarsen;
            if last != Some(b) {
                count += 1;
                last = Some(b);
            }
        }
        count
    }
}

/// Depth-`depth` approximation of `Can`: points whose first `depth`
/// forward digits avoid 1, so `Γ₋ ≈ cover × [0,1)`.
pub fn trapped_cover(depth: u32) -> Result<IntervalCover> {
    let mut cover = IntervalCover::new(0, vec![0])?;
    for _ in 0..depth {
        cover = cover.refine()?;
    }
    Ok(cover)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionEstimate {
    pub value: f64,
    pub residual: f64,
    /// Box sizes `3^{-s}` used in the fit.
    pub scales: Vec<f64>,
}

/// Least-squares slope of `log count` against `log(1/ε)` for `ε = 3^{-1} … 3^{-depth}`.
pub fn box_dimension(cover: &IntervalCover) -> Result<DimensionEstimate> {
    if cover.depth() < 2 {
        return Err(Error::InsufficientData(format!(
            "box counting needs at least 2 scales, cover has depth {}",
            cover.depth()
        )));
    }
    if cover.is_empty() {
        return Err(Error::InsufficientData("empty cover".into()));
    }
    let ln3 = 3f64.ln();
    let levels: Vec<u32> = (1..=cover.depth()).collect();
    let xs: Vec<f64> = levels.iter().map(|&s| s as f64 * ln3).collect();
    let ys: Vec<f64> = levels
        .iter()
        .map(|&s| (cover.box_count(s) as f64).ln())
        .collect();
    let fit = fit_line(&xs, &ys)?;
    Ok(DimensionEstimate {
        value: fit.slope,
        residual: fit.rms_residual,
        scales: levels.iter().map(|&s| 3f64.powi(-(s as i32))).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn rpoint(q: (i64, i64), p: (i64, i64)) -> TorusPoint<Rational64> {
        TorusPoint::new(rat(q.0, q.1), rat(p.0, p.1)).unwrap()
    }

    #[test]
    fn closed_step_examples() {
        assert_eq!(closed_step(rpoint((0, 1), (0, 1))), rpoint((0, 1), (0, 1)));
        assert_eq!(closed_step(rpoint((1, 9), (0, 1))), rpoint((1, 3), (0, 1)));
        assert_eq!(closed_step(rpoint((1, 2), (1, 2))), rpoint((1, 2), (1, 2)));
        let x = closed_step(TorusPoint::new(1.0 / 9.0, 0.0).unwrap());
        assert!((x.q() - 1.0 / 3.0).abs() < 1e-15 && x.p() == 0.0);
    }

    #[test]
    fn open_step_examples() {
        assert_eq!(open_step(TorusPoint::new(0.5, 0.9).unwrap()), None);
        assert_eq!(open_step(rpoint((0, 1), (0, 1))), Some(rpoint((0, 1), (0, 1))));
        assert_eq!(open_step(rpoint((8, 9), (1, 3))), Some(rpoint((2, 3), (7, 9))));
    }

    #[test]
    fn inverse_open_step_examples() {
        assert_eq!(inverse_open_step(rpoint((0, 1), (0, 1))), Some(rpoint((0, 1), (0, 1))));
        assert_eq!(inverse_open_step(rpoint((2, 3), (7, 9))), Some(rpoint((8, 9), (1, 3))));
        assert_eq!(inverse_open_step(TorusPoint::new(0.1, 0.5).unwrap()), None);
    }

    #[test]
    fn discontinuity_lines_follow_half_open_branches() {
        assert_eq!(rpoint((1, 3), (0, 1)).rectangle(), 1);
        assert_eq!(rpoint((2, 3), (0, 1)).rectangle(), 2);
        assert_eq!(closed_step(rpoint((1, 3), (0, 1))), rpoint((0, 1), (1, 3)));
        assert_eq!(closed_step(rpoint((2, 3), (0, 1))), rpoint((0, 1), (2, 3)));
    }

    #[test]
    fn rejects_points_off_the_torus() {
        assert!(TorusPoint::new(1.0, 0.0).is_err());
        assert!(TorusPoint::new(0.0, -0.1).is_err());
    }

    #[test]
    fn encode_examples() {
        let w = encode(rpoint((1, 3), (0, 1)), 2);
        assert_eq!(w.forward(), &[1, 0]);
        assert_eq!(w.backward(), vec![0, 0]);
        let w = encode(rpoint((8, 9), (0, 1)), 2);
        assert_eq!(w.forward(), &[2, 2]);
        let w = encode(TorusPoint::new(0.5, 0.5).unwrap(), 3);
        assert_eq!(w.forward(), &[1, 1, 1]);
        assert_eq!(w.backward(), vec![1, 1, 1]);
        assert_eq!(w.to_string(), "111·111");
    }

    #[test]
    fn decode_is_within_one_cell() {
        let x = TorusPoint::new(0.71234, 0.20931).unwrap();
        let depth = 8;
        let y: TorusPoint<f64> = encode(x, depth).decode();
        let cell = 3f64.powi(-(depth as i32));
        assert!((x.q() - y.q()).abs() < cell && x.q() >= y.q());
        assert!((x.p() - y.p()).abs() < cell && x.p() >= y.p());
    }

    #[test]
    fn shift_consistency_examples() {
        assert!(shift_consistency(rpoint((1, 9), (0, 1)), 3));
        assert!(shift_consistency(TorusPoint::new(0.5, 0.5).unwrap(), 3));
        assert!(shift_consistency(rpoint((5, 9), (1, 3)), 3));
    }

    #[test]
    fn symbol_word_validation() {
        assert!(SymbolWord::new(vec![0, 3], 1).is_err());
        assert!(SymbolWord::new(vec![0, 1], 3).is_err());
        let w = SymbolWord::new(vec![2, 0, 1], 1).unwrap();
        assert_eq!(w.forward(), &[0, 1]);
        assert_eq!(w.backward(), vec![2]);
    }

    #[test]
    fn escape_time_examples() {
        assert_eq!(
            escape_time(TorusPoint::new(0.5, 0.5).unwrap(), 0),
            EscapeResult::Escaped { time: 0 }
        );
        assert_eq!(escape_time(rpoint((0, 1), (0, 1)), 100), EscapeResult::Survived);
        assert_eq!(
            escape_time(rpoint((4, 27), (0, 1)), 10),
            EscapeResult::Escaped { time: 1 }
        );
    }

    #[test]
    fn trapped_cover_examples() {
        assert_eq!(trapped_cover(0).unwrap().numerators(), &[0]);
        let c1 = trapped_cover(1).unwrap();
        let lefts: Vec<_> = c1.intervals().map(|(l, _)| l).collect();
        assert_eq!(lefts, vec![rat(0, 1), rat(2, 3)]);
        assert_eq!(c1.width(), rat(1, 3));
        let c2 = trapped_cover(2).unwrap();
        assert_eq!(c2.numerators(), &[0, 2, 6, 8]);
        assert_eq!(trapped_cover(7).unwrap().len(), 128);
    }

    #[test]
    fn box_dimension_examples() {
        let d = box_dimension(&trapped_cover(10).unwrap()).unwrap();
        assert!((d.value - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!(d.residual < 1e-12);
        assert_eq!(d.scales.len(), 10);

        let full = box_dimension(&IntervalCover::full(6).unwrap()).unwrap();
        assert!((full.value - 1.0).abs() < 1e-12);

        let single = box_dimension(&IntervalCover::new(6, vec![0]).unwrap()).unwrap();
        assert!(single.value.abs() < 1e-12);

        assert!(box_dimension(&trapped_cover(1).unwrap()).is_err());
    }

    #[test]
    fn cover_rejects_out_of_range() {
        assert!(IntervalCover::new(2, vec![9]).is_err());
        assert!(IntervalCover::new(MAX_COVER_DEPTH + 1, vec![0]).is_err());
    }

    #[test]
    fn grid_survivors_follow_two_thirds_law() {
        let h = grid_escape_histogram(3i64.pow(6), 8).unwrap();
        for t in 0..=6 {
            assert_eq!(h.survivors_at(t), 2usize.pow(t as u32) * 3usize.pow(6 - t as u32));
        }
    }
}
