//! The Walsh-quantized toy baker `C̃_N`.
//!
//! For `N = 3^k` the Hilbert space factors as `(ℂ³)^{⊗k}` through the
//! ternary digits of the position index, `j/N = 0·ε₀ε₁…ε_{k−1}`, with
//! `ε₀` the most significant digit. On product states the toy map acts as
//!
//! ```text
//! C̃ (v₀ ⊗ v₁ ⊗ … ⊗ v_{k−1}) = v₁ ⊗ … ⊗ v_{k−1} ⊗ M v₀,   M = F₃⁻¹ π₀₂
//! ```
//!
//! In the eigenbasis `{f₊, f₋, e₁}` of `M` this is a weighted cyclic shift
//! of words in `{+, −, 0}^k`. Words containing a `0` die within `k` steps;
//! a cyclic orbit of a `±` word of primitive period `d` with `a` plus
//! signs per period contributes the `d` roots of `z^d = λ₊^a λ₋^{d−a}`
//! once each. That gives the multiplicities of every lattice point
//! `e^{2πij/k} λ₊^{1−p/k} λ₋^{p/k}` by counting necklaces, which is what
//! [`analytic_spectrum`] does. [`measured_spectrum`] cross-checks the
//! count against a dense eigensolve.

use std::f64::consts::PI;

use crate::eigen::eigenvalues;
use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::quantum::dft_matrix;
use crate::spectral::bottleneck_distance;
use crate::{Error, Result};

/// A 3×3 complex matrix acting on one qutrit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QutritFactorMatrix {
    pub entries: [[C64; 3]; 3],
}

impl QutritFactorMatrix {
    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(3, |i, j| self.entries[i][j])
    }

    pub fn apply(&self, v: [C64; 3]) -> [C64; 3] {
        let mut out = [ZERO; 3];
        for (o, row) in out.iter_mut().zip(&self.entries) {
            *o = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn trace(&self) -> C64 {
        self.entries[0][0] + self.entries[1][1] + self.entries[2][2]
    }
}

/// `F₃⁻¹ π₀₂` and its nonzero eigenvalues `λ₊`, `λ₋` (`|λ₊| > |λ₋|`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoreMatrix {
    pub matrix: QutritFactorMatrix,
    pub lambda_plus: C64,
    pub lambda_minus: C64,
}

impl CoreMatrix {
    /// `|λ₊ λ₋|^{1/2}`, the radius the spectrum concentrates on.
    pub fn mid_radius(&self) -> f64 {
        (self.lambda_plus * self.lambda_minus).norm().sqrt()
    }

    /// `λ₊^{1−p/k} λ₋^{p/k}` with principal logarithms.
    pub fn lattice_radius_value(&self, p: usize, k: usize) -> C64 {
        let t = p as f64 / k as f64;
        ((1.0 - t) * self.lambda_plus.ln() + t * self.lambda_minus.ln()).exp()
    }

    pub fn lattice_value(&self, p: usize, j: usize, k: usize) -> C64 {
        C64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64) * self.lattice_radius_value(p, k)
    }
}

pub fn core_matrix() -> CoreMatrix {
    let f3 = dft_matrix(3, 0.0, 0.0).expect("valid offsets");
    let mut proj = ComplexMatrix::identity(3);
    proj[(1, 1)] = ZERO;
    let m = f3.adjoint().matmul(&proj);
    let mut entries = [[ZERO; 3]; 3];
    for (i, row) in entries.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = m[(i, j)];
        }
    }
    let mut values = eigenvalues(&m).expect("3×3 eigensolve").values;
    values.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    CoreMatrix {
        matrix: QutritFactorMatrix { entries },
        lambda_plus: values[0],
        lambda_minus: values[1],
    }
}

/// Ternary digits `(ε₀, …, ε_{k−1})` of `index`, most significant first.
pub fn digits(index: usize, k: u32) -> Vec<u8> {
    let mut out = vec![0u8; k as usize];
    let mut x = index;
    for d in out.iter_mut().rev() {
        *d = (x % 3) as u8;
        x /= 3;
    }
    out
}

/// The Walsh transform `W_{3^k}`.
pub fn walsh_matrix(k: u32) -> Result<ComplexMatrix> {
    if k == 0 {
        return Err(Error::InvalidArgument("Walsh transform needs k ≥ 1".into()));
    }
    let n = 3usize.pow(k);
    let digit_table: Vec<Vec<u8>> = (0..n).map(|j| digits(j, k)).collect();
    let norm = 3f64.powf(-(k as f64) / 2.0);
    let omega: Vec<C64> = (0..3)
        .map(|e| C64::from_polar(norm, -2.0 * PI * e as f64 / 3.0))
        .collect();
    let kk = k as usize;
    Ok(ComplexMatrix::from_fn(n, |j, jp| {
        let (a, b) = (&digit_table[j], &digit_table[jp]);
        let s: u32 = (0..kk).map(|l| a[l] as u32 * b[kk - 1 - l] as u32).sum();
        omega[(s % 3) as usize]
    }))
}

/// The toy matrix `C̃_N` for any `N` divisible by 3.
///
/// A column `m` in the first third feeds rows `3m + r` with `3^{-1/2}`; a
/// column in the last third feeds rows `3(m − 2N/3) + r` with
/// `3^{-1/2} ω^{2r}`, `ω = e^{2πi/3}`. Middle columns are zero.
pub fn toy_matrix(n: usize) -> Result<ComplexMatrix> {
    if n == 0 || !n.is_multiple_of(3) {
        return Err(Error::NotDivisibleByThree(n));
    }
    let third = n / 3;
    let s = 1.0 / 3f64.sqrt();
    let mut out = ComplexMatrix::zeros(n);
    for m in 0..third {
        for r in 0..3 {
            out[(3 * m + r, m)] = C64::new(s, 0.0);
            out[(3 * m + r, m + 2 * third)] = C64::from_polar(s, 2.0 * PI * (2 * r) as f64 / 3.0);
        }
    }
    Ok(out)
}

/// Amplitudes on `(ℂ³)^{⊗k}` indexed by digit strings, `ε₀` most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorState {
    k: u32,
    amplitudes: Vec<C64>,
}

impl TensorState {
    pub fn new(k: u32, amplitudes: Vec<C64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("tensor states need k ≥ 1".into()));
        }
        let n = 3usize.pow(k);
        if amplitudes.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: amplitudes.len(),
            });
        }
        Ok(Self { k, amplitudes })
    }

    /// `v₀ ⊗ v₁ ⊗ … ⊗ v_{k−1}`.
    pub fn product(factors: &[[C64; 3]]) -> Result<Self> {
        let mut amplitudes = vec![ONE];
        for f in factors {
            amplitudes = amplitudes
                .iter()
                .flat_map(|a| f.iter().map(move |b| a * b))
                .collect();
        }
        Self::new(factors.len() as u32, amplitudes)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }
}

/// `C̃` on a tensor state: drop the leading qutrit, append `M v₀` at the end.
pub fn toy_apply(state: &TensorState) -> TensorState {
    toy_apply_with(&core_matrix().matrix, state)
}

pub fn toy_apply_with(m: &QutritFactorMatrix, state: &TensorState) -> TensorState {
    let n = state.amplitudes.len();
    let rest = n / 3;
    let mut out = vec![ZERO; n];
    for r in 0..rest {
        let v = [
            state.amplitudes[r],
            state.amplitudes[rest + r],
            state.amplitudes[2 * rest + r],
        ];
        let w = m.apply(v);
        out[3 * r..3 * r + 3].copy_from_slice(&w);
    }
    TensorState {
        k: state.k,
        amplitudes: out,
    }
}

/// `M^{⊗k}`.
pub fn core_tensor_power(k: u32) -> ComplexMatrix {
    let m = core_matrix().matrix.to_matrix();
    let mut out = ComplexMatrix::identity(1);
    for _ in 0..k {
        out = out.kron(&m);
    }
    out
}

/// `(C̃_{3^k})^k` by repeated sparse-left multiplication.
pub fn toy_power(k: u32) -> Result<ComplexMatrix> {
    let c = toy_matrix(3usize.pow(k))?;
    let mut out = c.clone();
    for _ in 1..k {
        out = c.matmul(&out);
    }
    Ok(out)
}

pub const MAX_FACTORIZATION_K: u32 = 7;

/// Whether `(C̃_{3^k})^k = M^{⊗k}` entrywise to `1e-10`.
pub fn power_k_factorization_check(k: u32) -> Result<bool> {
    if !(1..=MAX_FACTORIZATION_K).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "factorization check supports 1 ≤ k ≤ {MAX_FACTORIZATION_K}, got {k}"
        )));
    }
    Ok(toy_power(k)?.max_abs_diff(&core_tensor_power(k)) < 1e-10)
}

/// One point of the eigenvalue lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeEigenvalue {
    pub value: C64,
    pub multiplicity: usize,
    /// Number of `λ₋` factors out of `k`; `None` for the pure `λ₊`, `λ₋` entries.
    pub p: Option<usize>,
    pub j: usize,
}

impl LatticeEigenvalue {
    pub fn radius(&self) -> f64 {
        self.value.norm()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticWalshSpectrum {
    pub k: u32,
    pub entries: Vec<LatticeEigenvalue>,
    pub zero_multiplicity: usize,
}

impl AnalyticWalshSpectrum {
    pub fn nonzero_multiplicity(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.nonzero_multiplicity() + self.zero_multiplicity
    }

    /// Nonzero eigenvalues repeated by multiplicity.
    pub fn expanded(&self) -> Vec<C64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity))
            .collect()
    }

    /// Index of the lattice point nearest to `z`.
    pub fn nearest(&self, z: C64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, e) in self.entries.iter().enumerate() {
            let d = (e.value - z).norm();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

pub const MAX_ANALYTIC_K: u32 = 24;

/// Counts, for each number `p` of minus signs and each `d | k`, the `±`
/// words of length `k` with primitive period exactly `d`.
fn words_by_content_and_period(k: u32) -> Vec<Vec<usize>> {
    let kk = k as usize;
    let mask = (1u32 << k) - 1;
    let mut table = vec![vec![0usize; kk + 1]; kk + 1];
    for w in 0u32..(1u32 << k) {
        let period = (1..=kk)
            .find(|&d| kk.is_multiple_of(d) && ((w >> d) | (w << (kk - d))) & mask == w)
            .unwrap_or(kk);
        table[w.count_ones() as usize][period] += 1;
    }
    table
}

fn ordered_lattice_value(core: &CoreMatrix, p: usize, j: usize, k: usize) -> C64 {
    if p == 0 {
        core.lambda_plus
    } else if p == k {
        core.lambda_minus
    } else {
        core.lattice_value(p, j, k)
    }
}

/// The exact nonzero spectrum of `C̃_{3^k}` with multiplicities from
/// necklace counting.
pub fn analytic_spectrum(k: u32) -> Result<AnalyticWalshSpectrum> {
    if !(1..=MAX_ANALYTIC_K).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "analytic spectrum supports 1 ≤ k ≤ {MAX_ANALYTIC_K}, got {k}"
        )));
    }
    let core = core_matrix();
    let kk = k as usize;
    let table = words_by_content_and_period(k);
    let mut entries = Vec::new();
    for (p, by_period) in table.iter().enumerate() {
        let pure = p == 0 || p == kk;
        let js = if pure { 0..1 } else { 0..kk };
        for j in js {
            // An orbit of period d supplies each d-th root of unity once;
            // e^{2πij/k} is one of them iff (k/d) | j.
            let multiplicity: usize = (1..=kk)
                .filter(|&d| kk.is_multiple_of(d) && j % (kk / d) == 0)
                .map(|d| by_period[d] / d)
                .sum();
            if multiplicity == 0 {
                continue;
            }
            entries.push(LatticeEigenvalue {
                value: ordered_lattice_value(&core, p, j, kk),
                multiplicity,
                p: if pure { None } else { Some(p) },
                j,
            });
        }
    }
    let spectrum = AnalyticWalshSpectrum {
        k,
        entries,
        zero_multiplicity: 3usize.pow(k) - 2usize.pow(k),
    };
    debug_assert_eq!(spectrum.nonzero_multiplicity(), 1usize << k);
    Ok(spectrum)
}

/// Outcome of matching a dense eigensolve of `C̃_{3^k}` to the lattice.
#[derive(Clone, Debug)]
pub struct SpectrumMatch {
    /// The lattice with multiplicities replaced by the measured counts.
    pub measured: AnalyticWalshSpectrum,
    /// Optimal bottleneck distance between the numerical nonzero spectrum
    /// and the lattice expanded by its counted multiplicities.
    pub max_distance: f64,
    /// Numerical eigenvalues with `|λ| < kernel_tol`.
    pub zero_count: usize,
}

pub const MAX_MEASURED_K: u32 = 7;

/// Diagonalizes `C̃_{3^k}` densely and matches it against [`analytic_spectrum`].
///
/// Fails with [`Error::SpectrumMismatch`] if the numerical nonzero spectrum
/// is farther than `match_tol` from the lattice, or if any measured
/// multiplicity differs from the counted one.
pub fn measured_spectrum(k: u32, kernel_tol: f64, match_tol: f64) -> Result<SpectrumMatch> {
    if !(1..=MAX_MEASURED_K).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "dense Walsh spectra support 1 ≤ k ≤ {MAX_MEASURED_K}, got {k}"
        )));
    }
    let analytic = analytic_spectrum(k)?;
    let numeric = eigenvalues(&toy_matrix(3usize.pow(k))?)?.values;
    let (zeros, nonzero): (Vec<C64>, Vec<C64>) = numeric.into_iter().partition(|z| z.norm() < kernel_tol);
    let expanded = analytic.expanded();
    let max_distance = if nonzero.len() == expanded.len() {
        bottleneck_distance(&nonzero, &expanded)?
    } else {
        f64::INFINITY
    };
    let mut measured = analytic.clone();
    for e in measured.entries.iter_mut() {
        e.multiplicity = 0;
    }
    for z in &nonzero {
        let i = analytic.nearest(*z);
        measured.entries[i].multiplicity += 1;
    }
    measured.zero_multiplicity = zeros.len();
    let counts_agree = measured
        .entries
        .iter()
        .zip(&analytic.entries)
        .all(|(a, b)| a.multiplicity == b.multiplicity);
    if max_distance >= match_tol || !counts_agree || zeros.len() != analytic.zero_multiplicity {
        return Err(Error::SpectrumMismatch {
            k,
            distance: max_distance,
        });
    }
    Ok(SpectrumMatch {
        measured,
        max_distance,
        zero_count: zeros.len(),
    })
}

/// Multiplicity-weighted radial histogram of the nonzero spectrum,
/// normalized by `2^k`, sorted by increasing radius.
pub fn radial_distribution(k: u32) -> Result<Vec<(f64, f64)>> {
    let spectrum = analytic_spectrum(k)?;
    let total = spectrum.nonzero_multiplicity() as f64;
    let mut by_p: Vec<(f64, usize)> = Vec::new();
    for e in &spectrum.entries {
        let key = match e.p {
            Some(p) => p,
            None if (e.value - core_matrix().lambda_plus).norm() < 1e-15 => 0,
            None => k as usize,
        };
        if by_p.len() <= key {
            by_p.resize(key + 1, (0.0, 0));
        }
        by_p[key].0 = e.radius();
        by_p[key].1 += e.multiplicity;
    }
    let mut out: Vec<(f64, f64)> = by_p
        .into_iter()
        .filter(|(_, m)| *m > 0)
        .map(|(r, m)| (r, m as f64 / total))
        .collect();
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(out)
}

/// Total radial weight with `|r − center| ≤ half_width`.
pub fn band_weight(distribution: &[(f64, f64)], center: f64, half_width: f64) -> f64 {
    distribution
        .iter()
        .filter(|(r, _)| (r - center).abs() <= half_width)
        .map(|(_, w)| w)
        .sum()
}
