//! Quantization of the baker maps on the torus at `ħ = (2πN)⁻¹`.
//!
//! All matrices live in the position basis `{Q_j}`. The discrete Fourier
//! transform is `(F_N)_{kj} = N^{-1/2} exp(-2πi (k+a)(j+b)/N)` with
//! offsets `a, b ∈ {0, 1/2}`; the [`Scheme`] picks the offsets used in
//! every Fourier factor.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::matrix::{ComplexMatrix, StateVector, C64, ZERO};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Offsets `(0, 0)`.
    Plain,
    /// Offsets `(1/2, 1/2)`: antiperiodic boundary conditions, parity covariant.
    Antiperiodic,
}

impl Scheme {
    /// Offset in units of 1/2.
    pub fn half_offset(self) -> u8 {
        match self {
            Scheme::Plain => 0,
            Scheme::Antiperiodic => 1,
        }
    }

    pub fn offset(self) -> f64 {
        self.half_offset() as f64 / 2.0
    }

    pub fn code(self) -> u8 {
        self.half_offset()
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Scheme::Plain),
            1 => Ok(Scheme::Antiperiodic),
            other => Err(Error::Parse(format!("unknown scheme code {other}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Plain => "plain",
            Scheme::Antiperiodic => "antiperiodic",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Scheme::Plain),
            "antiperiodic" => Ok(Scheme::Antiperiodic),
            other => Err(Error::Parse(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Hilbert-space dimension `N` (with `3 | N`) and quantization scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PlanckIndex {
    n: usize,
    scheme: Scheme,
}

impl PlanckIndex {
    pub fn new(n: usize, scheme: Scheme) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(3) {
            return Err(Error::NotDivisibleByThree(n));
        }
        Ok(Self { n, scheme })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn hbar(&self) -> f64 {
        1.0 / (2.0 * PI * self.n as f64)
    }

    /// Position indices of the hole `[N/3, 2N/3)`.
    pub fn hole(&self) -> std::ops::Range<usize> {
        self.n / 3..2 * self.n / 3
    }
}

/// `exp(-2πi m / denom)` with `m` reduced modulo `denom` first.
fn unit_phase(m: i64, denom: i64) -> C64 {
    let r = m.rem_euclid(denom);
    C64::from_polar(1.0, -2.0 * PI * r as f64 / denom as f64)
}

fn half_units(offset: f64) -> Result<i64> {
    if offset == 0.0 {
        Ok(0)
    } else if offset == 0.5 {
        Ok(1)
    } else {
        Err(Error::InvalidArgument(format!(
            "Fourier offsets must be 0 or 1/2, got {offset}"
        )))
    }
}

/// Dense `F_N` with entries `N^{-1/2} exp(-2πi (k+offset_k)(j+offset_j)/N)`.
pub fn dft_matrix(n: usize, offset_k: f64, offset_j: f64) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("DFT dimension must be positive".into()));
    }
    let (a, b) = (half_units(offset_k)?, half_units(offset_j)?);
    let denom = 4 * n as i64;
    let norm = 1.0 / (n as f64).sqrt();
    Ok(ComplexMatrix::from_fn(n, |k, j| {
        let m = (2 * k as i64 + a) * (2 * j as i64 + b);
        unit_phase(m, denom) * norm
    }))
}

/// Fast unitary Fourier transform with the offsets of a [`Scheme`].
///
/// Built on a plain FFT with phase twists before and after.
#[derive(Clone)]
pub struct Fourier {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `exp(-2πi a j / N)`, applied to the input.
    pre: Vec<C64>,
    /// `exp(-2πi b (k + a) / N)`, applied to the output.
    post: Vec<C64>,
}

impl fmt::Debug for Fourier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}

impl Fourier {
    pub fn new(n: usize, scheme: Scheme) -> Self {
        assert!(n > 0, "Fourier dimension must be positive");
        let mut planner = FftPlanner::new();
        let a = scheme.half_offset() as i64;
        let b = a;
        let denom = 4 * n as i64;
        let pre = (0..n as i64).map(|j| unit_phase(2 * a * j, denom)).collect();
        let post = (0..n as i64)
            .map(|k| unit_phase(b * (2 * k + a), denom))
            .collect();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            pre,
            post,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In place `x ← F_N x`.
    pub fn forward(&self, x: &mut [C64]) {
        assert_eq!(x.len(), self.n);
        let norm = 1.0 / (self.n as f64).sqrt();
        for (v, t) in x.iter_mut().zip(&self.pre) {
            *v *= t;
        }
        self.forward.process(x);
        for (v, t) in x.iter_mut().zip(&self.post) {
            *v *= t * norm;
        }
    }

    /// In place `x ← F_N⁻¹ x = F_N† x`.
    pub fn inverse(&self, x: &mut [C64]) {
        assert_eq!(x.len(), self.n);
        let norm = 1.0 / (self.n as f64).sqrt();
        for (v, t) in x.iter_mut().zip(&self.post) {
            *v *= t.conj();
        }
        self.inverse.process(x);
        for (v, t) in x.iter_mut().zip(&self.pre) {
            *v *= t.conj() * norm;
        }
    }
}

/// Matrix-free `B_N` and `C_N` for one [`PlanckIndex`].
#[derive(Clone, Debug)]
pub struct BakerOperator {
    index: PlanckIndex,
    full: Fourier,
    third: Fourier,
    open: bool,
}

impl BakerOperator {
    pub fn closed(index: PlanckIndex) -> Self {
        Self::build(index, false)
    }

    pub fn open(index: PlanckIndex) -> Self {
        Self::build(index, true)
    }

    fn build(index: PlanckIndex, open: bool) -> Self {
        Self {
            index,
            full: Fourier::new(index.n, index.scheme),
            third: Fourier::new(index.n / 3, index.scheme),
            open,
        }
    }

    pub fn index(&self) -> PlanckIndex {
        self.index
    }

    /// `x ← F_N⁻¹ blockdiag(F_{N/3}, F_{N/3} or 0, F_{N/3}) x`.
    pub fn apply_in_place(&self, x: &mut [C64]) {
        let n = self.index.n;
        assert_eq!(x.len(), n, "state dimension differs from N");
        let m = n / 3;
        for (b, block) in x.chunks_mut(m).enumerate() {
            if b == 1 && self.open {
                block.fill(ZERO);
            } else {
                self.third.forward(block);
            }
        }
        self.full.inverse(x);
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if v.dim() != self.index.n {
            return Err(Error::DimensionMismatch {
                expected: self.index.n,
                found: v.dim(),
            });
        }
        let mut x = v.amplitudes().to_vec();
        self.apply_in_place(&mut x);
        Ok(StateVector::new(x))
    }

    /// Dense matrix assembled column by column from the fast transform.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let n = self.index.n;
        let mut out = ComplexMatrix::zeros(n);
        let mut col = vec![ZERO; n];
        for j in 0..n {
            if self.open && self.index.hole().contains(&j) {
                continue;
            }
            col.fill(ZERO);
            col[j] = C64::new(1.0, 0.0);
            self.apply_in_place(&mut col);
            for (i, &z) in col.iter().enumerate() {
                out[(i, j)] = z;
            }
        }
        out
    }
}

/// The unitary closed baker `B_N = F_N⁻¹ blockdiag(F_{N/3}, F_{N/3}, F_{N/3})`.
pub fn closed_baker_matrix(index: PlanckIndex) -> ComplexMatrix {
    BakerOperator::closed(index).to_matrix()
}

/// The subunitary open baker `C_N = F_N⁻¹ blockdiag(F_{N/3}, 0, F_{N/3})`.
///
/// Hole columns `j ∈ [N/3, 2N/3)` are exactly zero.
pub fn open_baker_matrix(index: PlanckIndex) -> ComplexMatrix {
    BakerOperator::open(index).to_matrix()
}

/// `C_N v` in `O(N log N)`.
pub fn apply_open_baker(index: PlanckIndex, v: &StateVector) -> Result<StateVector> {
    BakerOperator::open(index).apply(v)
}

/// Reference construction of the baker matrices from dense Fourier
/// matrices; slow, used to cross-check the FFT path.
pub fn dense_baker_matrix(index: PlanckIndex, open: bool) -> ComplexMatrix {
    let off = index.scheme.offset();
    let full = dft_matrix(index.n, off, off).expect("valid offsets");
    let third = dft_matrix(index.n / 3, off, off).expect("valid offsets");
    let zero = ComplexMatrix::zeros(index.n / 3);
    let middle = if open { &zero } else { &third };
    let blocks = ComplexMatrix::block_diag(&[&third, middle, &third]);
    full.adjoint().matmul(&blocks)
}

fn require_antiperiodic(index: PlanckIndex) -> Result<()> {
    match index.scheme {
        Scheme::Antiperiodic => Ok(()),
        Scheme::Plain => Err(Error::ParityRequiresAntiperiodic),
    }
}

/// The involution `Q_j ↦ Q_{N-1-j}`.
pub fn parity_operator(index: PlanckIndex) -> Result<ComplexMatrix> {
    require_antiperiodic(index)?;
    let n = index.n;
    Ok(ComplexMatrix::from_fn(n, |i, j| {
        if i + j + 1 == n {
            C64::new(1.0, 0.0)
        } else {
            ZERO
        }
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
}

/// Orthonormal parity eigenbasis, each vector as sparse `(index, coefficient)` terms.
pub fn parity_basis(n: usize, parity: Parity) -> Vec<Vec<(usize, f64)>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis: Vec<Vec<(usize, f64)>> = (0..n / 2)
        .map(|j| match parity {
            Parity::Even => vec![(j, s), (n - 1 - j, s)],
            Parity::Odd => vec![(j, s), (n - 1 - j, -s)],
        })
        .collect();
    if n % 2 == 1 && parity == Parity::Even {
        basis.push(vec![(n / 2, 1.0)]);
    }
    basis
}

/// `Eᵀ A E` for a real orthonormal sparse basis `E`.
pub fn compress(a: &ComplexMatrix, basis: &[Vec<(usize, f64)>]) -> ComplexMatrix {
    ComplexMatrix::from_fn(basis.len(), |r, c| {
        let mut acc = ZERO;
        for &(i, ci) in &basis[r] {
            for &(j, cj) in &basis[c] {
                acc += a[(i, j)] * (ci * cj);
            }
        }
        acc
    })
}

/// `C_N` compressed to the even and odd parity eigenspaces.
pub fn parity_blocks(index: PlanckIndex) -> Result<(ComplexMatrix, ComplexMatrix)> {
    require_antiperiodic(index)?;
    let c = open_baker_matrix(index);
    Ok((
        compress(&c, &parity_basis(index.n, Parity::Even)),
        compress(&c, &parity_basis(index.n, Parity::Odd)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(n: usize) -> PlanckIndex {
        PlanckIndex::new(n, Scheme::Plain).unwrap()
    }

    fn anti(n: usize) -> PlanckIndex {
        PlanckIndex::new(n, Scheme::Antiperiodic).unwrap()
    }

    #[test]
    fn planck_index_requires_multiple_of_three() {
        assert!(matches!(
            PlanckIndex::new(10, Scheme::Plain),
            Err(Error::NotDivisibleByThree(10))
        ));
        assert!(PlanckIndex::new(0, Scheme::Plain).is_err());
        assert!((plain(3).hbar() - 1.0 / (6.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn dft_small_cases() {
        let f1 = dft_matrix(1, 0.0, 0.0).unwrap();
        assert_eq!(f1.dim(), 1);
        assert!((f1[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);

        let f3 = dft_matrix(3, 0.0, 0.0).unwrap();
        let omega = C64::from_polar(1.0, 2.0 * PI / 3.0);
        for k in 0..3 {
            for j in 0..3 {
                let expected = omega.powi(-((k * j) as i32)) / 3f64.sqrt();
                assert!((f3[(k, j)] - expected).norm() < 1e-15);
            }
        }
        assert!(dft_matrix(3, 0.25, 0.0).is_err());
    }

    #[test]
    fn dft_is_unitary_for_both_offsets() {
        for off in [0.0, 0.5] {
            let f = dft_matrix(243, off, off).unwrap();
            assert!(f.adjoint().matmul(&f).distance_to_identity() < 1e-13);
        }
    }

    #[test]
    fn fast_fourier_matches_dense() {
        for scheme in [Scheme::Plain, Scheme::Antiperiodic] {
            let n = 27;
            let fast = Fourier::new(n, scheme);
            let dense = dft_matrix(n, scheme.offset(), scheme.offset()).unwrap();
            let x: Vec<C64> = (0..n).map(|i| C64::new((i as f64).sin(), (3.0 * i as f64).cos())).collect();
            let mut y = x.clone();
            fast.forward(&mut y);
            assert!(crate::matrix::max_abs_diff(&y, &dense.matvec(&x)) < 1e-13);
            fast.inverse(&mut y);
            assert!(crate::matrix::max_abs_diff(&y, &x) < 1e-13);
        }
    }

    #[test]
    fn closed_baker_n3_is_inverse_fourier() {
        let b = closed_baker_matrix(plain(3));
        let f3 = dft_matrix(3, 0.0, 0.0).unwrap();
        assert!(b.max_abs_diff(&f3.adjoint()) < 1e-15);
    }

    #[test]
    fn closed_baker_n9_is_unitary_and_matches_dense() {
        for idx in [plain(9), anti(9)] {
            let b = closed_baker_matrix(idx);
            assert!(b.adjoint().matmul(&b).distance_to_identity() < 1e-13);
            assert!(b.max_abs_diff(&dense_baker_matrix(idx, false)) < 1e-14);
        }
    }

    #[test]
    fn open_baker_small_cases() {
        let c3 = open_baker_matrix(plain(3));
        let f3 = dft_matrix(3, 0.0, 0.0).unwrap();
        let mut proj = ComplexMatrix::identity(3);
        proj[(1, 1)] = ZERO;
        assert!(c3.max_abs_diff(&f3.adjoint().matmul(&proj)) < 1e-15);

        let idx = plain(9);
        let c = open_baker_matrix(idx);
        assert!(c.max_abs_diff(&dense_baker_matrix(idx, true)) < 1e-14);
        for j in idx.hole() {
            assert!(c.column(j).iter().all(|z| *z == ZERO));
        }
    }

    #[test]
    fn apply_matches_columns() {
        let idx = plain(9);
        let c = open_baker_matrix(idx);
        let out = apply_open_baker(idx, &StateVector::basis(9, 0)).unwrap();
        assert!(crate::matrix::max_abs_diff(out.amplitudes(), &c.column(0)) < 1e-15);
        let out = apply_open_baker(idx, &StateVector::basis(9, 3)).unwrap();
        assert!(out.norm() == 0.0);
        assert!(apply_open_baker(idx, &StateVector::zeros(8)).is_err());
    }

    #[test]
    fn parity_requires_antiperiodic() {
        assert!(matches!(
            parity_operator(plain(9)),
            Err(Error::ParityRequiresAntiperiodic)
        ));
        assert!(parity_blocks(plain(9)).is_err());
    }

    #[test]
    fn parity_is_an_involution_commuting_with_baker() {
        let idx = anti(9);
        let p = parity_operator(idx).unwrap();
        assert_eq!(p.matmul(&p), ComplexMatrix::identity(9));
        let b = closed_baker_matrix(idx);
        let c = open_baker_matrix(idx);
        assert!(p.matmul(&b).max_abs_diff(&b.matmul(&p)) < 1e-12);
        assert!(p.matmul(&c).max_abs_diff(&c.matmul(&p)) < 1e-12);
    }

    #[test]
    fn parity_basis_dimensions() {
        assert_eq!(parity_basis(9, Parity::Even).len(), 5);
        assert_eq!(parity_basis(9, Parity::Odd).len(), 4);
        assert_eq!(parity_basis(6, Parity::Even).len(), 3);
        let (even, odd) = parity_blocks(anti(9)).unwrap();
        assert_eq!(even.dim() + odd.dim(), 9);
    }
}
