//! Classical and quantum 3-baker maps, their resonance spectra and the
//! Walsh-quantized toy model.
//!
//! * [`classical`]: the closed and open maps on the torus, symbolic coding,
//!   escape times and the Cantor trapped set.
//! * [`quantum`]: the unitary `B_N` and subunitary `C_N`, dense and
//!   matrix-free through FFTs, plus the parity decomposition.
//! * [`walsh`]: the qutrit-factorized toy `C̃_N` with its exact spectrum.
//! * [`spectral`]: eigenvalue records, counting functions, Weyl fits and
//!   shape functions.
//! * [`io`]: CSV, JSON and binary matrix formats.

pub mod classical;
pub mod eigen;
pub mod fit;
pub mod io;
pub mod matrix;
pub mod quantum;
pub mod spectral;
pub mod svd;
pub mod walsh;

pub use matrix::{ComplexMatrix, StateVector, C64};
pub use quantum::{BakerOperator, Parity, PlanckIndex, Scheme};

/// `log 2 / log 3`, the dimension of the middle-thirds Cantor set.
pub const LOG2_LOG3: f64 = 0.630_929_753_571_457_4;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("N = {0} is not divisible by 3")]
    NotDivisibleByThree(usize),
    #[error("parity symmetry requires the antiperiodic quantization scheme")]
    ParityRequiresAntiperiodic,
    #[error("eigensolver did not converge after {iterations} iterations ({active} eigenvalues unresolved)")]
    NonConvergence { iterations: usize, active: usize },
    #[error("input contains NaN or infinite entries")]
    NonFinite,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("numerical spectrum for k = {k} does not match the analytic lattice (distance {distance:e})")]
    SpectrumMismatch { k: u32, distance: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    #[test]
    fn log_ratio_constant() {
        assert!((super::LOG2_LOG3 - 2f64.ln() / 3f64.ln()).abs() < 1e-16);
    }
}
