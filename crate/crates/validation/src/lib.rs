//! Shared helpers for the end-to-end acceptance suite in `tests/acceptance.rs`.

use std::io::Write;
use std::sync::OnceLock;

use bakerspec::matrix::{ComplexMatrix, C64};
use bakerspec::spectral::{MapKind, SpectrumRecord};
use bakerspec::{PlanckIndex, Scheme};

/// Writes one verdict line past the test harness's output capture, so a
/// full `cargo test` log shows every criterion, and returns `ok`.
pub fn report(name: &str, ok: bool, detail: &str) -> bool {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{verdict} {name}: {detail}");
    let _ = out.flush();
    ok
}

/// Informational line that does not gate anything.
pub fn note(name: &str, detail: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "INFO {name}: {detail}");
    let _ = out.flush();
}

/// `max |(A†A − I)_{ij}|`, using the Hermitian symmetry of the Gram matrix.
pub fn gram_distance_to_identity(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let dot: C64 = cols[i].iter().zip(&cols[j]).map(|(x, y)| x.conj() * y).sum();
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((dot - target).norm());
        }
    }
    worst
}

/// Planck indices `27·3^j`, `j = 0…4`.
pub const WEYL_SEQUENCE: [usize; 5] = [27, 81, 243, 729, 2187];

/// Open-baker spectra along [`WEYL_SEQUENCE`] in the plain scheme,
/// computed once per test binary.
pub fn open_baker_sequence() -> &'static [SpectrumRecord] {
    static CELL: OnceLock<Vec<SpectrumRecord>> = OnceLock::new();
    CELL.get_or_init(|| {
        WEYL_SEQUENCE
            .iter()
            .map(|&n| {
                let index = PlanckIndex::new(n, Scheme::Plain).expect("N divisible by 3");
                SpectrumRecord::compute(MapKind::OpenBaker, index).expect("eigensolve converges")
            })
            .collect()
    })
}
