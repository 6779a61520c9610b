use bakerspec::matrix::{ComplexMatrix, StateVector, C64, ZERO};
use bakerspec::quantum::{
    apply_open_baker, closed_baker_matrix, dense_baker_matrix, open_baker_matrix, parity_blocks, parity_operator,
    BakerOperator,
};
use bakerspec::spectral::{bottleneck_distance, full_spectrum};
use bakerspec::svd::singular_values;
use bakerspec::{PlanckIndex, Scheme};
use proptest::prelude::*;

fn index(n: usize, scheme: Scheme) -> PlanckIndex {
    PlanckIndex::new(n, scheme).unwrap()
}

fn scheme_strategy() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::Plain), Just(Scheme::Antiperiodic)]
}

fn state(amplitudes: &[(f64, f64)]) -> StateVector {
    StateVector::new(amplitudes.iter().map(|&(re, im)| C64::new(re, im)).collect())
}

fn sized_state() -> impl Strategy<Value = (usize, Vec<(f64, f64)>)> {
    prop::sample::select(vec![9usize, 27, 81, 243]).prop_flat_map(|n| {
        (Just(n), prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn open_baker_contracts((n, amps) in sized_state(), scheme in scheme_strategy()) {
        let v = state(&amps);
        let out = apply_open_baker(index(n, scheme), &v).unwrap();
        prop_assert!(out.norm() <= v.norm() + 1e-12);
    }

    #[test]
    fn open_baker_is_isometric_off_the_hole((n, amps) in sized_state(), scheme in scheme_strategy()) {
        let idx = index(n, scheme);
        let mut amps = amps;
        for j in idx.hole() {
            amps[j] = (0.0, 0.0);
        }
        let v = state(&amps);
        let out = apply_open_baker(idx, &v).unwrap();
        prop_assert!((out.norm() - v.norm()).abs() <= 1e-12);
    }

    #[test]
    fn matrix_free_agrees_with_reference((n, amps) in sized_state(), scheme in scheme_strategy()) {
        let idx = index(n, scheme);
        let v = state(&amps);
        let fast = apply_open_baker(idx, &v).unwrap();
        let slow = StateVector::new(dense_baker_matrix(idx, true).matvec(v.amplitudes()));
        prop_assert!(fast.max_abs_diff(&slow) < 1e-12);
    }

    #[test]
    fn closed_baker_preserves_norm((n, amps) in sized_state(), scheme in scheme_strategy()) {
        let v = state(&amps);
        let out = BakerOperator::closed(index(n, scheme)).apply(&v).unwrap();
        prop_assert!((out.norm() - v.norm()).abs() <= 1e-12);
    }
}

#[test]
fn fast_assembly_matches_reference_construction() {
    for scheme in [Scheme::Plain, Scheme::Antiperiodic] {
        for n in [3, 9, 12, 27, 81, 243] {
            let idx = index(n, scheme);
            assert!(closed_baker_matrix(idx).max_abs_diff(&dense_baker_matrix(idx, false)) < 1e-13);
            assert!(open_baker_matrix(idx).max_abs_diff(&dense_baker_matrix(idx, true)) < 1e-13);
        }
    }
}

#[test]
fn open_is_closed_times_projector() {
    for scheme in [Scheme::Plain, Scheme::Antiperiodic] {
        for n in [9, 27, 81, 243] {
            let idx = index(n, scheme);
            let mut projector = ComplexMatrix::identity(n);
            for j in idx.hole() {
                projector[(j, j)] = ZERO;
            }
            let product = closed_baker_matrix(idx).matmul(&projector);
            assert!(open_baker_matrix(idx).max_abs_diff(&product) < 1e-14);
        }
    }
}

#[test]
fn rank_is_two_thirds() {
    for scheme in [Scheme::Plain, Scheme::Antiperiodic] {
        for n in [9, 81, 243] {
            let sv = singular_values(&open_baker_matrix(index(n, scheme))).unwrap();
            assert_eq!(sv.iter().filter(|&&s| s > 0.5).count(), 2 * n / 3);
        }
    }
}

/// Row offset of the nearest "tilted diagonal" `n = 3m` or `n = 3(m − 2N/3)`.
fn tilted_offset(n: usize, row: usize, col: usize) -> usize {
    let target = if col < n / 3 { 3 * col } else { 3 * (col - 2 * n / 3) };
    let d = (row as isize - target as isize).rem_euclid(n as isize) as usize;
    d.min(n - d)
}

#[test]
fn large_elements_follow_tilted_diagonals() {
    let mut medians = Vec::new();
    for n in [81usize, 243, 729] {
        let c = open_baker_matrix(index(n, Scheme::Plain));
        let idx = index(n, Scheme::Plain);
        let columns: Vec<usize> = (0..n).filter(|j| !idx.hole().contains(j)).collect();
        let on_diagonal = columns
            .iter()
            .filter(|&&m| {
                let col = c.column(m);
                let argmax = (0..n).max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm())).unwrap();
                // Entries within one row of the diagonal cover the half-integer shift
                // that the scheme offset introduces.
                tilted_offset(n, argmax, m) <= 1
            })
            .count();
        assert!(on_diagonal * 10 >= columns.len() * 9, "N = {n}: {on_diagonal}/{}", columns.len());

        let mut weighted: Vec<f64> = Vec::new();
        for &m in &columns {
            for row in 0..n {
                let d = tilted_offset(n, row, m);
                if d > 1 {
                    weighted.push(c[(row, m)].norm() * d as f64);
                }
            }
        }
        weighted.sort_by(f64::total_cmp);
        medians.push(weighted[weighted.len() / 2]);
    }
    // |C_nm| ~ 1/|n − 3m|: the weighted median stays of order one as N grows.
    for (&m, n) in medians.iter().zip([81, 243, 729]) {
        assert!((0.01..10.0).contains(&m), "N = {n}: median {m}");
    }
    let spread = medians.iter().cloned().fold(0.0, f64::max) / medians.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 3.0, "medians {medians:?}");
}

#[test]
fn antiperiodic_scheme_commutes_with_parity() {
    for n in [9, 27, 81] {
        let idx = index(n, Scheme::Antiperiodic);
        let p = parity_operator(idx).unwrap();
        for m in [closed_baker_matrix(idx), open_baker_matrix(idx)] {
            assert!(p.matmul(&m).max_abs_diff(&m.matmul(&p)) < 1e-13);
        }
    }
    assert!(parity_operator(index(9, Scheme::Plain)).is_err());
}

#[test]
fn parity_blocks_carry_the_full_spectrum() {
    for n in [27, 81, 243] {
        let idx = index(n, Scheme::Antiperiodic);
        let (even, odd) = parity_blocks(idx).unwrap();
        assert_eq!(even.dim() + odd.dim(), n);
        let mut split = full_spectrum(&even).unwrap();
        split.extend(full_spectrum(&odd).unwrap());
        let whole = full_spectrum(&open_baker_matrix(idx)).unwrap();
        let d = bottleneck_distance(&whole, &split).unwrap();
        assert!(d < 1e-7, "N = {n}: matching distance {d:e}");
    }
}
