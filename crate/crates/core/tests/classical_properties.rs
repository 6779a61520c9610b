use std::collections::HashSet;

use bakerspec::classical::{
    closed_step, encode, inverse_open_step, open_step, shift_consistency, trapped_cover, IntervalCover, SymbolWord,
    TorusPoint,
};
use num_rational::Rational64;
use proptest::prelude::*;

fn rat(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// Centre of the cylinder with forward digits `fwd` and backward digits `bwd`.
fn cylinder_centre(fwd: &[u8], bwd: &[u8]) -> TorusPoint<Rational64> {
    let value = |digits: &[u8]| {
        let mut num = 0i64;
        for &d in digits {
            num = 3 * num + d as i64;
        }
        let den = 3i64.pow(digits.len() as u32);
        Rational64::new(2 * num + 1, 2 * den)
    };
    TorusPoint::new(value(fwd), value(bwd)).unwrap()
}

proptest! {
    #[test]
    fn shift_property_on_cylinder_centres(
        fwd in prop::collection::vec(0u8..3, 2..12),
        bwd in prop::collection::vec(0u8..3, 1..12),
    ) {
        let x = cylinder_centre(&fwd, &bwd);
        prop_assert!(shift_consistency(x, fwd.len()));
        let word = encode(x, fwd.len());
        prop_assert_eq!(word.forward(), &fwd[..]);
    }

    #[test]
    fn open_agrees_with_closed_off_the_hole(q in 0.0f64..1.0, p in 0.0f64..1.0) {
        let x = TorusPoint::new(q, p).unwrap();
        match open_step(x) {
            Some(y) => {
                prop_assert!(!x.in_hole());
                prop_assert_eq!(y, closed_step(x));
            }
            None => prop_assert!(x.in_hole()),
        }
    }

    #[test]
    fn inverse_is_exact_on_rationals(i in 0i64..6561, j in 0i64..6561) {
        let x = TorusPoint::new(rat(i, 6561), rat(j, 6561)).unwrap();
        if let Some(y) = open_step(x) {
            prop_assert_eq!(inverse_open_step(y), Some(x));
        }
    }

    #[test]
    fn inverse_is_accurate_in_floats(q in 0.0f64..1.0, p in 0.0f64..1.0) {
        let x = TorusPoint::new(q, p).unwrap();
        if let Some(y) = open_step(x) {
            if let Some(back) = inverse_open_step(y) {
                prop_assert!((back.q() - q).abs() <= 1e-12 && (back.p() - p).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn decoding_a_window_stays_in_its_cylinder(fwd in prop::collection::vec(0u8..3, 1..10)) {
        let word = SymbolWord::new(fwd.clone(), 0).unwrap();
        let x: TorusPoint<Rational64> = word.decode();
        let back = encode(x, fwd.len());
        prop_assert_eq!(back.forward(), &fwd[..]);
    }
}

#[test]
fn closed_step_is_a_bijection_between_ternary_grids() {
    // Centres of a 3^{-(m+1)} × 3^{-m} grid land bijectively on the centres
    // of the 3^{-m} × 3^{-(m+1)} grid.
    let m = 4u32;
    let (fine, coarse) = (3i64.pow(m + 1), 3i64.pow(m));
    let mut images = HashSet::new();
    for i in 0..fine {
        for j in 0..coarse {
            let x = TorusPoint::new(rat(2 * i + 1, 2 * fine), rat(2 * j + 1, 2 * coarse)).unwrap();
            let y = closed_step(x);
            let qi = y.q() * Rational64::from_integer(2 * coarse);
            let pj = y.p() * Rational64::from_integer(2 * fine);
            assert!(qi.is_integer() && qi.to_integer() % 2 == 1, "image q off grid");
            assert!(pj.is_integer() && pj.to_integer() % 2 == 1, "image p off grid");
            assert!(images.insert((qi.to_integer(), pj.to_integer())), "two points share an image");
        }
    }
    assert_eq!(images.len() as i64, fine * coarse);
    assert!(images.len() >= 10_000);
}

#[test]
fn cover_recursion_keeps_outer_thirds() {
    for d in 0..12u32 {
        let cover = trapped_cover(d).unwrap();
        assert_eq!(cover.len(), 1 << d);
        let split: Vec<u64> = cover.numerators().iter().flat_map(|&a| [3 * a, 3 * a + 2]).collect();
        assert_eq!(trapped_cover(d + 1).unwrap(), IntervalCover::new(d + 1, split).unwrap());
    }
}

#[test]
fn trapped_intervals_avoid_digit_one() {
    let cover = trapped_cover(6).unwrap();
    for (left, width) in cover.intervals() {
        let mid = TorusPoint::new(left + width / Rational64::from_integer(2), rat(0, 1)).unwrap();
        let word = encode(mid, 6);
        assert!(word.forward().iter().all(|&d| d != 1));
    }
}
