mod common;

use common::{split_qm, zz_word};
use num::Signed;
use proptest::prelude::*;
use splitqm_core::counting::{
    counting_combination, counting_qm, decomposition_bound, decomposition_residual, subword_count,
    Gen, ReducedLetterWord,
};
use splitqm_core::words::Splitting;

fn offset_scan(w: &[Gen], g: &[Gen]) -> usize {
    if w.is_empty() || w.len() > g.len() {
        return 0;
    }
    (0..=g.len() - w.len())
        .filter(|&i| g[i..i + w.len()] == *w)
        .count()
}

fn reduced(max: usize) -> impl Strategy<Value = ReducedLetterWord> {
    prop::collection::vec(
        prop::sample::select(vec![Gen::A, Gen::AInv, Gen::B, Gen::BInv]),
        0..=max,
    )
    .prop_map(ReducedLetterWord::reduce)
}

#[test]
fn overlapping_occurrences() {
    let w = ReducedLetterWord::parse("aba").unwrap();
    let g = ReducedLetterWord::parse("ababa").unwrap();
    assert_eq!(subword_count(&w, &g), 2);
    assert_eq!(counting_qm(&w, &g), 2);
    assert_eq!(counting_qm(&w, &g.inverse()), -2);
}

proptest! {
    #[test]
    fn kmp_matches_offset_scan(w in reduced(5), g in reduced(14)) {
        prop_assume!(!w.is_empty());
        let c = subword_count(&w, &g);
        prop_assert_eq!(c, offset_scan(w.letters(), g.letters()));
        prop_assert!(c <= (g.len() + 1).saturating_sub(w.len()));
    }

    #[test]
    fn counting_is_alternating(w in reduced(4), g in reduced(12)) {
        prop_assume!(!w.is_empty());
        prop_assert_eq!(counting_qm(&w, &g.inverse()), -counting_qm(&w, &g));
    }

    #[test]
    fn decomposition(f in split_qm(&Splitting::free(), true), g in zz_word(10, 5)) {
        decomposition_residual(&f, &g).unwrap();
        let gap = (counting_combination(&f, &g).unwrap() - f.eval(&g)).abs();
        prop_assert!(gap <= decomposition_bound(&f, &g).unwrap());
    }

    #[test]
    fn word_conversion_round_trips(g in zz_word(8, 4)) {
        let r = ReducedLetterWord::from_word(&g).unwrap();
        prop_assert_eq!(r.to_word(), g);
    }
}
