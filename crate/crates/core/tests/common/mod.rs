#![allow(dead_code)]

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use splitqm_core::groups::{FactorDescriptor, FactorElement};
use splitqm_core::quasimorphisms::SplitQM;
use splitqm_core::selftest::random_split_qm;
use splitqm_core::words::{Letter, Side, Splitting, Word};

pub fn z5_z6() -> Splitting {
    Splitting::new(FactorDescriptor::Cyclic(5), FactorDescriptor::Cyclic(6)).unwrap()
}

fn nonzero(bound: i64) -> impl Strategy<Value = i64> {
    (1..=bound, any::<bool>()).prop_map(|(k, neg)| if neg { -k } else { k })
}

/// Normal forms on `Z∗Z` with up to `max_len` letters.
pub fn zz_word(max_len: usize, bound: i64) -> impl Strategy<Value = Word> {
    (
        any::<bool>(),
        prop::collection::vec(nonzero(bound), 0..=max_len),
    )
        .prop_map(|(start_a, exps)| {
            let start = if start_a { Side::A } else { Side::B };
            Splitting::free().from_exponents(start, &exps).unwrap()
        })
}

/// Raw letter sequences on `s`, possibly unreduced.
pub fn raw_letters(s: &Splitting, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    let s = s.clone();
    prop::collection::vec((any::<bool>(), -6i64..=6), 0..=max_len).prop_map(move |v| {
        v.into_iter()
            .map(|(on_a, k)| {
                let side = if on_a { Side::A } else { Side::B };
                let elem = match s.factor(side).size() {
                    None => FactorElement::int(k),
                    Some(n) => FactorElement::Finite(k.rem_euclid(n as i64) as usize),
                };
                Letter::new(side, elem)
            })
            .collect()
    })
}

/// Normal forms on `s` from raw letters.
pub fn word_on(s: &Splitting, max_len: usize) -> impl Strategy<Value = Word> {
    let s2 = s.clone();
    raw_letters(s, max_len).prop_map(move |l| s2.reduce(l).unwrap())
}

/// A random split quasimorphism on `s`.
pub fn split_qm(s: &Splitting, finite_support_only: bool) -> impl Strategy<Value = SplitQM> {
    let s = s.clone();
    any::<u64>().prop_map(move |seed| {
        random_split_qm(
            &s,
            &mut ChaCha8Rng::seed_from_u64(seed),
            finite_support_only,
        )
    })
}
