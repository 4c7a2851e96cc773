mod common;

use common::{raw_letters, word_on, z5_z6, zz_word};
use proptest::prelude::*;
use splitqm_core::groups::{FactorDescriptor, TableGroup};
use splitqm_core::words::{Splitting, Word};

#[test]
fn cyclic_reduction_reassembles_exhaustively() {
    let s = Splitting::free();
    let e = Splitting::exponent_range(3);
    for g in s.all_words(6, &e, &e) {
        let (core, conj) = s.cyclically_reduce(&g);
        assert!(core.is_cyclically_reduced() || core.len() <= 1, "{g}");
        assert_eq!(s.product([&conj, &core, &s.invert(&conj)]), g);
    }
}

#[test]
fn parse_and_format() {
    let s = Splitting::free();
    let g = s.parse_word("a^2 b a^-1").unwrap();
    assert_eq!(s.format_word(&g), "a^2 b a^-1");
    assert_eq!(s.parse_word("a a^-1").unwrap(), Word::identity());
    assert!(s.parse_word("a c").is_err());
    let t = Splitting::new(
        FactorDescriptor::Cyclic(2),
        FactorDescriptor::Table(TableGroup::symmetric3()),
    )
    .unwrap();
    let w = t.parse_word("A[1] B[3] A[1]").unwrap();
    assert_eq!(w.len(), 3);
    assert!(t.parse_word("b").is_err());
}

proptest! {
    #[test]
    fn reduce_is_idempotent(raw in raw_letters(&z5_z6(), 12)) {
        let s = z5_z6();
        let w = s.reduce(raw).unwrap();
        prop_assert_eq!(s.reduce(w.letters().iter().cloned()).unwrap(), w.clone());
        s.validate(&w).unwrap();
    }

    #[test]
    fn multiplication_is_associative(g in zz_word(6, 4), h in zz_word(6, 4), k in zz_word(6, 4)) {
        let s = Splitting::free();
        prop_assert_eq!(s.multiply(&s.multiply(&g, &h), &k), s.multiply(&g, &s.multiply(&h, &k)));
    }

    #[test]
    fn inversion_reverses_products(g in word_on(&z5_z6(), 8), h in word_on(&z5_z6(), 8)) {
        let s = z5_z6();
        prop_assert_eq!(s.invert(&s.multiply(&g, &h)), s.multiply(&s.invert(&h), &s.invert(&g)));
        prop_assert!(s.multiply(&g, &s.invert(&g)).is_empty());
    }

    #[test]
    fn powers_add(g in zz_word(5, 3), m in -6i64..6, n in -6i64..6) {
        let s = Splitting::free();
        prop_assert_eq!(s.power_i64(&g, m + n), s.multiply(&s.power_i64(&g, m), &s.power_i64(&g, n)));
    }

    #[test]
    fn formatting_round_trips(g in word_on(&z5_z6(), 8)) {
        let s = z5_z6();
        prop_assert_eq!(s.parse_word(&s.format_word(&g)).unwrap(), g);
    }
}
