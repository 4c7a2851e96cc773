mod common;

use common::{split_qm, zz_word};
use num::Signed;
use proptest::prelude::*;
use splitqm_core::automorphisms::{
    check_fixed_point, inner_distance_check, pullback_qm, Automorphism, Endo, FixedPointReport,
};
use splitqm_core::quasimorphisms::{FactorQM, SplitQM};
use splitqm_core::rational::int;
use splitqm_core::words::Splitting;

#[test]
fn tau_composition_exhaustive() {
    let s = Splitting::free();
    let e = Splitting::exponent_range(2);
    let words = s.all_words(5, &e, &e);
    for (n, m) in [(1, 2), (3, -3), (-2, 5)] {
        let lhs = Endo::tau(n).compose(&Endo::tau(m));
        let rhs = Endo::tau(n + m);
        for g in &words {
            assert_eq!(lhs.apply(g), rhs.apply(g));
        }
    }
}

#[test]
fn fixed_point_on_exhaustive_words() {
    let s = Splitting::free();
    let f = SplitQM::new(
        s.clone(),
        FactorQM::periodic_map(vec![int(0), int(1), int(-1)]).unwrap(),
        FactorQM::zero(),
    )
    .unwrap();
    let words = s.all_words(
        4,
        &Splitting::exponent_range(6),
        &Splitting::exponent_range(2),
    );
    assert!(matches!(
        check_fixed_point(&f, 3, &words).unwrap(),
        FixedPointReport::Fixed { .. }
    ));
    let g = SplitQM::new(s, FactorQM::sign_map(int(1)), FactorQM::zero()).unwrap();
    assert!(matches!(
        check_fixed_point(&g, 3, &words).unwrap(),
        FixedPointReport::Violated(_)
    ));
}

proptest! {
    #[test]
    fn endomorphisms_respect_products(n in -6i64..=6, g in zz_word(5, 3), h in zz_word(5, 3)) {
        let s = Splitting::free();
        let t = Endo::tau(n);
        prop_assert_eq!(t.apply(&s.multiply(&g, &h)), s.multiply(&t.apply(&g), &t.apply(&h)));
        let i = Endo::inner(&h);
        prop_assert_eq!(i.apply(&g), s.conjugate(&g, &h));
    }

    #[test]
    fn automorphism_inverses(n in -6i64..=6, g in zz_word(6, 4)) {
        let a = Automorphism::tau(n);
        prop_assert_eq!(a.inverse.apply(&a.forward.apply(&g)), g);
    }

    #[test]
    fn inner_conjugation_bound(f in split_qm(&Splitting::free(), false), h in zz_word(5, 4), g in zz_word(6, 4)) {
        inner_distance_check(&f, &h, std::slice::from_ref(&g)).unwrap();
        let inv = Automorphism::inner(&h);
        let moved = pullback_qm(&f, &inv, &g);
        prop_assert!((moved - f.eval(&g)).abs() <= int(2) * f.split_defect());
    }
}
