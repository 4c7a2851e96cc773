mod common;

use common::{split_qm, z5_z6, zz_word};
use num::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use splitqm_core::groups::{FactorDescriptor, FactorElement};
use splitqm_core::quasimorphisms::{factor_defect_on_window, rademacher, FactorQM, SplitQM};
use splitqm_core::rational::{int, rat, Rational};
use splitqm_core::selftest::random_factor_qm;
use splitqm_core::words::{Splitting, WordSampler};

#[test]
fn sign_map_values() {
    let s = Splitting::free();
    let f = SplitQM::new(
        s.clone(),
        FactorQM::sign_map(int(1)),
        FactorQM::sign_map(int(1)),
    )
    .unwrap();
    assert_eq!(f.eval(&s.parse_word("a b^-2 a^3 b").unwrap()), int(2));
    assert_eq!(f.split_defect(), int(1));
    assert_eq!(f.gromov_norm().unwrap().value, int(1));
}

#[test]
fn rademacher_defect() {
    let f = rademacher();
    assert_eq!(f.split_defect(), int(3));
    let r = f.gromov_norm().unwrap();
    assert_eq!(r.witness.unwrap().gap, int(6));
}

#[test]
fn window_matches_wide_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let d = FactorDescriptor::Integer;
    for _ in 0..40 {
        let q = random_factor_qm(&d, &mut rng, false);
        let w = q.defect_window();
        assert_eq!(
            factor_defect_on_window(&d, &q, w).value,
            factor_defect_on_window(&d, &q, 4 * w).value
        );
    }
}

#[test]
fn involutions_must_vanish() {
    let z4 = FactorDescriptor::Cyclic(4);
    assert!(FactorQM::from_support(&z4, [(FactorElement::Finite(2), int(1))]).is_err());
    let q = FactorQM::from_support(&z4, [(FactorElement::Finite(1), rat(1, 2))]).unwrap();
    assert_eq!(q.eval(&FactorElement::Finite(3)), rat(-1, 2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coboundary_bounded_and_attained(f in split_qm(&Splitting::free(), false), seed in any::<u64>()) {
        let def = f.split_defect();
        let mut sampler = WordSampler::new(Splitting::free(), 6, 8, seed);
        for _ in 0..100 {
            let g = sampler.sample();
            let h = sampler.sample();
            prop_assert!(f.coboundary(&g, &h).abs() <= def);
        }
        let (side, fd) = f.maximizing_pair();
        if let Some((x, y)) = fd.witness {
            let (g, h) = f.junction_pair(side, &x, &y, &mut sampler);
            prop_assert_eq!(f.coboundary(&g, &h).abs(), def);
        }
    }

    #[test]
    fn finite_factor_coboundaries_bounded(f in split_qm(&z5_z6(), false), seed in any::<u64>()) {
        let def = f.split_defect();
        let mut sampler = WordSampler::new(z5_z6(), 8, 1, seed);
        for _ in 0..100 {
            let g = sampler.sample();
            let h = sampler.sample();
            prop_assert!(f.coboundary(&g, &h).abs() <= def);
        }
    }

    #[test]
    fn homogenization_is_homogeneous(f in split_qm(&Splitting::free(), false), g in zz_word(6, 4), n in -5i64..=5) {
        let s = Splitting::free();
        prop_assert_eq!(f.homogenize(&s.power_i64(&g, n)), f.homogenize(&g) * int(n));
    }

    #[test]
    fn homogenization_is_conjugation_invariant(f in split_qm(&Splitting::free(), false), g in zz_word(6, 4), w in zz_word(5, 4)) {
        let s = Splitting::free();
        prop_assert_eq!(f.homogenize(&s.product([&w, &g, &s.invert(&w)])), f.homogenize(&g));
    }

    #[test]
    fn homogenized_defect_at_most_twice(f in split_qm(&z5_z6(), false), seed in any::<u64>()) {
        let twice = int(2) * f.split_defect();
        let mut sampler = WordSampler::new(z5_z6(), 6, 1, seed);
        for _ in 0..100 {
            let g = sampler.sample();
            let h = sampler.sample();
            prop_assert!(f.homogenized_coboundary(&g, &h).abs() <= twice);
        }
        let r = f.gromov_norm().unwrap();
        prop_assert_eq!(r.value, f.split_defect());
    }

    /// On cyclically reduced words `g^n` is a plain concatenation, so
    /// `f(g^n)/n` is constant and equals the homogenization.
    #[test]
    fn agrees_with_power_limit(f in split_qm(&Splitting::free(), false), g in zz_word(8, 5)) {
        let s = Splitting::free();
        let (core, conj) = s.cyclically_reduce(&g);
        let h = f.homogenize(&g);
        if core.is_cyclically_reduced() && core.len() >= 2 {
            prop_assert_eq!(&h, &f.eval(&core));
            prop_assert_eq!(f.eval(&s.power_i64(&core, 5)), f.eval(&core) * int(5));
        } else if let Some(l) = core.single_factor() {
            // f(x^n)/n differs from the slope part by at most sup|bounded part|/n
            let n = 1000i64;
            let big = s.power_i64(&core, n);
            let approx = f.eval(&big) / int(n);
            prop_assert!((approx - &h).abs() <= rat(1, 10), "{} vs {}", l.elem, h);
        }
        let _ = conj;
    }

    #[test]
    fn alternating(f in split_qm(&z5_z6(), false), seed in any::<u64>()) {
        let s = z5_z6();
        let mut sampler = WordSampler::new(s.clone(), 8, 1, seed);
        for _ in 0..50 {
            let g = sampler.sample();
            prop_assert_eq!(f.eval(&s.invert(&g)), -f.eval(&g));
        }
        prop_assert_eq!(f.eval(&splitqm_core::words::Word::identity()), Rational::zero());
    }
}
