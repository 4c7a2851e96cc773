//! Endomorphisms of the free group `⟨a⟩∗⟨b⟩` given by generator images,
//! the family `τ_n: a ↦ a, b ↦ aⁿb`, and their action on split
//! quasimorphisms.

use num::{BigInt, Signed, Zero};

use crate::error::{Error, Result};
use crate::groups::FactorElement;
use crate::quasimorphisms::SplitQM;
use crate::rational::Rational;
use crate::words::{Side, Splitting, Word};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endo {
    pub image_a: Word,
    pub image_b: Word,
}

fn free() -> Splitting {
    Splitting::free()
}

fn gen(side: Side) -> Word {
    free()
        .letter(side, FactorElement::int(1))
        .expect("generator is a valid letter")
}

impl Endo {
    pub fn new(image_a: Word, image_b: Word) -> Result<Self> {
        let s = free();
        s.validate(&image_a)?;
        s.validate(&image_b)?;
        Ok(Endo { image_a, image_b })
    }

    pub fn identity() -> Self {
        Endo {
            image_a: gen(Side::A),
            image_b: gen(Side::B),
        }
    }

    /// `a ↦ a`, `b ↦ aⁿ b`.
    pub fn tau(n: i64) -> Self {
        let s = free();
        Endo {
            image_a: gen(Side::A),
            image_b: s
                .from_exponents(Side::A, &[n, 1])
                .expect("integer exponents"),
        }
    }

    /// `x ↦ h⁻¹ x h`.
    pub fn inner(h: &Word) -> Self {
        let s = free();
        Endo {
            image_a: s.conjugate(&gen(Side::A), h),
            image_b: s.conjugate(&gen(Side::B), h),
        }
    }

    pub fn apply(&self, g: &Word) -> Word {
        let s = free();
        let mut out = Word::identity();
        for l in g.letters() {
            let k = l.elem.as_int().expect("free group letters are integers");
            let base = match l.side {
                Side::A => &self.image_a,
                Side::B => &self.image_b,
            };
            out = s.multiply(&out, &s.power(base, k));
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Endo) -> Endo {
        Endo {
            image_a: self.apply(&other.image_a),
            image_b: self.apply(&other.image_b),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Endo::identity()
    }
}

/// An endomorphism together with a verified two-sided inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automorphism {
    pub forward: Endo,
    pub inverse: Endo,
}

impl Automorphism {
    /// Checks both compositions on the generators, which determines them.
    pub fn new(forward: Endo, inverse: Endo) -> Result<Self> {
        if !forward.compose(&inverse).is_identity() || !inverse.compose(&forward).is_identity() {
            return Err(Error::InverseCheck(format!(
                "{} / {} is not inverse to {} / {}",
                inverse.image_a, inverse.image_b, forward.image_a, forward.image_b
            )));
        }
        Ok(Automorphism { forward, inverse })
    }

    pub fn tau(n: i64) -> Self {
        Automorphism::new(Endo::tau(n), Endo::tau(-n)).expect("τ_n and τ_-n are inverse")
    }

    pub fn inner(h: &Word) -> Self {
        let s = free();
        Automorphism::new(Endo::inner(h), Endo::inner(&s.invert(h))).expect("inner automorphism")
    }
}

/// `(τ.f)(g) = f(τ⁻¹(g))`.
pub fn pullback_qm(f: &SplitQM, e: &Automorphism, g: &Word) -> Rational {
    f.eval(&e.inverse.apply(g))
}

fn require_free_bounded(f: &SplitQM) -> Result<()> {
    if f.splitting != free() {
        return Err(Error::Precondition(
            "τ_n acts on the free splitting only".into(),
        ));
    }
    if !f.fa.is_bounded() || !f.fb.is_bounded() {
        return Err(Error::Precondition("factor maps must be bounded".into()));
    }
    Ok(())
}

/// `f_A` is `|n|`-periodic and `f_B` vanishes.
pub fn fixed_point_condition(f: &SplitQM, n: i64) -> bool {
    n != 0 && f.fa.is_periodic(n.unsigned_abs()) && f.fb.is_zero_map()
}

/// Evidence that the class of `f` is not fixed by `τ_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationWitness {
    /// A word with `D(g) = ĥ(τ_n g) - ĥ(g) ≠ 0`.
    pub word: Word,
    /// `|D|` along the growth family for `l = 1, 2, …`.
    pub growth: Vec<Rational>,
    /// Words of the growth family.
    pub family: Vec<Word>,
    /// `D(g) - φ(g)` with `φ` the homomorphism matching `D` on `a` and `b`;
    /// nonzero exactly when `D` is not a homomorphism on `g`.
    pub residual: Rational,
    /// `f_A(1+n) - f_A(1) - f_A(n)`, which vanishes under the fixed-point condition.
    pub commutator: Rational,
}

/// `D(g) = ĥ(τ_n g) - ĥ(g)`.
pub fn tau_defect(f: &SplitQM, tau: &Endo, g: &Word) -> Rational {
    f.homogenize(&tau.apply(g)) - f.homogenize(g)
}

fn strictly_increasing(v: &[Rational]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

/// Scans `a^k b^l` (`0 < |k| ≤ k_bound`, `1 ≤ l ≤ l_bound`) and `[a, b]` for
/// a word on which `ĥ∘τ_n ≠ ĥ`.
///
/// The growth family is `a^k b^l` along `l` when `|D|` is strictly
/// increasing there; otherwise it is the powers `g^l` of the witness, on
/// which `D` is linear in `l`.
pub fn violation_witness(
    f: &SplitQM,
    n: i64,
    k_bound: i64,
    l_bound: i64,
) -> Result<Option<ViolationWitness>> {
    require_free_bounded(f)?;
    if n == 0 {
        return Err(Error::Precondition("n must be nonzero".into()));
    }
    let s = free();
    let tau = Endo::tau(n);
    let d = |g: &Word| tau_defect(f, &tau, g);
    let phi_b = d(&gen(Side::B));
    let commutator_word = s
        .from_exponents(Side::A, &[1, 1, -1, -1])
        .expect("commutator");
    let commutator = f.fa.eval_int(1 + n) - f.fa.eval_int(1) - f.fa.eval_int(n);

    let mut candidates = Vec::new();
    for k in (-k_bound..=k_bound).filter(|&k| k != 0) {
        for l in 1..=l_bound {
            candidates.push((
                Some(k),
                s.from_exponents(Side::A, &[k, l]).expect("integer word"),
            ));
        }
    }
    candidates.push((None, commutator_word));

    let mut witness: Option<Word> = None;
    for (k, g) in &candidates {
        if d(g).is_zero() {
            continue;
        }
        if let Some(k) = k {
            let family: Vec<Word> = (1..=l_bound)
                .map(|l| s.from_exponents(Side::A, &[*k, l]).expect("integer word"))
                .collect();
            let growth: Vec<Rational> = family.iter().map(|w| d(w).abs()).collect();
            if strictly_increasing(&growth) {
                let residual = d(g) - &phi_b * Rational::from_integer(b_exponent_sum(g));
                return Ok(Some(ViolationWitness {
                    word: g.clone(),
                    growth,
                    family,
                    residual,
                    commutator,
                }));
            }
        }
        if witness.is_none() {
            witness = Some(g.clone());
        }
    }
    let Some(g) = witness else {
        return Ok(None);
    };
    let family: Vec<Word> = (1..=l_bound).map(|l| s.power_i64(&g, l)).collect();
    let growth = family.iter().map(|w| d(w).abs()).collect();
    let residual = d(&g) - &phi_b * Rational::from_integer(b_exponent_sum(&g));
    Ok(Some(ViolationWitness {
        word: g,
        growth,
        family,
        residual,
        commutator,
    }))
}

/// Exponent sum in `b`, the value of the homomorphism `b ↦ 1, a ↦ 0`.
fn b_exponent_sum(g: &Word) -> BigInt {
    g.letters()
        .iter()
        .filter(|l| l.side == Side::B)
        .map(|l| l.elem.as_int().expect("integer letter").clone())
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FixedPointReport {
    /// The fixed-point condition holds and `f(τ_n g) = f(g)` on every word.
    Fixed { checked: usize, forced_zero: bool },
    /// The condition fails; a witness was found within the scan bounds.
    Violated(Box<ViolationWitness>),
    /// The condition fails but no witness was found within the bounds.
    Inconclusive,
}

/// Verifies the fixed-point criterion for `τ_n` on the given words.
///
/// Under the condition, equality `f(τ_n g) = f(g)` is checked exactly and,
/// for `|n| ≤ 2`, `f` must vanish on every word. A failure there is an
/// [`Error::IdentityViolation`].
pub fn check_fixed_point(f: &SplitQM, n: i64, words: &[Word]) -> Result<FixedPointReport> {
    require_free_bounded(f)?;
    if n == 0 {
        return Err(Error::Precondition("n must be nonzero".into()));
    }
    if fixed_point_condition(f, n) {
        let tau = Endo::tau(n);
        let forced_zero = n.abs() <= 2;
        for g in words {
            let v = f.eval(g);
            if f.eval(&tau.apply(g)) != v {
                return Err(Error::IdentityViolation(format!(
                    "f(τ_{n}(g)) differs from f(g) at g = {g}"
                )));
            }
            if forced_zero && !v.is_zero() {
                return Err(Error::IdentityViolation(format!(
                    "periodic map with |n| ≤ 2 is nonzero at {g}"
                )));
            }
        }
        return Ok(FixedPointReport::Fixed {
            checked: words.len(),
            forced_zero,
        });
    }
    let k_bound = f.fa.defect_window() + n.abs();
    match violation_witness(f, n, k_bound, 10)? {
        Some(w) => Ok(FixedPointReport::Violated(Box::new(w))),
        None => Ok(FixedPointReport::Inconclusive),
    }
}

/// `max |f(h g h⁻¹) - f(g)|` over the words, which must not exceed
/// `2·def f`.
pub fn inner_distance_check(f: &SplitQM, h: &Word, words: &[Word]) -> Result<Rational> {
    let s = &f.splitting;
    let hi = s.invert(h);
    let bound = Rational::from_integer(2.into()) * f.split_defect();
    let mut best = Rational::zero();
    for g in words {
        let c = s.product([h, g, &hi]);
        let v = (f.eval(&c) - f.eval(g)).abs();
        if v > bound {
            return Err(Error::IdentityViolation(format!(
                "|f(hgh⁻¹) - f(g)| = {v} exceeds twice the defect at g = {g}"
            )));
        }
        best = best.max(v);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasimorphisms::FactorQM;
    use crate::rational::int;
    use crate::words::WordSampler;

    fn w(t: &str) -> Word {
        free().parse_word(t).unwrap()
    }

    fn sign_sign() -> SplitQM {
        SplitQM::new(
            free(),
            FactorQM::sign_map(int(1)),
            FactorQM::sign_map(int(1)),
        )
        .unwrap()
    }

    #[test]
    fn tau_examples() {
        assert_eq!(Endo::tau(2).apply(&w("b")), w("a^2 b"));
        assert!(Endo::tau(0).is_identity());
        let g = w("a^3 b^-2 a b^5");
        assert_eq!(Endo::identity().apply(&g), g);
        assert_eq!(Endo::tau(3).apply(&Endo::tau(-3).apply(&g)), g);
    }

    #[test]
    fn compose_and_inner() {
        let s = free();
        let mut sampler = WordSampler::new(s.clone(), 6, 3, 17);
        for _ in 0..100 {
            let g = sampler.sample();
            let h1 = sampler.sample();
            let h2 = sampler.sample();
            assert_eq!(
                Endo::tau(2).compose(&Endo::tau(-5)).apply(&g),
                Endo::tau(-3).apply(&g)
            );
            assert_eq!(Endo::inner(&h1).apply(&g), s.conjugate(&g, &h1));
            let h12 = s.multiply(&h1, &h2);
            assert_eq!(
                Endo::inner(&h12).apply(&g),
                Endo::inner(&h2).compose(&Endo::inner(&h1)).apply(&g)
            );
        }
        assert!(Endo::inner(&Word::identity()).is_identity());
    }

    #[test]
    fn inverse_verification() {
        assert!(Automorphism::new(Endo::tau(2), Endo::tau(2)).is_err());
        let h = w("a b^2");
        let aut = Automorphism::inner(&h);
        let g = w("b a^-1");
        assert_eq!(aut.forward.apply(&aut.inverse.apply(&g)), g);
    }

    #[test]
    fn pullback_examples() {
        let f = sign_sign();
        let t1 = Automorphism::tau(1);
        assert_eq!(pullback_qm(&f, &t1, &w("b")), int(0));
        let id = Automorphism::new(Endo::identity(), Endo::identity()).unwrap();
        let g = w("a^2 b^-1");
        assert_eq!(pullback_qm(&f, &id, &g), f.eval(&g));
        let t3 = Automorphism::tau(3);
        assert_eq!(pullback_qm(&f, &t3, &t3.forward.apply(&g)), f.eval(&g));
    }

    #[test]
    fn periodic_fixed_point() {
        let s = free();
        let fa = FactorQM::periodic_map(vec![int(0), int(1), int(-1)]).unwrap();
        let f = SplitQM::new(s.clone(), fa, FactorQM::zero()).unwrap();
        let e = Splitting::exponent_range(3);
        let words = s.all_words(4, &e, &e);
        match check_fixed_point(&f, 3, &words).unwrap() {
            FixedPointReport::Fixed { checked, .. } => assert_eq!(checked, words.len()),
            other => panic!("unexpected {other:?}"),
        }
        // period 3 is not a period 2 map
        assert!(matches!(
            check_fixed_point(&f, 2, &words).unwrap(),
            FixedPointReport::Violated(_)
        ));
    }

    #[test]
    fn nonzero_fb_is_detected() {
        let fb = FactorQM::from_support(
            &crate::groups::FactorDescriptor::Integer,
            [(FactorElement::int(1), int(1))],
        )
        .unwrap();
        let f = SplitQM::new(free(), FactorQM::zero(), fb).unwrap();
        let wit = violation_witness(&f, 3, 6, 10).unwrap().unwrap();
        assert!(strictly_increasing(&wit.growth));
        let zero = SplitQM::new(free(), FactorQM::zero(), FactorQM::zero()).unwrap();
        assert!(violation_witness(&zero, 3, 6, 10).unwrap().is_none());
    }

    #[test]
    fn inner_distance() {
        let f = sign_sign();
        let s = free();
        let mut sampler = WordSampler::new(s.clone(), 6, 4, 2);
        let words: Vec<Word> = (0..200).map(|_| sampler.sample()).collect();
        assert_eq!(
            inner_distance_check(&f, &Word::identity(), &words).unwrap(),
            int(0)
        );
        let h = w("a^2 b^-1 a");
        assert!(inner_distance_check(&f, &h, &words).unwrap() <= int(2));
        let hom = SplitQM::new(
            s,
            FactorQM::homomorphism(int(1)),
            FactorQM::homomorphism(int(2)),
        )
        .unwrap();
        assert_eq!(inner_distance_check(&hom, &h, &words).unwrap(), int(0));
    }
}
