//! Brooks counting quasimorphisms on the free group `⟨a⟩∗⟨b⟩` and the
//! decomposition of finitely supported split quasimorphisms into them.

use std::fmt;

use num::{BigInt, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::groups::{FactorDescriptor, FactorElement};
use crate::quasimorphisms::SplitQM;
use crate::rational::Rational;
use crate::words::{Letter, Side, Splitting, Word};

/// One generator letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gen {
    A,
    AInv,
    B,
    BInv,
}

impl Gen {
    pub const ALL: [Gen; 4] = [Gen::A, Gen::AInv, Gen::B, Gen::BInv];

    pub fn inverse(self) -> Gen {
        match self {
            Gen::A => Gen::AInv,
            Gen::AInv => Gen::A,
            Gen::B => Gen::BInv,
            Gen::BInv => Gen::B,
        }
    }

    fn side(self) -> Side {
        match self {
            Gen::A | Gen::AInv => Side::A,
            Gen::B | Gen::BInv => Side::B,
        }
    }

    fn positive(self) -> bool {
        matches!(self, Gen::A | Gen::B)
    }
}

/// A freely reduced word over `{a, a⁻¹, b, b⁻¹}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReducedLetterWord(Vec<Gen>);

impl ReducedLetterWord {
    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Gen>>(letters: I) -> Self {
        let mut out: Vec<Gen> = Vec::new();
        for g in letters {
            if out.last() == Some(&g.inverse()) {
                out.pop();
            } else {
                out.push(g);
            }
        }
        ReducedLetterWord(out)
    }

    /// Parses `a`, `A` (= a⁻¹), `b`, `B` (= b⁻¹), ignoring whitespace.
    pub fn parse(text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for (i, c) in text.char_indices() {
            let g = match c {
                'a' => Gen::A,
                'A' => Gen::AInv,
                'b' => Gen::B,
                'B' => Gen::BInv,
                c if c.is_whitespace() => continue,
                _ => {
                    return Err(Error::UnknownGenerator {
                        token: c.to_string(),
                        position: i,
                    })
                }
            };
            letters.push(g);
        }
        Ok(ReducedLetterWord::reduce(letters))
    }

    pub fn letters(&self) -> &[Gen] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        ReducedLetterWord(self.0.iter().rev().map(|g| g.inverse()).collect())
    }

    /// Expands a normal form over the free splitting into letters.
    pub fn from_word(g: &Word) -> Result<Self> {
        let mut out = Vec::new();
        for l in g.letters() {
            let k = l.elem.as_int().ok_or_else(|| {
                Error::InvalidDescriptor("letter words need integer factors".into())
            })?;
            let n = k.abs().to_usize().ok_or_else(|| {
                Error::Precondition(format!("exponent {k} too large to expand into letters"))
            })?;
            let gen = match (l.side, k.is_positive()) {
                (Side::A, true) => Gen::A,
                (Side::A, false) => Gen::AInv,
                (Side::B, true) => Gen::B,
                (Side::B, false) => Gen::BInv,
            };
            out.extend(std::iter::repeat_n(gen, n));
        }
        Ok(ReducedLetterWord(out))
    }

    /// Collapses letter runs into a normal form over the free splitting.
    pub fn to_word(&self) -> Word {
        let s = Splitting::free();
        let raw = self.0.iter().map(|g| {
            let k = if g.positive() { 1 } else { -1 };
            Letter::new(g.side(), FactorElement::int(k))
        });
        s.reduce(raw).expect("integer letters are valid")
    }

    /// `x y^k z` with `y` a generator on `side` and `x, z` generators of
    /// the other side, `k ≥ 1`.
    fn block(side: Side, k: usize, left: bool, right: bool) -> Self {
        let (y, other) = match side {
            Side::A => (Gen::A, Gen::B),
            Side::B => (Gen::B, Gen::A),
        };
        let pick = |pos: bool| if pos { other } else { other.inverse() };
        let mut v = vec![pick(left)];
        v.extend(std::iter::repeat_n(y, k));
        v.push(pick(right));
        ReducedLetterWord(v)
    }

    /// All reduced words of exactly `len` letters.
    pub fn all_of_length(len: usize) -> Vec<Self> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(out.len() * 3);
            for w in &out {
                for g in Gen::ALL {
                    if w.last() == Some(&g.inverse()) {
                        continue;
                    }
                    let mut v: Vec<Gen> = w.clone();
                    v.push(g);
                    next.push(v);
                }
            }
            out = next;
        }
        out.into_iter().map(ReducedLetterWord).collect()
    }
}

impl fmt::Display for ReducedLetterWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.0 {
            let c = match g {
                Gen::A => 'a',
                Gen::AInv => 'A',
                Gen::B => 'b',
                Gen::BInv => 'B',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Number of (possibly overlapping) occurrences of `w` in `g`.
pub fn subword_count(w: &ReducedLetterWord, g: &ReducedLetterWord) -> usize {
    let (p, t) = (w.letters(), g.letters());
    if p.is_empty() || t.is_empty() || p.len() > t.len() {
        return 0;
    }
    // Knuth-Morris-Pratt failure function
    let mut fail = vec![0usize; p.len()];
    let mut j = 0;
    for i in 1..p.len() {
        while j > 0 && p[i] != p[j] {
            j = fail[j - 1];
        }
        if p[i] == p[j] {
            j += 1;
        }
        fail[i] = j;
    }
    let mut count = 0;
    j = 0;
    for &c in t {
        while j > 0 && c != p[j] {
            j = fail[j - 1];
        }
        if c == p[j] {
            j += 1;
        }
        if j == p.len() {
            count += 1;
            j = fail[j - 1];
        }
    }
    count
}

/// `C_w(g) = h_w(g) - h_{w⁻¹}(g)`.
pub fn counting_qm(w: &ReducedLetterWord, g: &ReducedLetterWord) -> i64 {
    subword_count(w, g) as i64 - subword_count(&w.inverse(), g) as i64
}

/// `C_{a,k}` (side A) or `C_{b,k}` (side B): the sum of the four counting
/// maps of `x^{±1} y^k z^{±1}`.
pub fn block_counting(side: Side, k: usize, g: &ReducedLetterWord) -> Result<i64> {
    if k == 0 {
        return Err(Error::Precondition(
            "block length must be at least 1".into(),
        ));
    }
    let mut total = 0;
    for left in [true, false] {
        for right in [true, false] {
            total += counting_qm(&ReducedLetterWord::block(side, k, left, right), g);
        }
    }
    Ok(total)
}

fn check_finite_support(f: &SplitQM) -> Result<()> {
    let free = Splitting::free();
    if f.splitting != free {
        return Err(Error::Precondition(
            "counting decomposition needs the free splitting".into(),
        ));
    }
    if !f.fa.is_finitely_supported() || !f.fb.is_finitely_supported() {
        return Err(Error::Precondition(
            "counting decomposition needs finitely supported factor maps".into(),
        ));
    }
    Ok(())
}

/// `F(g) = Σ_{k ≥ 1} f_A(a^k)·C_{a,k}(g) + f_B(b^k)·C_{b,k}(g)`.
pub fn counting_combination(f: &SplitQM, g: &Word) -> Result<Rational> {
    check_finite_support(f)?;
    let letters = ReducedLetterWord::from_word(g)?;
    let mut total = Rational::zero();
    for side in [Side::A, Side::B] {
        for (x, v) in f.factor(side).support() {
            let k = x.as_int().expect("integer support");
            if !k.is_positive() {
                continue;
            }
            let k = k.to_usize().ok_or_else(|| {
                Error::Precondition(format!("support element {k} too large to count"))
            })?;
            let c = block_counting(side, k, &letters)?;
            if c != 0 {
                total += v * Rational::from_integer(BigInt::from(c));
            }
        }
    }
    Ok(total)
}

/// The boundary correction: the values of the first and the last letter of
/// the normal form, counted once when they coincide.
pub fn boundary_correction(f: &SplitQM, g: &Word) -> Rational {
    match g.letters() {
        [] => Rational::zero(),
        [x] => f.eval_letter(x),
        [x, .., y] => f.eval_letter(x) + f.eval_letter(y),
    }
}

/// `F(g) - [f(g) - f(first letter) - f(last letter)]`, which vanishes
/// identically; a nonzero value is reported as an error.
pub fn decomposition_residual(f: &SplitQM, g: &Word) -> Result<Rational> {
    let big_f = counting_combination(f, g)?;
    let r = big_f - (f.eval(g) - boundary_correction(f, g));
    if !r.is_zero() {
        return Err(Error::IdentityViolation(format!(
            "counting decomposition residual {r} at {g}"
        )));
    }
    Ok(r)
}

/// Bound on `|F(g) - f(g)|`: `‖f_A‖_∞ + ‖f_B‖_∞` when the first and last
/// letters of `g` lie in different factors, otherwise twice the sup norm of
/// the factor holding both.
pub fn decomposition_bound(f: &SplitQM, g: &Word) -> Result<Rational> {
    check_finite_support(f)?;
    let d = FactorDescriptor::Integer;
    let a = f.fa.sup_norm(&d).expect("bounded");
    let b = f.fb.sup_norm(&d).expect("bounded");
    Ok(match (g.first(), g.last()) {
        (Some(x), Some(y)) if x.side == y.side && g.len() > 1 => {
            let n = if x.side == Side::A { a } else { b };
            &n + &n
        }
        _ => a + b,
    })
}
