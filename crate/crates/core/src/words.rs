//! Normal forms in a free product `A∗B`.

use std::fmt;

use num::{BigInt, One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::groups::{FactorDescriptor, FactorElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub side: Side,
    pub elem: FactorElement,
}

impl Letter {
    pub fn new(side: Side, elem: FactorElement) -> Self {
        Letter { side, elem }
    }

    /// `a^k` in an integer factor.
    pub fn a(k: i64) -> Self {
        Letter::new(Side::A, FactorElement::int(k))
    }

    /// `b^k` in an integer factor.
    pub fn b(k: i64) -> Self {
        Letter::new(Side::B, FactorElement::int(k))
    }
}

/// A reduced word: alternating sides, no identity letters.
///
/// Words are only built through [`Splitting`] so the invariants hold; the
/// ordering is lexicographic on letters and only serves as a map key.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<&Letter> {
        self.letters.first()
    }

    pub fn last(&self) -> Option<&Letter> {
        self.letters.last()
    }

    /// The side of the single letter if the word lies in one factor.
    pub fn single_factor(&self) -> Option<&Letter> {
        match self.letters.as_slice() {
            [x] => Some(x),
            _ => None,
        }
    }

    /// Starts and ends in different factors.
    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(x), Some(y)) => x.side != y.side,
            _ => false,
        }
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            let g = match l.side {
                Side::A => "a",
                Side::B => "b",
            };
            match &l.elem {
                FactorElement::Int(k) if k.is_one() => write!(f, "{g}")?,
                FactorElement::Int(k) => write!(f, "{g}^{k}")?,
                FactorElement::Finite(i) => match l.side {
                    Side::A => write!(f, "A[{i}]")?,
                    Side::B => write!(f, "B[{i}]")?,
                },
            }
        }
        Ok(())
    }
}

/// The pair of factors of `Γ = A∗B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splitting {
    pub a: FactorDescriptor,
    pub b: FactorDescriptor,
}

impl Splitting {
    pub fn new(a: FactorDescriptor, b: FactorDescriptor) -> Result<Self> {
        for d in [&a, &b] {
            if !d.is_nontrivial() {
                return Err(Error::InvalidDescriptor(format!("factor {d} is trivial")));
            }
            if let FactorDescriptor::Cyclic(n) = d {
                if *n < 2 {
                    return Err(Error::InvalidDescriptor(format!(
                        "cyclic group order {n} < 2"
                    )));
                }
            }
        }
        Ok(Splitting { a, b })
    }

    /// The free group on two generators.
    pub fn free() -> Self {
        Splitting {
            a: FactorDescriptor::Integer,
            b: FactorDescriptor::Integer,
        }
    }

    pub fn factor(&self, side: Side) -> &FactorDescriptor {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }

    /// Checks the word invariants against this splitting.
    pub fn validate(&self, g: &Word) -> Result<()> {
        for (i, l) in g.letters.iter().enumerate() {
            let d = self.factor(l.side);
            d.validate(&l.elem)?;
            if d.is_identity(&l.elem) {
                return Err(Error::InvalidElement {
                    element: format!("identity letter at position {i}"),
                    descriptor: d.to_string(),
                });
            }
            if i > 0 && g.letters[i - 1].side == l.side {
                return Err(Error::InvalidElement {
                    element: format!("non-alternating letter at position {i}"),
                    descriptor: d.to_string(),
                });
            }
        }
        Ok(())
    }

    fn push(&self, stack: &mut Vec<Letter>, l: Letter) {
        let d = self.factor(l.side);
        if d.is_identity(&l.elem) {
            return;
        }
        match stack.last_mut() {
            Some(top) if top.side == l.side => {
                let m = d.mul_unchecked(&top.elem, &l.elem);
                if d.is_identity(&m) {
                    stack.pop();
                } else {
                    top.elem = m;
                }
            }
            _ => stack.push(l),
        }
    }

    /// Normal form of an arbitrary letter sequence.
    pub fn reduce<I>(&self, raw: I) -> Result<Word>
    where
        I: IntoIterator<Item = Letter>,
    {
        let mut stack = Vec::new();
        for l in raw {
            self.factor(l.side).validate(&l.elem)?;
            self.push(&mut stack, l);
        }
        Ok(Word { letters: stack })
    }

    /// Like [`Splitting::reduce`] for letters already known to be valid.
    pub(crate) fn reduce_unchecked<I>(&self, raw: I) -> Word
    where
        I: IntoIterator<Item = Letter>,
    {
        let mut stack = Vec::new();
        for l in raw {
            self.push(&mut stack, l);
        }
        Word { letters: stack }
    }

    /// The one-letter word of a factor element (empty for the identity).
    pub fn letter(&self, side: Side, elem: FactorElement) -> Result<Word> {
        self.reduce([Letter::new(side, elem)])
    }

    /// Word from integer exponents, alternating sides starting at `start`.
    ///
    /// Only meaningful for integer or cyclic factors, where `k` is taken
    /// as a power of the generator.
    pub fn from_exponents(&self, start: Side, exps: &[i64]) -> Result<Word> {
        let mut side = start;
        let mut raw = Vec::with_capacity(exps.len());
        for &k in exps {
            let d = self.factor(side);
            let g = d.generator().ok_or_else(|| {
                Error::InvalidDescriptor(format!("{d} has no designated generator"))
            })?;
            raw.push(Letter::new(side, d.pow_unchecked(&g, &BigInt::from(k))));
            side = side.other();
        }
        self.reduce(raw)
    }

    pub fn multiply(&self, g: &Word, h: &Word) -> Word {
        let mut stack = g.letters.clone();
        for l in &h.letters {
            self.push(&mut stack, l.clone());
        }
        Word { letters: stack }
    }

    /// Product of several words, left to right.
    pub fn product<'a, I>(&self, words: I) -> Word
    where
        I: IntoIterator<Item = &'a Word>,
    {
        let mut stack = Vec::new();
        for w in words {
            for l in &w.letters {
                self.push(&mut stack, l.clone());
            }
        }
        Word { letters: stack }
    }

    pub fn invert(&self, g: &Word) -> Word {
        let letters = g
            .letters
            .iter()
            .rev()
            .map(|l| Letter::new(l.side, self.factor(l.side).inv_unchecked(&l.elem)))
            .collect();
        Word { letters }
    }

    /// `h⁻¹ g h`.
    pub fn conjugate(&self, g: &Word, h: &Word) -> Word {
        self.product([&self.invert(h), g, h])
    }

    pub fn power(&self, g: &Word, n: &BigInt) -> Word {
        let mut base = if n.is_negative() {
            self.invert(g)
        } else {
            g.clone()
        };
        let mut e = n.abs();
        let mut acc = Word::identity();
        let two = BigInt::from(2);
        while !e.is_zero() {
            if (&e % &two).is_one() {
                acc = self.multiply(&acc, &base);
            }
            e /= &two;
            if !e.is_zero() {
                base = self.multiply(&base, &base);
            }
        }
        acc
    }

    pub fn power_i64(&self, g: &Word, n: i64) -> Word {
        self.power(g, &BigInt::from(n))
    }

    /// Returns `(core, conjugator)` with `g = conjugator · core · conjugator⁻¹`
    /// and `core` either cyclically reduced or inside a single factor.
    pub fn cyclically_reduce(&self, g: &Word) -> (Word, Word) {
        let mut core = g.letters.clone();
        let mut conj: Vec<Letter> = Vec::new();
        while core.len() >= 2 && core[0].side == core[core.len() - 1].side {
            // g = y⁻¹ (y x m) y with y the last letter
            let y = core.pop().expect("length at least two");
            let d = self.factor(y.side);
            let x = core[0].elem.clone();
            let merged = d.mul_unchecked(&y.elem, &x);
            if d.is_identity(&merged) {
                core.remove(0);
            } else {
                core[0].elem = merged;
            }
            let y_inv = Letter::new(y.side, d.inv_unchecked(&y.elem));
            self.push(&mut conj, y_inv);
        }
        (Word { letters: core }, Word { letters: conj })
    }

    /// Parses whitespace-separated tokens `a`, `b`, `a^k`, `b^k`, `A[i]`,
    /// `B[j]`, `A[i]^k`, `B[j]^k` and reduces the result.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let mut raw = Vec::new();
        let mut pos = 0;
        for token in text.split_whitespace() {
            let start = pos + text[pos..].find(token).expect("token comes from text");
            pos = start + token.len();
            raw.push(self.parse_token(token, start)?);
        }
        self.reduce(raw)
    }

    fn parse_token(&self, token: &str, start: usize) -> Result<Letter> {
        let (base, exp) = match token.find('^') {
            Some(i) => {
                let digits = &token[i + 1..];
                let k: BigInt = digits.parse().map_err(|_| Error::Parse {
                    position: start + i + 1,
                    message: format!("invalid exponent {digits:?}"),
                })?;
                (&token[..i], k)
            }
            None => (token, BigInt::one()),
        };
        let (side, elem) = match base {
            "a" | "b" => {
                let side = if base == "a" { Side::A } else { Side::B };
                let g = self
                    .factor(side)
                    .generator()
                    .ok_or_else(|| Error::UnknownGenerator {
                        token: base.to_string(),
                        position: start,
                    })?;
                (side, g)
            }
            _ if base.starts_with("A[") || base.starts_with("B[") => {
                let side = if base.starts_with('A') {
                    Side::A
                } else {
                    Side::B
                };
                let inner = base[2..].strip_suffix(']').ok_or_else(|| Error::Parse {
                    position: start,
                    message: format!("unterminated index in {base:?}"),
                })?;
                let i: usize = inner.parse().map_err(|_| Error::Parse {
                    position: start + 2,
                    message: format!("invalid index {inner:?}"),
                })?;
                let d = self.factor(side);
                if !d.is_finite() {
                    return Err(Error::UnknownGenerator {
                        token: base.to_string(),
                        position: start,
                    });
                }
                let e = FactorElement::Finite(i);
                d.validate(&e).map_err(|_| Error::Parse {
                    position: start + 2,
                    message: format!("index {i} out of range for {d}"),
                })?;
                (side, e)
            }
            _ => {
                return Err(Error::UnknownGenerator {
                    token: base.to_string(),
                    position: start,
                })
            }
        };
        let d = self.factor(side);
        Ok(Letter::new(side, d.pow_unchecked(&elem, &exp)))
    }

    /// Text form accepted by [`Splitting::parse_word`].
    pub fn format_word(&self, g: &Word) -> String {
        let mut out = Vec::with_capacity(g.len());
        for l in &g.letters {
            let name = match l.side {
                Side::A => "a",
                Side::B => "b",
            };
            let tok = match (self.factor(l.side), &l.elem) {
                (_, FactorElement::Int(k)) if k.is_one() => name.to_string(),
                (_, FactorElement::Int(k)) => format!("{name}^{k}"),
                (FactorDescriptor::Cyclic(_), FactorElement::Finite(1)) => name.to_string(),
                (FactorDescriptor::Cyclic(_), FactorElement::Finite(r)) => format!("{name}^{r}"),
                (_, FactorElement::Finite(i)) => match l.side {
                    Side::A => format!("A[{i}]"),
                    Side::B => format!("B[{i}]"),
                },
            };
            out.push(tok);
        }
        out.join(" ")
    }

    /// Every reduced word with at most `max_letters` letters drawn from the
    /// given nonidentity elements of each side.
    pub fn all_words(
        &self,
        max_letters: usize,
        elems_a: &[FactorElement],
        elems_b: &[FactorElement],
    ) -> Vec<Word> {
        let mut out = vec![Word::identity()];
        let mut frontier = vec![Word::identity()];
        for _ in 0..max_letters {
            let mut next = Vec::new();
            for w in &frontier {
                let sides: &[Side] = match w.last() {
                    None => &[Side::A, Side::B],
                    Some(l) if l.side == Side::A => &[Side::B],
                    Some(_) => &[Side::A],
                };
                for &side in sides {
                    let elems = if side == Side::A { elems_a } else { elems_b };
                    for e in elems {
                        if self.factor(side).is_identity(e) {
                            continue;
                        }
                        let mut letters = w.letters.clone();
                        letters.push(Letter::new(side, e.clone()));
                        next.push(Word { letters });
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    /// Nonzero integer exponents in `[-bound, bound]` as factor elements.
    pub fn exponent_range(bound: i64) -> Vec<FactorElement> {
        (-bound..=bound)
            .filter(|&k| k != 0)
            .map(FactorElement::int)
            .collect()
    }

    /// Nonidentity elements of a factor: a symmetric exponent window for
    /// the integers, everything for finite groups.
    pub fn nonidentity_elements(&self, side: Side, bound: i64) -> Vec<FactorElement> {
        let d = self.factor(side);
        match d.enumerate() {
            Ok(all) => all.into_iter().filter(|e| !d.is_identity(e)).collect(),
            Err(_) => Splitting::exponent_range(bound),
        }
    }

    pub fn random_word(&self, length_bound: usize, exponent_bound: u64, seed: u64) -> Word {
        WordSampler::new(self.clone(), length_bound, exponent_bound, seed).sample()
    }
}

/// Deterministic random reduced words.
///
/// The letter count is uniform on `0..=length_bound`; integer letters have
/// nonzero exponents in `[-exponent_bound, exponent_bound]`, finite letters
/// are uniform nonidentity elements.
#[derive(Debug, Clone)]
pub struct WordSampler {
    splitting: Splitting,
    length_bound: usize,
    exponent_bound: i64,
    rng: ChaCha8Rng,
}

impl WordSampler {
    pub fn new(splitting: Splitting, length_bound: usize, exponent_bound: u64, seed: u64) -> Self {
        WordSampler {
            splitting,
            length_bound,
            exponent_bound: exponent_bound.max(1) as i64,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn splitting(&self) -> &Splitting {
        &self.splitting
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn sample_element(&mut self, side: Side) -> FactorElement {
        let d = self.splitting.factor(side);
        match d.size() {
            None => {
                let e = self.exponent_bound;
                let mut k = self.rng.gen_range(1..=e);
                if self.rng.gen_bool(0.5) {
                    k = -k;
                }
                FactorElement::int(k)
            }
            Some(n) => {
                let id = d.identity().as_index().expect("finite identity");
                let mut i = self.rng.gen_range(0..n - 1);
                if i >= id {
                    i += 1;
                }
                FactorElement::Finite(i)
            }
        }
    }

    pub fn sample_with_length(&mut self, len: usize) -> Word {
        let mut side = if self.rng.gen_bool(0.5) {
            Side::A
        } else {
            Side::B
        };
        let mut letters = Vec::with_capacity(len);
        for _ in 0..len {
            letters.push(Letter::new(side, self.sample_element(side)));
            side = side.other();
        }
        Word { letters }
    }

    pub fn sample(&mut self) -> Word {
        let len = self.rng.gen_range(0..=self.length_bound);
        self.sample_with_length(len)
    }

    /// Words `g = g'x`, `h = y h'` with `g'` ending and `h'` starting in the
    /// other factor, so the normal forms meet exactly at `x·y`.
    pub fn junction_pair(
        &mut self,
        side: Side,
        x: &FactorElement,
        y: &FactorElement,
    ) -> (Word, Word) {
        let other = side.other();
        let g1 = loop {
            let w = self.sample();
            if w.last().is_none_or(|l| l.side == other) {
                break w;
            }
        };
        let h1 = loop {
            let w = self.sample();
            if w.first().is_none_or(|l| l.side == other) {
                break w;
            }
        };
        let s = &self.splitting;
        let gx = s.reduce_unchecked(
            g1.letters()
                .iter()
                .cloned()
                .chain([Letter::new(side, x.clone())]),
        );
        let yh = s.reduce_unchecked(
            [Letter::new(side, y.clone())]
                .into_iter()
                .chain(h1.letters().iter().cloned()),
        );
        (gx, yh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::TableGroup;

    fn zz() -> Splitting {
        Splitting::free()
    }

    #[test]
    fn reduce_examples() {
        let s = zz();
        assert!(s.reduce([Letter::a(2), Letter::a(-2)]).unwrap().is_empty());
        let w = s
            .reduce([Letter::a(1), Letter::b(1), Letter::b(-1), Letter::a(1)])
            .unwrap();
        assert_eq!(w.letters(), &[Letter::a(2)]);
        let w = s
            .reduce([
                Letter::a(1),
                Letter::b(1),
                Letter::a(1),
                Letter::a(-1),
                Letter::b(1),
                Letter::a(1),
            ])
            .unwrap();
        assert_eq!(w.letters(), &[Letter::a(1), Letter::b(2), Letter::a(1)]);
        let bad = s.reduce([Letter::new(Side::A, FactorElement::Finite(0))]);
        assert!(bad.is_err());
    }

    #[test]
    fn multiply_and_power() {
        let s = zz();
        let ab = s.from_exponents(Side::A, &[1, 1]).unwrap();
        let p = s.power_i64(&ab, 3);
        assert_eq!(s.format_word(&p), "a b a b a b");
        assert!(s.multiply(&p, &s.invert(&p)).is_empty());
        assert_eq!(s.power_i64(&ab, -1), s.invert(&ab));
        assert!(s.power_i64(&ab, 0).is_empty());
        // g'a · a^{-1}h' = g'h'
        let g1 = s.parse_word("b a^2 b").unwrap();
        let h1 = s.parse_word("b^-1 a").unwrap();
        let a = s.parse_word("a^3").unwrap();
        let g = s.multiply(&g1, &a);
        let h = s.multiply(&s.invert(&a), &h1);
        assert_eq!(s.multiply(&g, &h), s.multiply(&g1, &h1));
    }

    #[test]
    fn cyclic_reduction_examples() {
        let s = zz();
        let (core, conj) = s.cyclically_reduce(&s.parse_word("a b a^-1").unwrap());
        assert_eq!(s.format_word(&core), "b");
        assert_eq!(s.format_word(&conj), "a");
        let ba = s.parse_word("b a").unwrap();
        let (core, conj) = s.cyclically_reduce(&ba);
        assert_eq!(core, ba);
        assert!(conj.is_empty());
        let (core, conj) = s.cyclically_reduce(&s.parse_word("a^2 b a^-1").unwrap());
        assert_eq!(s.format_word(&core), "a b");
        assert_eq!(s.format_word(&conj), "a");
    }

    #[test]
    fn cyclic_reduction_reassembles_exhaustively() {
        let s = zz();
        let e = Splitting::exponent_range(3);
        for g in s.all_words(6, &e, &e) {
            let (core, conj) = s.cyclically_reduce(&g);
            assert_eq!(s.product([&conj, &core, &s.invert(&conj)]), g);
            assert!(core.len() <= 1 || core.is_cyclically_reduced());
        }
    }

    #[test]
    fn parse_and_format() {
        let s = zz();
        let w = s.parse_word("a^3 b^-2 a").unwrap();
        assert_eq!(w.len(), 3);
        assert!(s.parse_word("").unwrap().is_empty());
        assert_eq!(s.parse_word("a a").unwrap(), s.parse_word("a^2").unwrap());
        assert_eq!(s.parse_word(&s.format_word(&w)).unwrap(), w);
        match s.parse_word("a b^x") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("unexpected {other:?}"),
        }
        match s.parse_word("a c") {
            Err(Error::UnknownGenerator { position, .. }) => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(s.parse_word("A[1]").is_err());
    }

    #[test]
    fn parse_finite_factors() {
        let s = Splitting::new(
            FactorDescriptor::Cyclic(3),
            FactorDescriptor::Table(TableGroup::symmetric3()),
        )
        .unwrap();
        let w = s.parse_word("a^2 B[3] a A[2] B[4]").unwrap();
        // a^2 · t · a · a^2 · t' reduces to a^2 t t'
        assert_eq!(w.len(), 2);
        assert_eq!(s.parse_word(&s.format_word(&w)).unwrap(), w);
        assert!(s.parse_word("b").is_err());
        assert!(s.parse_word("B[6]").is_err());
        assert!(s.parse_word("a^3").unwrap().is_empty());
    }

    #[test]
    fn sampler_is_deterministic_and_valid() {
        let s = Splitting::new(FactorDescriptor::Cyclic(5), FactorDescriptor::Integer).unwrap();
        assert_eq!(s.random_word(8, 4, 9), s.random_word(8, 4, 9));
        let mut sampler = WordSampler::new(s.clone(), 8, 4, 1);
        for _ in 0..1000 {
            let w = sampler.sample();
            s.validate(&w).unwrap();
            assert!(w.len() <= 8);
        }
        let mut short = WordSampler::new(s.clone(), 1, 4, 2);
        for _ in 0..100 {
            assert!(short.sample().len() <= 1);
        }
    }

    #[test]
    fn trivial_factor_rejected() {
        let t = TableGroup::new(vec![vec![0]], vec![0], 0).unwrap();
        assert!(Splitting::new(FactorDescriptor::Table(t), FactorDescriptor::Integer).is_err());
    }
}
