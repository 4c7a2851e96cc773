//! Real-valued split quasimorphisms `f = f_A∗f_B` with exact rational values.

use std::collections::BTreeMap;

use num::{BigInt, Integer, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::groups::{FactorDescriptor, FactorElement};
use crate::rational::{common_scale, from_bigint, sign_of, Rational};
use crate::words::{Letter, Side, Splitting, Word, WordSampler};

/// An `n`-periodic alternating table on residues mod `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Periodic {
    table: Vec<Rational>,
}

impl Periodic {
    pub fn new(table: Vec<Rational>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidMap("period must be at least 1".into()));
        }
        if !table[0].is_zero() {
            return Err(Error::InvalidMap(
                "periodic table must vanish at residue 0".into(),
            ));
        }
        for r in 1..n {
            if table[n - r] != -&table[r] {
                return Err(Error::InvalidMap(format!(
                    "periodic table is not alternating at residues {r} and {}",
                    n - r
                )));
            }
        }
        Ok(Periodic { table })
    }

    pub fn period(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[Rational] {
        &self.table
    }

    pub fn at(&self, k: &BigInt) -> &Rational {
        let r = k.mod_floor(&BigInt::from(self.table.len()));
        &self.table[r.to_usize().expect("residue fits")]
    }
}

/// An alternating map on one factor:
/// `slope·k + support(x) + periodic(k mod n) + sign·sgn(k)`.
///
/// Slope, periodic and sign parts only exist on integer factors.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FactorQM {
    slope: Rational,
    support: BTreeMap<FactorElement, Rational>,
    periodic: Option<Periodic>,
    sign: Rational,
}

impl FactorQM {
    pub fn zero() -> Self {
        FactorQM::default()
    }

    pub fn homomorphism(slope: Rational) -> Self {
        FactorQM {
            slope,
            ..FactorQM::default()
        }
    }

    /// `c·sgn(k)` on the integers.
    pub fn sign_map(c: Rational) -> Self {
        FactorQM {
            sign: c,
            ..FactorQM::default()
        }
    }

    pub fn periodic_map(table: Vec<Rational>) -> Result<Self> {
        Ok(FactorQM {
            periodic: Some(Periodic::new(table)?),
            ..FactorQM::default()
        })
    }

    /// Finite-support map; each pair `(x, v)` also sets `f(x⁻¹) = -v`.
    pub fn from_support<I>(d: &FactorDescriptor, values: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FactorElement, Rational)>,
    {
        FactorQM::zero().with_support(d, values)
    }

    pub fn with_support<I>(mut self, d: &FactorDescriptor, values: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FactorElement, Rational)>,
    {
        for (x, v) in values {
            d.validate(&x)?;
            let xi = d.inv_unchecked(&x);
            if d.is_identity(&x) || x == xi {
                if !v.is_zero() {
                    return Err(Error::InvalidMap(format!(
                        "alternating map must vanish at {x}, which is its own inverse"
                    )));
                }
                continue;
            }
            for (key, val) in [(x.clone(), v.clone()), (xi, -v)] {
                if let Some(old) = self.support.get(&key) {
                    if *old != val {
                        return Err(Error::InvalidMap(format!("conflicting values at {key}")));
                    }
                }
                if val.is_zero() {
                    self.support.remove(&key);
                } else {
                    self.support.insert(key, val);
                }
            }
        }
        Ok(self)
    }

    pub fn with_slope(mut self, slope: Rational) -> Self {
        self.slope = slope;
        self
    }

    pub fn with_sign(mut self, c: Rational) -> Self {
        self.sign = c;
        self
    }

    pub fn with_periodic(mut self, table: Vec<Rational>) -> Result<Self> {
        self.periodic = Some(Periodic::new(table)?);
        Ok(self)
    }

    pub fn slope(&self) -> &Rational {
        &self.slope
    }

    pub fn sign(&self) -> &Rational {
        &self.sign
    }

    pub fn support(&self) -> &BTreeMap<FactorElement, Rational> {
        &self.support
    }

    pub fn periodic(&self) -> Option<&Periodic> {
        self.periodic.as_ref()
    }

    /// Only finite support, no slope, periodic or sign part.
    pub fn is_finitely_supported(&self) -> bool {
        self.slope.is_zero() && self.sign.is_zero() && self.periodic.is_none()
    }

    pub fn is_bounded(&self) -> bool {
        self.slope.is_zero()
    }

    pub fn is_zero_map(&self) -> bool {
        self.is_finitely_supported() && self.support.is_empty()
    }

    /// Checks that the map fits the descriptor and is alternating.
    pub fn validate(&self, d: &FactorDescriptor) -> Result<()> {
        if d.is_finite()
            && (!self.slope.is_zero() || !self.sign.is_zero() || self.periodic.is_some())
        {
            return Err(Error::InvalidMap(format!(
                "slope, sign and periodic parts need an integer factor, got {d}"
            )));
        }
        for (x, v) in &self.support {
            d.validate(x)?;
            if d.is_identity(x) && !v.is_zero() {
                return Err(Error::InvalidMap("nonzero value at the identity".into()));
            }
            let xi = d.inv_unchecked(x);
            let vi = self
                .support
                .get(&xi)
                .cloned()
                .unwrap_or_else(Rational::zero);
            if vi != -v {
                return Err(Error::InvalidMap(format!("not alternating at {x}")));
            }
        }
        Ok(())
    }

    /// Largest `|k|` in the support (0 when empty or on finite factors).
    pub fn support_radius(&self) -> BigInt {
        self.support
            .keys()
            .filter_map(|x| x.as_int().map(|k| k.abs()))
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn period(&self) -> usize {
        self.periodic.as_ref().map_or(1, |p| p.period())
    }

    pub fn eval(&self, x: &FactorElement) -> Rational {
        let mut v = self.support.get(x).cloned().unwrap_or_else(Rational::zero);
        if let FactorElement::Int(k) = x {
            if !self.slope.is_zero() {
                v += &self.slope * from_bigint(k);
            }
            if let Some(p) = &self.periodic {
                v += p.at(k);
            }
            if !self.sign.is_zero() {
                v += &self.sign * sign_of(k);
            }
        }
        v
    }

    pub fn eval_int(&self, k: i64) -> Rational {
        self.eval(&FactorElement::int(k))
    }

    /// `f(x) + f(y) - f(xy)`.
    pub fn coboundary(
        &self,
        d: &FactorDescriptor,
        x: &FactorElement,
        y: &FactorElement,
    ) -> Rational {
        self.eval(x) + self.eval(y) - self.eval(&d.mul_unchecked(x, y))
    }

    /// Homogenization on the factor: the slope part, zero on finite factors.
    pub fn homogenize(&self, x: &FactorElement) -> Rational {
        match x {
            FactorElement::Int(k) => &self.slope * from_bigint(k),
            FactorElement::Finite(_) => Rational::zero(),
        }
    }

    /// The enumeration window for exact integer defects.
    ///
    /// Outside radius `M` the map depends only on residue, sign and the
    /// linear part, so every value of the coboundary is realized by a pair
    /// with both coordinates in `[-W, W]`, `W = 2(M + n + 2)`.
    pub fn defect_window(&self) -> i64 {
        let m = self
            .support_radius()
            .to_i64()
            .expect("support radius fits in i64");
        2 * (m + self.period() as i64 + 2)
    }

    /// Sup of `|f|` for bounded maps, `None` when there is a slope.
    pub fn sup_norm(&self, d: &FactorDescriptor) -> Option<Rational> {
        if !self.is_bounded() {
            return None;
        }
        let values: Vec<Rational> = match d.enumerate() {
            Ok(all) => all.iter().map(|x| self.eval(x)).collect(),
            Err(_) => {
                let r = self.defect_window();
                (-r..=r).map(|k| self.eval_int(k)).collect()
            }
        };
        Some(
            values
                .iter()
                .map(|v| v.abs())
                .max()
                .unwrap_or_else(Rational::zero),
        )
    }

    /// True when `f(k + n) = f(k)` for all `k`; checked on a window that
    /// covers the support and one full period beyond it.
    pub fn is_periodic(&self, n: u64) -> bool {
        if n == 0 || !self.slope.is_zero() || !self.sign.is_zero() {
            return false;
        }
        let n = n as i64;
        let m = self.support_radius().to_i64().expect("support radius fits");
        let r = m + n + self.period() as i64 + 1;
        (-r..=r).all(|k| self.eval_int(k + n) == self.eval_int(k))
    }
}

/// An exact factor defect together with a pair attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorDefect {
    pub value: Rational,
    /// Maximizing pair, absent when the defect is zero.
    pub witness: Option<(FactorElement, FactorElement)>,
}

/// Exact `sup |f(x) + f(y) - f(xy)|` over a factor.
///
/// Finite factors are enumerated exhaustively; integer factors on
/// `[-W, W]²` with `W` from [`FactorQM::defect_window`].
pub fn factor_defect_exact(d: &FactorDescriptor, q: &FactorQM) -> FactorDefect {
    factor_defect_on_window(d, q, q.defect_window())
}

/// Same as [`factor_defect_exact`] with an explicit integer window.
pub fn factor_defect_on_window(d: &FactorDescriptor, q: &FactorQM, w: i64) -> FactorDefect {
    match d.enumerate() {
        Ok(all) => {
            let mut best = Rational::zero();
            let mut witness = None;
            for x in &all {
                for y in &all {
                    let c = q.coboundary(d, x, y).abs();
                    if c > best {
                        best = c;
                        witness = Some((x.clone(), y.clone()));
                    }
                }
            }
            FactorDefect {
                value: best,
                witness,
            }
        }
        Err(_) => {
            // values[i] = f(i - 2w)
            let values: Vec<Rational> = (-2 * w..=2 * w).map(|k| q.eval_int(k)).collect();
            let off = 2 * w;
            let at = |k: i64| (k + off) as usize;
            let (best_val, best_pair) = match common_scale(&values) {
                Some((scaled, den)) => {
                    let mut best = 0i64;
                    let mut pair = None;
                    for k in -w..=w {
                        let fk = scaled[at(k)];
                        for l in -w..=w {
                            let c = (fk + scaled[at(l)] - scaled[at(k + l)]).abs();
                            if c > best {
                                best = c;
                                pair = Some((k, l));
                            }
                        }
                    }
                    (Rational::new(BigInt::from(best), den), pair)
                }
                None => {
                    let mut best = Rational::zero();
                    let mut pair = None;
                    for k in -w..=w {
                        for l in -w..=w {
                            let c = (&values[at(k)] + &values[at(l)] - &values[at(k + l)]).abs();
                            if c > best {
                                best = c;
                                pair = Some((k, l));
                            }
                        }
                    }
                    (best, pair)
                }
            };
            FactorDefect {
                value: best_val,
                witness: best_pair.map(|(k, l)| (FactorElement::int(k), FactorElement::int(l))),
            }
        }
    }
}

/// `f_A∗f_B`: the sum of factor values over the normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitQM {
    pub splitting: Splitting,
    pub fa: FactorQM,
    pub fb: FactorQM,
}

/// Output of the witness construction for the homogenized defect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogenizedWitness {
    pub g: Word,
    pub h: Word,
    /// `ĥ(g) + ĥ(h) - ĥ(gh)`.
    pub gap: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GromovReport {
    pub value: Rational,
    pub side: Side,
    pub pair: Option<(FactorElement, FactorElement)>,
    pub witness: Option<HomogenizedWitness>,
}

impl SplitQM {
    pub fn new(splitting: Splitting, fa: FactorQM, fb: FactorQM) -> Result<Self> {
        fa.validate(&splitting.a)?;
        fb.validate(&splitting.b)?;
        Ok(SplitQM { splitting, fa, fb })
    }

    pub fn factor(&self, side: Side) -> &FactorQM {
        match side {
            Side::A => &self.fa,
            Side::B => &self.fb,
        }
    }

    pub fn eval_letter(&self, l: &Letter) -> Rational {
        self.factor(l.side).eval(&l.elem)
    }

    pub fn eval(&self, g: &Word) -> Rational {
        g.letters()
            .iter()
            .fold(Rational::zero(), |acc, l| acc + self.eval_letter(l))
    }

    pub fn coboundary(&self, g: &Word, h: &Word) -> Rational {
        self.eval(g) + self.eval(h) - self.eval(&self.splitting.multiply(g, h))
    }

    pub fn factor_defect(&self, side: Side) -> FactorDefect {
        factor_defect_exact(self.splitting.factor(side), self.factor(side))
    }

    pub fn split_defect(&self) -> Rational {
        let a = self.factor_defect(Side::A).value;
        let b = self.factor_defect(Side::B).value;
        a.max(b)
    }

    /// The side with the larger factor defect and its maximizing pair.
    pub fn maximizing_pair(&self) -> (Side, FactorDefect) {
        let a = self.factor_defect(Side::A);
        let b = self.factor_defect(Side::B);
        if b.value > a.value {
            (Side::B, b)
        } else {
            (Side::A, a)
        }
    }

    /// Max of `|∂f(g, h)|` over `count` sampled pairs.
    pub fn sampled_defect(&self, sampler: &mut WordSampler, count: usize) -> Rational {
        let mut best = Rational::zero();
        for _ in 0..count {
            let g = sampler.sample();
            let h = sampler.sample();
            best = best.max(self.coboundary(&g, &h).abs());
        }
        best
    }

    /// Words `g = g'x`, `h = y h'` meeting exactly at `x·y`; see
    /// [`WordSampler::junction_pair`].
    pub fn junction_pair(
        &self,
        side: Side,
        x: &FactorElement,
        y: &FactorElement,
        sampler: &mut WordSampler,
    ) -> (Word, Word) {
        sampler.junction_pair(side, x, y)
    }

    /// Homogenization `ĥ(g) = lim f(gⁿ)/n`.
    pub fn homogenize(&self, g: &Word) -> Rational {
        let (core, _) = self.splitting.cyclically_reduce(g);
        match core.single_factor() {
            Some(l) => self.factor(l.side).homogenize(&l.elem),
            None => self.eval(&core),
        }
    }

    pub fn homogenized_coboundary(&self, g: &Word, h: &Word) -> Rational {
        self.homogenize(g) + self.homogenize(h) - self.homogenize(&self.splitting.multiply(g, h))
    }

    /// Words `g = a b x1⁻¹ b x2⁻¹ b⁻¹ a⁻¹` and `h = a⁻¹ b⁻¹ x1⁻¹ b x2⁻¹ b a`
    /// whose homogenized gap is `2·∂f_S(x1, x2)`, where `x1, x2, a` lie in
    /// the factor `side` and `b` in the other one.
    ///
    /// With `x2, x1` in the two middle slots instead, the gap is
    /// `-2·∂f_S(x1, x2)`; inverting and swapping the middle letters flips
    /// the sign of the factor coboundary.
    pub fn doubling_witness(
        &self,
        side: Side,
        x1: &FactorElement,
        x2: &FactorElement,
        a: &FactorElement,
        b: &FactorElement,
    ) -> Result<HomogenizedWitness> {
        let s = &self.splitting;
        let da = s.factor(side);
        let db = s.factor(side.other());
        for e in [x1, x2, a] {
            da.validate(e)?;
        }
        db.validate(b)?;
        if da.is_identity(&da.mul_unchecked(a, a)) {
            return Err(Error::Precondition("a² must not be the identity".into()));
        }
        if db.is_identity(b) {
            return Err(Error::Precondition("b must not be the identity".into()));
        }
        if da.is_identity(x1) || da.is_identity(x2) {
            return Err(Error::Precondition(
                "x1 and x2 must not be the identity".into(),
            ));
        }
        if da.is_identity(&da.mul_unchecked(x1, x2)) {
            return Err(Error::Precondition("x1·x2 must not be the identity".into()));
        }
        let la = |e: &FactorElement| Letter::new(side, e.clone());
        let lb = |e: &FactorElement| Letter::new(side.other(), e.clone());
        let ai = da.inv_unchecked(a);
        let bi = db.inv_unchecked(b);
        let y1 = da.inv_unchecked(x1);
        let y2 = da.inv_unchecked(x2);
        let g = s.reduce_unchecked([la(a), lb(b), la(&y1), lb(b), la(&y2), lb(&bi), la(&ai)]);
        let h = s.reduce_unchecked([la(&ai), lb(&bi), la(&y1), lb(b), la(&y2), lb(b), la(a)]);
        let gap = self.homogenized_coboundary(&g, &h);
        let expected = Rational::from_integer(2.into()) * self.factor(side).coboundary(da, x1, x2);
        if gap != expected {
            return Err(Error::IdentityViolation(format!(
                "homogenized gap {gap} differs from twice the factor coboundary {expected}"
            )));
        }
        Ok(HomogenizedWitness { g, h, gap })
    }

    /// Smallest-index elements `a` with `a² ≠ 1` in `side` and `b ≠ 1` in the other factor.
    fn witness_letters(&self, side: Side) -> Option<(FactorElement, FactorElement)> {
        let s = &self.splitting;
        let da = s.factor(side);
        let db = s.factor(side.other());
        let a = match da.enumerate() {
            Ok(all) => all
                .into_iter()
                .find(|e| !da.is_identity(&da.mul_unchecked(e, e)))?,
            Err(_) => FactorElement::int(1),
        };
        let b = match db.enumerate() {
            Ok(all) => all.into_iter().find(|e| !db.is_identity(e))?,
            Err(_) => FactorElement::int(1),
        };
        Some((a, b))
    }

    /// The class norm equals the split defect; when positive, a homogenized
    /// witness with gap exactly twice the defect is attached.
    pub fn gromov_norm(&self) -> Result<GromovReport> {
        let (side, fd) = self.maximizing_pair();
        let mut report = GromovReport {
            value: fd.value.clone(),
            side,
            pair: None,
            witness: None,
        };
        let Some((x, y)) = fd.witness else {
            return Ok(report);
        };
        let d = self.splitting.factor(side);
        let (x, y) = if self.factor(side).coboundary(d, &x, &y).is_negative() {
            (d.inv_unchecked(&y), d.inv_unchecked(&x))
        } else {
            (x, y)
        };
        let (a, b) = self.witness_letters(side).ok_or_else(|| {
            Error::IdentityViolation("positive defect on a factor of exponent two".into())
        })?;
        let w = self.doubling_witness(side, &x, &y, &a, &b)?;
        if w.gap != Rational::from_integer(2.into()) * &fd.value {
            return Err(Error::IdentityViolation(format!(
                "witness gap {} is not twice the defect {}",
                w.gap, fd.value
            )));
        }
        report.pair = Some((x, y));
        report.witness = Some(w);
        Ok(report)
    }

    pub fn is_trivial(&self) -> bool {
        self.split_defect().is_zero()
    }
}

/// The Rademacher split quasimorphism on `Z/2 ∗ Z/3`.
pub fn rademacher() -> SplitQM {
    let splitting = Splitting::new(FactorDescriptor::Cyclic(2), FactorDescriptor::Cyclic(3))
        .expect("Z/2 and Z/3 are nontrivial");
    let fb = FactorQM::from_support(
        &splitting.b,
        [(FactorElement::Finite(1), Rational::from_integer(1.into()))],
    )
    .expect("alternating support");
    SplitQM::new(splitting, FactorQM::zero(), fb).expect("valid factor maps")
}

/// `f_s` on the free group: both factor maps equal the finitely supported
/// alternating sequence with `s(k)` given for `k ≥ 1`.
pub fn sequence_qm(s: &[(i64, Rational)]) -> Result<SplitQM> {
    let splitting = Splitting::free();
    let mut values = Vec::with_capacity(s.len());
    for (k, v) in s {
        if *k <= 0 {
            return Err(Error::InvalidMap(format!(
                "sequence values are given at positive indices, got {k}"
            )));
        }
        values.push((FactorElement::int(*k), v.clone()));
    }
    let f = FactorQM::from_support(&splitting.a, values)?;
    SplitQM::new(splitting, f.clone(), f)
}
