//! Bounded alternating functions on a group normed by their defect, and the
//! isometric embeddings between such spaces induced by homomorphisms.

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::groups::{FactorDescriptor, FactorElement, Order};
use crate::quasimorphisms::{factor_defect_exact, FactorQM};
use crate::rational::{int, Rational};

/// A bounded alternating function on a finite group, or a finitely
/// supported one on the integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectVector {
    carrier: FactorDescriptor,
    map: FactorQM,
}

impl DefectVector {
    pub fn zero(carrier: FactorDescriptor) -> Self {
        DefectVector {
            carrier,
            map: FactorQM::zero(),
        }
    }

    /// Sets `f(x) = v` and `f(x⁻¹) = -v` for each pair.
    pub fn from_support<I>(carrier: FactorDescriptor, values: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FactorElement, Rational)>,
    {
        let map = FactorQM::from_support(&carrier, values)?;
        Ok(DefectVector { carrier, map })
    }

    /// A full table of values on a finite carrier, indexed by element; it
    /// must already be alternating.
    pub fn from_table(carrier: FactorDescriptor, values: &[Rational]) -> Result<Self> {
        let elems = carrier.enumerate()?;
        if values.len() != elems.len() {
            return Err(Error::ShapeMismatch(format!(
                "{carrier} has {} elements, got {} values",
                elems.len(),
                values.len()
            )));
        }
        for (i, x) in elems.iter().enumerate() {
            let xi = carrier.inv_unchecked(x);
            let j = xi.as_index().expect("finite carrier");
            if values[i] != -&values[j] {
                return Err(Error::InvalidMap(format!("f({x}⁻¹) ≠ -f({x})")));
            }
        }
        let pairs = elems.into_iter().zip(values.iter().cloned());
        DefectVector::from_support(carrier, pairs)
    }

    pub fn carrier(&self) -> &FactorDescriptor {
        &self.carrier
    }

    pub fn eval(&self, x: &FactorElement) -> Rational {
        self.map.eval(x)
    }

    pub fn as_factor_qm(&self) -> &FactorQM {
        &self.map
    }

    pub fn is_zero(&self) -> bool {
        self.map.is_zero_map()
    }

    pub fn add(&self, other: &DefectVector) -> Result<DefectVector> {
        self.combine(other, |x, y| x + y)
    }

    pub fn scale(&self, c: &Rational) -> DefectVector {
        let pairs: Vec<_> = self
            .map
            .support()
            .iter()
            .map(|(x, v)| (x.clone(), v * c))
            .collect();
        DefectVector::from_support(self.carrier.clone(), pairs).expect("scaling keeps alternation")
    }

    fn combine(
        &self,
        other: &DefectVector,
        op: impl Fn(&Rational, &Rational) -> Rational,
    ) -> Result<DefectVector> {
        if self.carrier != other.carrier {
            return Err(Error::ShapeMismatch(
                "defect vectors on different carriers".into(),
            ));
        }
        let keys: std::collections::BTreeSet<_> = self
            .map
            .support()
            .keys()
            .chain(other.map.support().keys())
            .cloned()
            .collect();
        let pairs: Vec<_> = keys
            .into_iter()
            .map(|x| {
                let v = op(&self.eval(&x), &other.eval(&x));
                (x, v)
            })
            .collect();
        DefectVector::from_support(self.carrier.clone(), pairs)
    }

    /// `sup |f(g) + f(h) - f(gh)|`.
    pub fn defect_norm(&self) -> Rational {
        factor_defect_exact(&self.carrier, &self.map).value
    }

    /// `max |f(g)|`.
    pub fn sup_norm(&self) -> Rational {
        self.map.sup_norm(&self.carrier).expect("finite support")
    }

    /// Elements where the function is examined: all of a finite carrier,
    /// `[-W, W]` on the integers.
    fn window(&self) -> Vec<FactorElement> {
        match self.carrier.enumerate() {
            Ok(all) => all,
            Err(_) => {
                let w = self.map.defect_window();
                (-w..=w).map(FactorElement::int).collect()
            }
        }
    }
}

/// Outcome of checking `|f(g)| ≤ (1 - 2/ord g)·‖f‖` on every `g ≠ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderBoundReport {
    pub norm: Rational,
    pub checked: usize,
    /// Smallest slack `bound - |f(g)|` and where it occurs.
    pub tightest: Option<(FactorElement, Rational)>,
}

/// `1 - 2/n`, and `1` for elements of infinite order.
pub fn order_factor(order: Order) -> Rational {
    match order {
        Order::Finite(n) => int(1) - Rational::new(2.into(), n.into()),
        Order::Infinite => int(1),
    }
}

pub fn order_bound_check(f: &DefectVector) -> Result<OrderBoundReport> {
    let norm = f.defect_norm();
    let mut report = OrderBoundReport {
        norm: norm.clone(),
        checked: 0,
        tightest: None,
    };
    for g in f.window() {
        if f.carrier.is_identity(&g) {
            continue;
        }
        let bound = order_factor(f.carrier.element_order(&g)?) * &norm;
        let slack = &bound - f.eval(&g).abs();
        if slack.is_negative() {
            return Err(Error::IdentityViolation(format!(
                "|f({g})| = {} exceeds {bound}",
                f.eval(&g).abs()
            )));
        }
        report.checked += 1;
        if report.tightest.as_ref().is_none_or(|(_, s)| slack < *s) {
            report.tightest = Some((g, slack));
        }
    }
    Ok(report)
}

/// `‖f‖_∞ ≤ ‖f‖ ≤ 3‖f‖_∞`; returns both norms.
pub fn sandwich_check(f: &DefectVector) -> Result<(Rational, Rational)> {
    let sup = f.sup_norm();
    let dn = f.defect_norm();
    if sup > dn || dn > &sup * int(3) {
        return Err(Error::IdentityViolation(format!(
            "norms out of order: sup {sup}, defect {dn}"
        )));
    }
    Ok((sup, dn))
}

/// Every alternating function on a finite carrier with values in `values`.
pub fn all_alternating(
    carrier: &FactorDescriptor,
    values: &[Rational],
) -> Result<Vec<DefectVector>> {
    let elems = carrier.enumerate()?;
    if values.is_empty() {
        return Err(Error::Precondition("no values to choose from".into()));
    }
    // one free coordinate per pair {x, x⁻¹} with x ≠ x⁻¹
    let free: Vec<FactorElement> = elems
        .iter()
        .filter(|x| {
            let xi = carrier.inv_unchecked(x);
            xi != **x && x.as_index() < xi.as_index()
        })
        .cloned()
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; free.len()];
    loop {
        let pairs = free
            .iter()
            .cloned()
            .zip(idx.iter().map(|&i| values[i].clone()));
        out.push(DefectVector::from_support(carrier.clone(), pairs)?);
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(out);
            }
            idx[pos] += 1;
            if idx[pos] < values.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// A homomorphism between finite groups given by element indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteHom {
    source: FactorDescriptor,
    target: FactorDescriptor,
    map: Vec<usize>,
}

impl FiniteHom {
    /// Verifies `φ(xy) = φ(x)φ(y)` on all pairs.
    pub fn new(
        source: FactorDescriptor,
        target: FactorDescriptor,
        map: Vec<usize>,
    ) -> Result<Self> {
        let src = source.to_table()?;
        let tgt = target.to_table()?;
        if map.len() != src.order() || map.iter().any(|&y| y >= tgt.order()) {
            return Err(Error::ShapeMismatch(
                "element map has the wrong size or range".into(),
            ));
        }
        for x in 0..src.order() {
            for y in 0..src.order() {
                if map[src.mul(x, y)] != tgt.mul(map[x], map[y]) {
                    return Err(Error::NotHomomorphism(format!(
                        "φ({x}·{y}) ≠ φ({x})·φ({y})"
                    )));
                }
            }
        }
        Ok(FiniteHom {
            source,
            target,
            map,
        })
    }

    /// `k ↦ m·k` between cyclic groups.
    pub fn cyclic_multiply(n: usize, target: usize, m: usize) -> Result<Self> {
        let map = (0..n).map(|k| (k * m) % target).collect();
        FiniteHom::new(
            FactorDescriptor::cyclic(n)?,
            FactorDescriptor::cyclic(target)?,
            map,
        )
    }

    pub fn identity(d: FactorDescriptor) -> Result<Self> {
        let n = d
            .size()
            .ok_or_else(|| Error::InfiniteGroup(d.to_string()))?;
        FiniteHom::new(d.clone(), d, (0..n).collect())
    }

    pub fn source(&self) -> &FactorDescriptor {
        &self.source
    }

    pub fn target(&self) -> &FactorDescriptor {
        &self.target
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target.size().expect("finite")];
        self.map
            .iter()
            .all(|&y| !std::mem::replace(&mut seen[y], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.target.size().expect("finite")];
        for &y in &self.map {
            seen[y] = true;
        }
        seen.into_iter().all(|s| s)
    }

    pub fn kernel(&self) -> Vec<usize> {
        let e = self.target.identity().as_index().expect("finite");
        (0..self.map.len()).filter(|&x| self.map[x] == e).collect()
    }

    pub fn image(&self) -> Vec<usize> {
        let mut img: Vec<usize> = self.map.clone();
        img.sort_unstable();
        img.dedup();
        img
    }
}

fn index_values(f: &DefectVector) -> Vec<Rational> {
    f.carrier
        .enumerate()
        .expect("finite carrier")
        .iter()
        .map(|x| f.eval(x))
        .collect()
}

/// Extension by zero along an injective homomorphism `H → Γ`.
pub fn embed_subgroup(f: &DefectVector, i: &FiniteHom) -> Result<DefectVector> {
    if f.carrier != i.source {
        return Err(Error::ShapeMismatch(
            "vector does not live on the source of i".into(),
        ));
    }
    if !i.is_injective() {
        return Err(Error::Precondition(
            "subgroup embedding must be injective".into(),
        ));
    }
    let vals = index_values(f);
    let pairs = vals
        .into_iter()
        .enumerate()
        .map(|(h, v)| (FactorElement::Finite(i.apply(h)), v));
    DefectVector::from_support(i.target.clone(), pairs)
}

/// `f∘π` along a surjective homomorphism `Γ → Q`.
pub fn pullback_quotient(f: &DefectVector, pi: &FiniteHom) -> Result<DefectVector> {
    if f.carrier != pi.target {
        return Err(Error::ShapeMismatch(
            "vector does not live on the target of π".into(),
        ));
    }
    if !pi.is_surjective() {
        return Err(Error::Precondition(
            "quotient map must be surjective".into(),
        ));
    }
    let vals = index_values(f);
    let n = pi.source.size().expect("finite");
    let pulled: Vec<Rational> = (0..n).map(|g| vals[pi.apply(g)].clone()).collect();
    DefectVector::from_table(pi.source.clone(), &pulled)
}

/// `j(f, f') = s_i(f) + π*(f')` for an exact sequence `1 → N → Γ → Q → 1`.
pub fn ses_embed(
    f: &DefectVector,
    f_quot: &DefectVector,
    i: &FiniteHom,
    pi: &FiniteHom,
) -> Result<DefectVector> {
    if i.target != pi.source {
        return Err(Error::ShapeMismatch(
            "i and π do not share the middle group".into(),
        ));
    }
    if !i.is_injective() || !pi.is_surjective() || i.image() != pi.kernel() {
        return Err(Error::Precondition("sequence is not exact".into()));
    }
    let s = embed_subgroup(f, i)?;
    let p = pullback_quotient(f_quot, pi)?;
    debug_assert!(s.map.support().keys().all(|g| p.eval(g).is_zero()));
    s.add(&p)
}
