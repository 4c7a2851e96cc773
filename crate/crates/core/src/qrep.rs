//! Split quasi-representations `μ_A∗μ_B` into groups with a bi-invariant
//! metric: finite groups with a rational distance table, the circle, and
//! unitary groups with the Frobenius distance.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num::complex::Complex64;
use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::groups::{FactorDescriptor, FactorElement, TableGroup};
use crate::rational::{to_f64, Rational, Real};
use crate::words::{Letter, Side, Splitting, Word, WordSampler};

/// Tolerance for floating-point targets.
pub const TOL: f64 = 1e-9;

/// Unitary products are re-orthonormalized after this many multiplications.
const REPROJECT_EVERY: usize = 64;

/// A square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![Complex64::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = Complex64::one();
        }
        CMatrix { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch(
                "matrix must be square and nonempty".into(),
            ));
        }
        Ok(CMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// `diag(e^{iθ_1}, …, e^{iθ_n})`.
    pub fn diagonal_phases(angles: &[f64]) -> Self {
        let n = angles.len();
        let mut m = CMatrix::identity(n);
        for (i, t) in angles.iter().enumerate() {
            m.data[i * n + i] = Complex64::from_polar(1.0, *t);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut data = vec![Complex64::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        CMatrix { n, data }
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.n;
        let mut data = vec![Complex64::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        CMatrix { n, data }
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.adjoint()
            .mul(self)
            .frobenius_distance(&CMatrix::identity(self.n))
            <= tol
    }

    /// The unitary factor of a QR decomposition, by modified Gram-Schmidt
    /// on the columns.
    pub fn reproject(&self) -> CMatrix {
        let n = self.n;
        let mut cols: Vec<Vec<Complex64>> = (0..n)
            .map(|j| (0..n).map(|i| self.data[i * n + j]).collect())
            .collect();
        for j in 0..n {
            let (done, rest) = cols.split_at_mut(j);
            let cj = &mut rest[0];
            for ck in done.iter() {
                let proj: Complex64 = ck.iter().zip(cj.iter()).map(|(x, y)| x.conj() * y).sum();
                for (y, x) in cj.iter_mut().zip(ck) {
                    *y -= proj * x;
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in cols[j].iter_mut() {
                *z /= norm;
            }
        }
        let mut data = vec![Complex64::zero(); n * n];
        for j in 0..n {
            for i in 0..n {
                data[i * n + j] = cols[j][i];
            }
        }
        CMatrix { n, data }
    }

    /// A random unitary: Gram-Schmidt applied to a matrix with uniform
    /// entries in the unit square.
    pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
        let data = (0..n * n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        CMatrix { n, data }.reproject()
    }
}

/// An element of a metric target group.
#[derive(Debug, Clone, PartialEq)]
pub enum GElem {
    /// Index into a finite group table.
    Finite(usize),
    /// Rotation by `t·π`, normalized to `0 ≤ t < 2`.
    Angle(Rational),
    Unitary(CMatrix),
}

impl GElem {
    /// Rotation by `t·π`.
    pub fn angle(t: Rational) -> Self {
        GElem::Angle(normalize_angle(t))
    }
}

impl fmt::Display for GElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GElem::Finite(i) => write!(f, "#{i}"),
            GElem::Angle(t) => write!(f, "{t}π"),
            GElem::Unitary(m) => {
                let rows: Vec<String> = m
                    .rows()
                    .iter()
                    .map(|r| {
                        let parts: Vec<String> = r
                            .iter()
                            .map(|z| format!("{:.6}{:+.6}i", z.re, z.im))
                            .collect();
                        format!("[{}]", parts.join(", "))
                    })
                    .collect();
                write!(f, "[{}]", rows.join(", "))
            }
        }
    }
}

fn normalize_angle(t: Rational) -> Rational {
    let two = Rational::from_integer(BigInt::from(2));
    let q = (&t / &two).floor();
    t - q * two
}

/// Arc length in units of π.
fn arc_units(t: &Rational) -> Rational {
    let two = Rational::from_integer(BigInt::from(2));
    let t = normalize_angle(t.clone());
    let other = &two - &t;
    t.min(other)
}

/// A group with a bi-invariant metric.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricGroup {
    FiniteMetric {
        table: TableGroup,
        dist: Vec<Vec<Rational>>,
    },
    Circle,
    Unitary(usize),
}

impl MetricGroup {
    /// Checks the metric axioms and bi-invariance on all elements.
    pub fn finite(table: TableGroup, dist: Vec<Vec<Rational>>) -> Result<Self> {
        let n = table.order();
        if dist.len() != n || dist.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch(
                "distance matrix does not match the group".into(),
            ));
        }
        for x in 0..n {
            for y in 0..n {
                let d = &dist[x][y];
                if (x == y) != d.is_zero() || d.is_negative() || *d != dist[y][x] {
                    return Err(Error::InvalidMap(format!("not a metric at ({x}, {y})")));
                }
                for z in 0..n {
                    if *d > &dist[x][z] + &dist[z][y] {
                        return Err(Error::InvalidMap(format!(
                            "triangle inequality fails at ({x}, {z}, {y})"
                        )));
                    }
                    if dist[table.mul(z, x)][table.mul(z, y)] != *d
                        || dist[table.mul(x, z)][table.mul(y, z)] != *d
                    {
                        return Err(Error::InvalidMap(format!(
                            "metric is not bi-invariant at ({x}, {y}) under {z}"
                        )));
                    }
                }
            }
        }
        Ok(MetricGroup::FiniteMetric { table, dist })
    }

    /// `Z/n` with `d(x, y) = scale·min(|x-y|, n-|x-y|)`.
    pub fn cyclic_circular(n: usize, scale: Rational) -> Result<Self> {
        if !scale.is_positive() {
            return Err(Error::Precondition("scale must be positive".into()));
        }
        let table = TableGroup::cyclic(n)?;
        let dist = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        let k = (x + n - y) % n;
                        &scale * Rational::from_integer(BigInt::from(k.min(n - k)))
                    })
                    .collect()
            })
            .collect();
        MetricGroup::finite(table, dist)
    }

    /// `d(x, y) = 1` for `x ≠ y`.
    pub fn discrete(table: TableGroup) -> Result<Self> {
        let n = table.order();
        let dist = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        if x == y {
                            Rational::zero()
                        } else {
                            Rational::one()
                        }
                    })
                    .collect()
            })
            .collect();
        MetricGroup::finite(table, dist)
    }

    pub fn identity(&self) -> GElem {
        match self {
            MetricGroup::FiniteMetric { table, .. } => GElem::Finite(table.identity()),
            MetricGroup::Circle => GElem::Angle(Rational::zero()),
            MetricGroup::Unitary(n) => GElem::Unitary(CMatrix::identity(*n)),
        }
    }

    pub fn validate(&self, x: &GElem) -> Result<()> {
        let ok = match (self, x) {
            (MetricGroup::FiniteMetric { table, .. }, GElem::Finite(i)) => *i < table.order(),
            (MetricGroup::Circle, GElem::Angle(t)) => {
                !t.is_negative() && *t < Rational::from_integer(2.into())
            }
            (MetricGroup::Unitary(n), GElem::Unitary(m)) => m.dim() == *n && m.is_unitary(TOL),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidElement {
                element: x.to_string(),
                descriptor: self.to_string(),
            })
        }
    }

    pub fn mul(&self, x: &GElem, y: &GElem) -> GElem {
        match (self, x, y) {
            (MetricGroup::FiniteMetric { table, .. }, GElem::Finite(a), GElem::Finite(b)) => {
                GElem::Finite(table.mul(*a, *b))
            }
            (MetricGroup::Circle, GElem::Angle(s), GElem::Angle(t)) => GElem::angle(s + t),
            (MetricGroup::Unitary(_), GElem::Unitary(a), GElem::Unitary(b)) => {
                GElem::Unitary(a.mul(b))
            }
            _ => panic!("element kind does not match {self}"),
        }
    }

    pub fn inv(&self, x: &GElem) -> GElem {
        match (self, x) {
            (MetricGroup::FiniteMetric { table, .. }, GElem::Finite(a)) => {
                GElem::Finite(table.inv(*a))
            }
            (MetricGroup::Circle, GElem::Angle(t)) => GElem::angle(-t),
            (MetricGroup::Unitary(_), GElem::Unitary(a)) => GElem::Unitary(a.adjoint()),
            _ => panic!("element kind does not match {self}"),
        }
    }

    pub fn pow(&self, x: &GElem, k: &BigInt) -> GElem {
        match (self, x) {
            (MetricGroup::FiniteMetric { table, .. }, GElem::Finite(a)) => {
                GElem::Finite(table.pow(*a, k))
            }
            (MetricGroup::Circle, GElem::Angle(t)) => {
                GElem::angle(t * Rational::from_integer(k.clone()))
            }
            (MetricGroup::Unitary(n), GElem::Unitary(a)) => {
                let mut base = if k.is_negative() {
                    a.adjoint()
                } else {
                    a.clone()
                };
                let mut e = k.abs();
                let mut acc = CMatrix::identity(*n);
                let two = BigInt::from(2);
                while !e.is_zero() {
                    if e.is_odd() {
                        acc = acc.mul(&base).reproject();
                    }
                    e /= &two;
                    base = base.mul(&base).reproject();
                }
                GElem::Unitary(acc)
            }
            _ => panic!("element kind does not match {self}"),
        }
    }

    pub fn dist(&self, x: &GElem, y: &GElem) -> Real {
        match (self, x, y) {
            (MetricGroup::FiniteMetric { dist, .. }, GElem::Finite(a), GElem::Finite(b)) => {
                Real::Exact(dist[*a][*b].clone())
            }
            (MetricGroup::Circle, GElem::Angle(s), GElem::Angle(t)) => {
                Real::Approx(to_f64(&arc_units(&(s - t))) * PI)
            }
            (MetricGroup::Unitary(_), GElem::Unitary(a), GElem::Unitary(b)) => {
                Real::Approx(a.frobenius_distance(b))
            }
            _ => panic!("element kind does not match {self}"),
        }
    }

    pub fn norm(&self, x: &GElem) -> Real {
        self.dist(x, &self.identity())
    }

    /// Equal for finite targets, within [`TOL`] otherwise.
    pub fn close(&self, x: &GElem, y: &GElem) -> bool {
        match self.dist(x, y) {
            Real::Exact(d) => d.is_zero(),
            Real::Approx(d) => d <= TOL,
        }
    }

    pub fn random_element<R: Rng>(&self, rng: &mut R) -> GElem {
        match self {
            MetricGroup::FiniteMetric { table, .. } => {
                GElem::Finite(rng.gen_range(0..table.order()))
            }
            MetricGroup::Circle => {
                let den: i64 = 1 << 20;
                GElem::angle(Rational::new(rng.gen_range(0..2 * den).into(), den.into()))
            }
            MetricGroup::Unitary(n) => GElem::Unitary(CMatrix::random_unitary(*n, rng)),
        }
    }

    /// `d(gx, gy) = d(x, y) = d(xg, yg)` on random triples (exhaustive for
    /// finite targets, where the constructor already checked it).
    pub fn check_bi_invariance(&self, samples: usize, seed: u64) -> Result<()> {
        if let MetricGroup::FiniteMetric { .. } = self {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let [g, x, y] = [0; 3].map(|_| self.random_element(&mut rng));
            let d = self.dist(&x, &y).to_f64();
            let left = self.dist(&self.mul(&g, &x), &self.mul(&g, &y)).to_f64();
            let right = self.dist(&self.mul(&x, &g), &self.mul(&y, &g)).to_f64();
            if (d - left).abs() > TOL || (d - right).abs() > TOL {
                return Err(Error::IdentityViolation(format!(
                    "distance not bi-invariant: {d} vs {left}, {right}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for MetricGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricGroup::FiniteMetric { table, .. } => {
                write!(f, "finite metric group of order {}", table.order())
            }
            MetricGroup::Circle => write!(f, "circle"),
            MetricGroup::Unitary(n) => write!(f, "U({n})"),
        }
    }
}

/// An alternating map from a factor to the target.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorQRMap {
    /// Given values on a finite support (identity elsewhere); on integer
    /// factors an optional `sign` element is used as `sign^{sgn k}` off the
    /// support.
    Support {
        values: BTreeMap<FactorElement, GElem>,
        sign: Option<GElem>,
    },
    /// The homomorphism sending the factor generator to the given element.
    Power(GElem),
}

impl FactorQRMap {
    pub fn identity() -> Self {
        FactorQRMap::Support {
            values: BTreeMap::new(),
            sign: None,
        }
    }

    /// Sets `μ(x) = g` and `μ(x⁻¹) = g⁻¹` for each pair.
    pub fn from_values<I>(d: &FactorDescriptor, target: &MetricGroup, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FactorElement, GElem)>,
    {
        let mut values: BTreeMap<FactorElement, GElem> = BTreeMap::new();
        for (x, g) in pairs {
            d.validate(&x)?;
            target.validate(&g)?;
            let xi = d.inv_unchecked(&x);
            let gi = target.inv(&g);
            for (key, val) in [(x.clone(), g), (xi, gi)] {
                if let Some(old) = values.get(&key) {
                    if !target.close(old, &val) {
                        return Err(Error::InvalidMap(format!("conflicting values at {key}")));
                    }
                }
                values.insert(key, val);
            }
        }
        let e = target.identity();
        values.retain(|_, g| !target.close(g, &e));
        if values.contains_key(&d.identity()) {
            return Err(Error::InvalidMap(
                "value at the identity must be the identity".into(),
            ));
        }
        Ok(FactorQRMap::Support { values, sign: None })
    }

    /// `k ↦ g^{sgn k}` on the integers.
    pub fn sign(g: GElem) -> Self {
        FactorQRMap::Support {
            values: BTreeMap::new(),
            sign: Some(g),
        }
    }

    pub fn with_sign(self, g: GElem) -> Self {
        match self {
            FactorQRMap::Support { values, .. } => FactorQRMap::Support {
                values,
                sign: Some(g),
            },
            FactorQRMap::Power(_) => FactorQRMap::sign(g),
        }
    }

    pub fn power(g: GElem) -> Self {
        FactorQRMap::Power(g)
    }

    pub fn eval(&self, d: &FactorDescriptor, target: &MetricGroup, x: &FactorElement) -> GElem {
        match self {
            FactorQRMap::Support { values, sign } => {
                if let Some(g) = values.get(x) {
                    return g.clone();
                }
                match (sign, x.as_int()) {
                    (Some(s), Some(k)) if k.is_positive() => s.clone(),
                    (Some(s), Some(k)) if k.is_negative() => target.inv(s),
                    _ => target.identity(),
                }
            }
            FactorQRMap::Power(g) => {
                let k = match x {
                    FactorElement::Int(k) => k.clone(),
                    FactorElement::Finite(r) => match d {
                        FactorDescriptor::Cyclic(_) => BigInt::from(*r),
                        _ => panic!("power maps need a cyclic factor"),
                    },
                };
                target.pow(g, &k)
            }
        }
    }

    /// Largest `|k|` in the support of a map on an integer factor.
    pub fn support_radius(&self) -> i64 {
        match self {
            FactorQRMap::Support { values, .. } => values
                .keys()
                .filter_map(|x| x.as_int().and_then(|k| k.abs().to_i64()))
                .max()
                .unwrap_or(0),
            FactorQRMap::Power(_) => 0,
        }
    }

    /// Elements where the map is examined: all of a finite factor, and
    /// `[-W, W]` with `W = 2M + 6` on the integers.
    fn window(&self, d: &FactorDescriptor) -> Vec<FactorElement> {
        match d.enumerate() {
            Ok(all) => all,
            Err(_) => {
                let w = 2 * self.support_radius() + 6;
                (-w..=w).map(FactorElement::int).collect()
            }
        }
    }

    pub fn validate(&self, d: &FactorDescriptor, target: &MetricGroup) -> Result<()> {
        match self {
            FactorQRMap::Power(g) => {
                target.validate(g)?;
                match d {
                    FactorDescriptor::Integer => Ok(()),
                    FactorDescriptor::Cyclic(n) => {
                        if target.close(&target.pow(g, &BigInt::from(*n)), &target.identity()) {
                            Ok(())
                        } else {
                            Err(Error::NotHomomorphism(format!(
                                "image of the generator has order not dividing {n}"
                            )))
                        }
                    }
                    FactorDescriptor::Table(_) => {
                        Err(Error::InvalidMap("power maps need a cyclic factor".into()))
                    }
                }
            }
            FactorQRMap::Support { values, sign } => {
                if sign.is_some() && *d != FactorDescriptor::Integer {
                    return Err(Error::InvalidMap("sign maps need an integer factor".into()));
                }
                if let Some(s) = sign {
                    target.validate(s)?;
                }
                for (x, g) in values {
                    d.validate(x)?;
                    target.validate(g)?;
                    let back = self.eval(d, target, &d.inv_unchecked(x));
                    if !target.close(&back, &target.inv(g)) {
                        return Err(Error::InvalidMap(format!("not alternating at {x}")));
                    }
                }
                if !target.close(&self.eval(d, target, &d.identity()), &target.identity()) {
                    return Err(Error::InvalidMap(
                        "value at the identity must be the identity".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// `μ(xy) = μ(x)μ(y)` on the factor window.
    pub fn is_homomorphism(&self, d: &FactorDescriptor, target: &MetricGroup) -> bool {
        if let (FactorQRMap::Power(_), FactorDescriptor::Integer | FactorDescriptor::Cyclic(_)) =
            (self, d)
        {
            return self.validate(d, target).is_ok();
        }
        let window = self.window(d);
        window.iter().all(|x| {
            window.iter().all(|y| {
                let xy = d.mul_unchecked(x, y);
                let lhs = self.eval(d, target, &xy);
                let rhs = target.mul(&self.eval(d, target, x), &self.eval(d, target, y));
                target.close(&lhs, &rhs)
            })
        })
    }
}

/// `sup d(μ(xy), μ(x)μ(y))` over the factor window, with a maximizing pair.
pub fn qrep_factor_defect(
    d: &FactorDescriptor,
    mu: &FactorQRMap,
    target: &MetricGroup,
) -> (Real, Option<(FactorElement, FactorElement)>) {
    let window = mu.window(d);
    let values: Vec<GElem> = window.iter().map(|x| mu.eval(d, target, x)).collect();
    let mut best = Real::zero();
    let mut pair = None;
    for (i, x) in window.iter().enumerate() {
        for (j, y) in window.iter().enumerate() {
            let xy = d.mul_unchecked(x, y);
            let c = target.dist(
                &mu.eval(d, target, &xy),
                &target.mul(&values[i], &values[j]),
            );
            if c.to_f64() > best.to_f64() || (pair.is_none() && c.to_f64() > 0.0) {
                best = c;
                pair = Some((x.clone(), y.clone()));
            }
        }
    }
    (best, pair)
}

/// `max d(μ(x), e)`; `None` for unbounded maps.
pub fn sup_norm_qrep(
    d: &FactorDescriptor,
    mu: &FactorQRMap,
    target: &MetricGroup,
) -> Option<(Real, FactorElement)> {
    let candidates: Vec<FactorElement> = match (mu, d.enumerate()) {
        (_, Ok(all)) => all,
        (FactorQRMap::Power(g), Err(_)) => {
            return if target.close(g, &target.identity()) {
                Some((Real::zero(), FactorElement::int(0)))
            } else {
                None
            };
        }
        (FactorQRMap::Support { values, sign }, Err(_)) => {
            let mut c: Vec<FactorElement> = values.keys().cloned().collect();
            if sign.is_some() {
                let m = mu.support_radius() + 1;
                c.push(FactorElement::int(m));
                c.push(FactorElement::int(-m));
            }
            c.push(FactorElement::int(0));
            c
        }
    };
    let mut best: Option<(Real, FactorElement)> = None;
    for x in candidates {
        let v = target.norm(&mu.eval(d, target, &x));
        if best.as_ref().is_none_or(|(b, _)| v.to_f64() > b.to_f64()) {
            best = Some((v, x));
        }
    }
    best
}

/// `μ = μ_A∗μ_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitQRep {
    pub splitting: Splitting,
    pub target: MetricGroup,
    pub mu_a: FactorQRMap,
    pub mu_b: FactorQRMap,
}

impl SplitQRep {
    pub fn new(
        splitting: Splitting,
        target: MetricGroup,
        mu_a: FactorQRMap,
        mu_b: FactorQRMap,
    ) -> Result<Self> {
        mu_a.validate(&splitting.a, &target)?;
        mu_b.validate(&splitting.b, &target)?;
        Ok(SplitQRep {
            splitting,
            target,
            mu_a,
            mu_b,
        })
    }

    /// Trivial map into the target.
    pub fn trivial(splitting: Splitting, target: MetricGroup) -> Self {
        SplitQRep {
            splitting,
            target,
            mu_a: FactorQRMap::identity(),
            mu_b: FactorQRMap::identity(),
        }
    }

    pub fn factor(&self, side: Side) -> &FactorQRMap {
        match side {
            Side::A => &self.mu_a,
            Side::B => &self.mu_b,
        }
    }

    pub fn eval_letter(&self, l: &Letter) -> GElem {
        self.factor(l.side)
            .eval(self.splitting.factor(l.side), &self.target, &l.elem)
    }

    /// `μ_A(a_1)μ_B(b_1)⋯` over the normal form.
    pub fn eval(&self, g: &Word) -> GElem {
        let mut acc = self.target.identity();
        for (i, l) in g.letters().iter().enumerate() {
            acc = self.target.mul(&acc, &self.eval_letter(l));
            if (i + 1) % REPROJECT_EVERY == 0 {
                if let GElem::Unitary(m) = &acc {
                    acc = GElem::Unitary(m.reproject());
                }
            }
        }
        acc
    }

    /// `d(μ(gh), μ(g)μ(h))`.
    pub fn coboundary(&self, g: &Word, h: &Word) -> Real {
        let gh = self.splitting.multiply(g, h);
        self.target.dist(
            &self.eval(&gh),
            &self.target.mul(&self.eval(g), &self.eval(h)),
        )
    }

    pub fn factor_defect(&self, side: Side) -> (Real, Option<(FactorElement, FactorElement)>) {
        qrep_factor_defect(self.splitting.factor(side), self.factor(side), &self.target)
    }

    /// `max(def μ_A, def μ_B)`.
    pub fn defect(&self) -> Real {
        self.factor_defect(Side::A)
            .0
            .max(self.factor_defect(Side::B).0)
    }

    pub fn sampled_defect(&self, sampler: &mut WordSampler, count: usize) -> Real {
        let mut best = Real::zero();
        for _ in 0..count {
            let g = sampler.sample();
            let h = sampler.sample();
            best = best.max(self.coboundary(&g, &h));
        }
        best
    }

    /// Coboundaries at junction pairs built from each factor's maximizing
    /// pair; the larger of the two.
    pub fn junction_defect(&self, sampler: &mut WordSampler, count: usize) -> Real {
        let mut best = Real::zero();
        for side in [Side::A, Side::B] {
            if let (_, Some((x, y))) = self.factor_defect(side) {
                for _ in 0..count.max(1) {
                    let (g, h) = sampler.junction_pair(side, &x, &y);
                    best = best.max(self.coboundary(&g, &h));
                }
            }
        }
        best
    }

    /// `max(‖μ_A‖_∞, ‖μ_B‖_∞)`; `None` for unbounded maps.
    pub fn sup_norm(&self) -> Option<Real> {
        let a = sup_norm_qrep(&self.splitting.a, &self.mu_a, &self.target)?;
        let b = sup_norm_qrep(&self.splitting.b, &self.mu_b, &self.target)?;
        Some(a.0.max(b.0))
    }

    pub fn is_homomorphism(&self) -> bool {
        self.mu_a.is_homomorphism(&self.splitting.a, &self.target)
            && self.mu_b.is_homomorphism(&self.splitting.b, &self.target)
    }

    /// `d(μ(g), ρ(g))`.
    pub fn distance_at(&self, other: &SplitQRep, g: &Word) -> Real {
        self.target.dist(&self.eval(g), &other.eval(g))
    }
}

/// A word where `μ` and `ρ` are at least `δ` apart.
#[derive(Debug, Clone, PartialEq)]
pub struct NontrivialityWitness {
    pub word: Word,
    pub distance: Real,
    pub delta: Real,
    pub candidates_tried: usize,
}

/// Searches for `g` with `d(μ(g), ρ(g)) ≥ δ` among factor elements first,
/// then the powers `(a b^{±1})^n`, `n ≤ depth`.
///
/// The target is assumed free of `ε`-small subgroups; certify it once with
/// [`check_no_small_subgroups`] before searching against many `ρ`.
pub fn nontriviality_witness(
    mu: &SplitQRep,
    rho: &SplitQRep,
    eps: f64,
    depth: u32,
) -> Result<NontrivialityWitness> {
    if mu.splitting != rho.splitting || mu.target != rho.target {
        return Err(Error::ShapeMismatch(
            "μ and ρ live on different groups".into(),
        ));
    }
    if !rho.is_homomorphism() {
        return Err(Error::NotHomomorphism("candidate representation".into()));
    }
    let delta = mu
        .sup_norm()
        .ok_or_else(|| Error::Precondition("μ must be bounded".into()))?;
    if delta.to_f64() > eps / 2.0 + TOL {
        return Err(Error::Precondition(format!(
            "δ = {delta} exceeds ε/2 = {}",
            eps / 2.0
        )));
    }
    if delta.to_f64() == 0.0 {
        return Ok(NontrivialityWitness {
            word: Word::identity(),
            distance: Real::zero(),
            delta,
            candidates_tried: 0,
        });
    }
    let s = &mu.splitting;
    let mut tried = 0;
    let mut check = |g: Word| -> Option<NontrivialityWitness> {
        tried += 1;
        let d = mu.distance_at(rho, &g);
        (d.to_f64() >= delta.to_f64() - TOL).then(|| NontrivialityWitness {
            word: g,
            distance: d,
            delta: delta.clone(),
            candidates_tried: tried,
        })
    };
    let mut anchors: Vec<[FactorElement; 2]> = Vec::new();
    let mut per_side: Vec<Vec<FactorElement>> = Vec::new();
    for side in [Side::A, Side::B] {
        let d = s.factor(side);
        let mu_f = mu.factor(side);
        let elems: Vec<FactorElement> = match d.enumerate() {
            Ok(all) => all.into_iter().filter(|x| !d.is_identity(x)).collect(),
            Err(_) => {
                let k = (mu_f.support_radius() + 1).max(depth as i64);
                (1..=k)
                    .flat_map(|i| [FactorElement::int(i), FactorElement::int(-i)])
                    .collect()
            }
        };
        for x in &elems {
            if let Some(w) = check(s.letter(side, x.clone())?) {
                return Ok(w);
            }
        }
        let argmax = sup_norm_qrep(d, mu_f, &mu.target)
            .map(|(_, x)| x)
            .filter(|x| !d.is_identity(x));
        let gen = d.generator().or_else(|| elems.first().cloned());
        per_side.push(argmax.into_iter().chain(gen).collect());
    }
    for a in &per_side[0] {
        for b in &per_side[1] {
            anchors.push([a.clone(), b.clone()]);
        }
    }
    for [a, b] in anchors {
        let bw = s.letter(Side::B, b)?;
        for bb in [bw.clone(), s.invert(&bw)] {
            let g = s.multiply(&s.letter(Side::A, a.clone())?, &bb);
            for n in 1..=depth {
                if let Some(w) = check(s.power_i64(&g, n as i64)) {
                    return Ok(w);
                }
            }
        }
    }
    Err(Error::SearchExhausted(format!(
        "no word within depth {depth} separates μ from ρ by δ = {delta}"
    )))
}

/// Search limits for [`check_no_small_subgroups`] on infinite targets.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallSubgroupOptions {
    /// Rotation angles `jπ/D` tested on the circle.
    pub circle_denominator: i64,
    /// Powers scanned per element.
    pub power_bound: u32,
    /// Random unitaries tested.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SmallSubgroupOptions {
    fn default() -> Self {
        SmallSubgroupOptions {
            circle_denominator: 360,
            power_bound: 720,
            samples: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallSubgroupReport {
    pub passed: bool,
    pub checked: usize,
    /// Elements of a subgroup inside the open `ε`-ball, when one was found.
    pub violating: Option<Vec<GElem>>,
}

/// The cyclic subgroup of `g`, if every power up to `bound` stays inside
/// the open `ε`-ball and the powers return to the identity.
fn small_cyclic(target: &MetricGroup, g: &GElem, eps: f64, bound: u32) -> Option<Vec<GElem>> {
    let e = target.identity();
    let mut powers = vec![e.clone()];
    let mut x = g.clone();
    for _ in 0..bound {
        if target.norm(&x).to_f64() >= eps {
            return None;
        }
        if target.close(&x, &e) {
            return Some(powers);
        }
        powers.push(x.clone());
        x = target.mul(&x, g);
    }
    Some(powers)
}

/// Checks that no nontrivial subgroup lies in the open `ε`-ball around the
/// identity: exhaustively over cyclic subgroups for finite targets, on a
/// grid of rotations for the circle, and on random elements near the
/// identity for unitary groups. A bounded scan that never leaves the ball
/// counts as a failure.
pub fn check_no_small_subgroups(
    target: &MetricGroup,
    eps: f64,
    opts: &SmallSubgroupOptions,
) -> SmallSubgroupReport {
    let candidates: Vec<GElem> = match target {
        MetricGroup::FiniteMetric { table, .. } => (0..table.order())
            .filter(|&i| i != table.identity())
            .map(GElem::Finite)
            .collect(),
        MetricGroup::Circle => {
            let den = opts.circle_denominator.max(3);
            let mut c: Vec<GElem> = (1..2 * den)
                .map(|j| GElem::angle(Rational::new(j.into(), den.into())))
                .collect();
            c.push(GElem::angle(Rational::new(2.into(), 3.into())));
            c
        }
        MetricGroup::Unitary(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            (0..opts.samples)
                .map(|_| {
                    let u = CMatrix::random_unitary(*n, &mut rng);
                    let r: f64 = rng.gen_range(0.0..1.0);
                    let phases: Vec<f64> = (0..*n).map(|_| rng.gen_range(-PI..PI) * r).collect();
                    GElem::Unitary(u.mul(&CMatrix::diagonal_phases(&phases)).mul(&u.adjoint()))
                })
                .filter(|g| target.norm(g).to_f64() < eps)
                .collect()
        }
    };
    let bound = match target {
        MetricGroup::FiniteMetric { table, .. } => table.order() as u32,
        _ => opts.power_bound,
    };
    let mut checked = 0;
    for g in &candidates {
        checked += 1;
        if target.norm(g).to_f64() >= eps {
            continue;
        }
        if let Some(sub) = small_cyclic(target, g, eps, bound) {
            return SmallSubgroupReport {
                passed: false,
                checked,
                violating: Some(sub),
            };
        }
    }
    SmallSubgroupReport {
        passed: true,
        checked,
        violating: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn quarter_turn_circle() -> SplitQRep {
        let r = GElem::angle(rat(1, 4));
        SplitQRep::new(
            Splitting::free(),
            MetricGroup::Circle,
            FactorQRMap::sign(r.clone()),
            FactorQRMap::sign(r),
        )
        .unwrap()
    }

    #[test]
    fn circle_sign_map_defect() {
        let mu = quarter_turn_circle();
        // oracle: arc of (π/4)(sgn k + sgn l - sgn(k+l)) over a wide window
        let sgn = |k: i64| k.signum() as f64;
        let mut oracle: f64 = 0.0;
        for k in -20i64..=20 {
            for l in -20i64..=20 {
                let t = (PI / 4.0 * (sgn(k) + sgn(l) - sgn(k + l))).rem_euclid(2.0 * PI);
                oracle = oracle.max(t.min(2.0 * PI - t));
            }
        }
        let (def, pair) = mu.factor_defect(Side::A);
        assert!((def.to_f64() - oracle).abs() < TOL);
        assert!((oracle - PI / 4.0).abs() < TOL);
        assert!(pair.is_some());
        assert!((mu.sup_norm().unwrap().to_f64() - PI / 4.0).abs() < TOL);
        let mut sampler = WordSampler::new(Splitting::free(), 6, 4, 3);
        let j = mu.junction_defect(&mut sampler, 5);
        assert!((j.to_f64() - def.to_f64()).abs() < TOL);
        assert!(mu.sampled_defect(&mut sampler, 500).to_f64() <= def.to_f64() + TOL);
    }

    #[test]
    fn evaluation_reverses_under_inversion() {
        let mu = quarter_turn_circle();
        let s = Splitting::free();
        assert!(mu
            .target
            .close(&mu.eval(&Word::identity()), &mu.target.identity()));
        let mut sampler = WordSampler::new(s.clone(), 8, 5, 1);
        for _ in 0..100 {
            let g = sampler.sample();
            assert!(mu
                .target
                .close(&mu.eval(&s.invert(&g)), &mu.target.inv(&mu.eval(&g))));
        }
    }

    #[test]
    fn finite_metric_axioms() {
        let g = MetricGroup::cyclic_circular(12, rat(1, 4)).unwrap();
        assert_eq!(
            g.dist(&GElem::Finite(1), &GElem::Finite(11)),
            Real::Exact(rat(1, 2))
        );
        let bad = vec![
            vec![int(0), int(1), int(2)],
            vec![int(1), int(0), int(1)],
            vec![int(2), int(1), int(0)],
        ];
        assert!(MetricGroup::finite(TableGroup::cyclic(3).unwrap(), bad).is_err());
        assert!(check_no_small_subgroups(&g, 1.0, &SmallSubgroupOptions::default()).passed);
        let loose = check_no_small_subgroups(&g, 1.3, &SmallSubgroupOptions::default());
        assert!(!loose.passed);
        let d = MetricGroup::discrete(TableGroup::symmetric3()).unwrap();
        assert!(check_no_small_subgroups(&d, 1.0, &SmallSubgroupOptions::default()).passed);
    }

    #[test]
    fn circle_small_subgroups() {
        let o = SmallSubgroupOptions::default();
        assert!(check_no_small_subgroups(&MetricGroup::Circle, PI / 2.0, &o).passed);
        assert!(!check_no_small_subgroups(&MetricGroup::Circle, 1.5 * PI, &o).passed);
        // the subgroup of order 3 sits inside any ball wider than 2π/3
        assert!(!check_no_small_subgroups(&MetricGroup::Circle, 0.7 * PI, &o).passed);
        MetricGroup::Circle.check_bi_invariance(1000, 2).unwrap();
    }

    #[test]
    fn unitary_targets() {
        let u = MetricGroup::Unitary(2);
        u.check_bi_invariance(300, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = u.random_element(&mut rng);
        u.validate(&x).unwrap();
        let p = u.pow(&x, &BigInt::from(-7));
        let q = u.pow(&x, &BigInt::from(7));
        assert!(u.close(&u.mul(&p, &q), &u.identity()));
        let small = GElem::Unitary(CMatrix::diagonal_phases(&[0.1, -0.05]));
        let mu = SplitQRep::new(
            Splitting::free(),
            u.clone(),
            FactorQRMap::from_values(
                &FactorDescriptor::Integer,
                &u,
                [(FactorElement::int(1), small)],
            )
            .unwrap(),
            FactorQRMap::identity(),
        )
        .unwrap();
        let mut long = Vec::new();
        for _ in 0..200 {
            long.extend([Letter::a(1), Letter::b(1)]);
        }
        let w = Splitting::free().reduce(long).unwrap();
        let GElem::Unitary(m) = mu.eval(&w) else {
            panic!()
        };
        assert!(m.is_unitary(TOL));
        assert!(check_no_small_subgroups(&u, 1.0, &SmallSubgroupOptions::default()).passed);
    }

    #[test]
    fn witnesses() {
        let mu = quarter_turn_circle();
        let rho = SplitQRep::trivial(Splitting::free(), MetricGroup::Circle);
        let w = nontriviality_witness(&mu, &rho, PI / 2.0, 32).unwrap();
        assert_eq!(w.word.len(), 1);
        assert!((w.distance.to_f64() - PI / 4.0).abs() < TOL);
        let triv = SplitQRep::trivial(Splitting::free(), MetricGroup::Circle);
        let w = nontriviality_witness(&triv, &rho, PI / 2.0, 32).unwrap();
        assert!(w.word.is_empty());
        let nonhom = quarter_turn_circle();
        assert!(matches!(
            nontriviality_witness(&mu, &nonhom, PI / 2.0, 32),
            Err(Error::NotHomomorphism(_))
        ));
        assert!(matches!(
            nontriviality_witness(&mu, &rho, 0.3, 32),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn homomorphisms_have_zero_defect() {
        let g = MetricGroup::cyclic_circular(12, rat(1, 4)).unwrap();
        let s = Splitting::new(FactorDescriptor::Cyclic(3), FactorDescriptor::Cyclic(4)).unwrap();
        let rho = SplitQRep::new(
            s,
            g,
            FactorQRMap::power(GElem::Finite(4)),
            FactorQRMap::power(GElem::Finite(3)),
        )
        .unwrap();
        assert!(rho.is_homomorphism());
        assert_eq!(rho.defect(), Real::zero());
        let bad = FactorQRMap::power(GElem::Finite(1));
        assert!(bad
            .validate(&FactorDescriptor::Cyclic(3), &rho.target)
            .is_err());
    }
}
