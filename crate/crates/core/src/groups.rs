//! Factor groups of a splitting: the integers, cyclic groups and finite
//! groups given by an explicit multiplication table.

use std::fmt;

use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An element of a factor group.
///
/// Integer factors carry an exponent `k` (the element `a^k`); cyclic factors
/// carry a residue in `[0, n)`; table groups carry a row index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactorElement {
    Int(BigInt),
    Finite(usize),
}

impl FactorElement {
    pub fn int(k: i64) -> Self {
        FactorElement::Int(BigInt::from(k))
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            FactorElement::Int(k) => Some(k),
            FactorElement::Finite(_) => None,
        }
    }

    pub fn as_index(&self) -> Option<usize> {
        match self {
            FactorElement::Finite(i) => Some(*i),
            FactorElement::Int(_) => None,
        }
    }
}

impl fmt::Display for FactorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorElement::Int(k) => write!(f, "{k}"),
            FactorElement::Finite(i) => write!(f, "#{i}"),
        }
    }
}

/// Order of a group element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Finite(u64),
    Infinite,
}

/// A finite group presented by its full multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableGroup {
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    identity: usize,
}

impl TableGroup {
    /// Validates the Latin-square, identity, inverse and associativity laws.
    pub fn new(mul: Vec<Vec<usize>>, inv: Vec<usize>, identity: usize) -> Result<Self> {
        let n = mul.len();
        if n == 0 {
            return Err(Error::InvalidTable("empty table".into()));
        }
        if inv.len() != n || identity >= n {
            return Err(Error::InvalidTable(
                "inverse table or identity out of range".into(),
            ));
        }
        for (i, row) in mul.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidTable(format!(
                    "row {i} has length {}",
                    row.len()
                )));
            }
            let mut seen = vec![false; n];
            for &x in row {
                if x >= n || seen[x] {
                    return Err(Error::InvalidTable(format!("row {i} is not a permutation")));
                }
                seen[x] = true;
            }
        }
        for j in 0..n {
            let mut seen = vec![false; n];
            for row in &mul {
                if seen[row[j]] {
                    return Err(Error::InvalidTable(format!(
                        "column {j} is not a permutation"
                    )));
                }
                seen[row[j]] = true;
            }
        }
        for x in 0..n {
            if mul[identity][x] != x || mul[x][identity] != x {
                return Err(Error::InvalidTable(format!(
                    "{identity} is not neutral for {x}"
                )));
            }
            if inv[x] >= n || mul[x][inv[x]] != identity || mul[inv[x]][x] != identity {
                return Err(Error::InvalidTable(format!(
                    "inverse of {x} is inconsistent"
                )));
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if mul[mul[x][y]][z] != mul[x][mul[y][z]] {
                        return Err(Error::InvalidTable(format!(
                            "not associative at ({x},{y},{z})"
                        )));
                    }
                }
            }
        }
        Ok(TableGroup { mul, inv, identity })
    }

    /// Table of `Z/n` with residues as indices.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTable("order must be positive".into()));
        }
        let mul = (0..n)
            .map(|i| (0..n).map(|j| (i + j) % n).collect())
            .collect();
        let inv = (0..n).map(|i| (n - i) % n).collect();
        TableGroup::new(mul, inv, 0)
    }

    /// The symmetric group on three letters.
    ///
    /// Index 0 is the identity, 1 and 2 the 3-cycles, 3..=5 the transpositions.
    pub fn symmetric3() -> Self {
        // permutations of {0,1,2} as images
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2],
            [1, 2, 0],
            [2, 0, 1],
            [1, 0, 2],
            [0, 2, 1],
            [2, 1, 0],
        ];
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let compose = |p: [usize; 3], q: [usize; 3]| [p[q[0]], p[q[1]], p[q[2]]];
        let mul = (0..6)
            .map(|i| (0..6).map(|j| index(compose(perms[i], perms[j]))).collect())
            .collect::<Vec<Vec<usize>>>();
        let inv = (0..6)
            .map(|i| (0..6).find(|&j| mul[i][j] == 0).unwrap())
            .collect();
        TableGroup::new(mul, inv, 0).expect("S3 table is a group")
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.mul[x][y]
    }

    pub fn inv(&self, x: usize) -> usize {
        self.inv[x]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mul
    }

    pub fn inverse_table(&self) -> &[usize] {
        &self.inv
    }

    pub fn element_order(&self, x: usize) -> u64 {
        let mut k = 1;
        let mut y = x;
        while y != self.identity {
            y = self.mul[y][x];
            k += 1;
        }
        k
    }

    pub fn pow(&self, x: usize, k: &BigInt) -> usize {
        let ord = BigInt::from(self.element_order(x));
        let mut e = k.mod_floor(&ord).to_u64().unwrap_or(0);
        let mut base = x;
        let mut acc = self.identity;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul[acc][base];
            }
            base = self.mul[base][base];
            e >>= 1;
        }
        acc
    }
}

/// One factor of a free product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorDescriptor {
    Integer,
    Cyclic(usize),
    Table(TableGroup),
}

impl fmt::Display for FactorDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorDescriptor::Integer => write!(f, "Z"),
            FactorDescriptor::Cyclic(n) => write!(f, "Z/{n}"),
            FactorDescriptor::Table(t) => write!(f, "table group of order {}", t.order()),
        }
    }
}

impl FactorDescriptor {
    pub fn cyclic(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDescriptor(format!(
                "cyclic group order {n} < 2"
            )));
        }
        Ok(FactorDescriptor::Cyclic(n))
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, FactorDescriptor::Integer)
    }

    /// Number of elements, `None` for the integers.
    pub fn size(&self) -> Option<usize> {
        match self {
            FactorDescriptor::Integer => None,
            FactorDescriptor::Cyclic(n) => Some(*n),
            FactorDescriptor::Table(t) => Some(t.order()),
        }
    }

    /// True when the group has more than one element.
    pub fn is_nontrivial(&self) -> bool {
        self.size().is_none_or(|n| n > 1)
    }

    pub fn validate(&self, x: &FactorElement) -> Result<()> {
        let ok = match (self, x) {
            (FactorDescriptor::Integer, FactorElement::Int(_)) => true,
            (FactorDescriptor::Cyclic(n), FactorElement::Finite(r)) => r < n,
            (FactorDescriptor::Table(t), FactorElement::Finite(i)) => *i < t.order(),
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

    pub fn identity(&self) -> FactorElement {
        match self {
            FactorDescriptor::Integer => FactorElement::Int(BigInt::zero()),
            FactorDescriptor::Cyclic(_) => FactorElement::Finite(0),
            FactorDescriptor::Table(t) => FactorElement::Finite(t.identity()),
        }
    }

    pub fn is_identity(&self, x: &FactorElement) -> bool {
        *x == self.identity()
    }

    /// The designated generator of an integer or cyclic factor.
    pub fn generator(&self) -> Option<FactorElement> {
        match self {
            FactorDescriptor::Integer => Some(FactorElement::Int(BigInt::one())),
            FactorDescriptor::Cyclic(_) => Some(FactorElement::Finite(1)),
            FactorDescriptor::Table(_) => None,
        }
    }

    pub fn multiply(&self, x: &FactorElement, y: &FactorElement) -> Result<FactorElement> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(self.mul_unchecked(x, y))
    }

    pub fn invert(&self, x: &FactorElement) -> Result<FactorElement> {
        self.validate(x)?;
        Ok(self.inv_unchecked(x))
    }

    /// `x^k` for an arbitrary-precision exponent.
    pub fn power(&self, x: &FactorElement, k: &BigInt) -> Result<FactorElement> {
        self.validate(x)?;
        Ok(self.pow_unchecked(x, k))
    }

    pub(crate) fn mul_unchecked(&self, x: &FactorElement, y: &FactorElement) -> FactorElement {
        match (self, x, y) {
            (FactorDescriptor::Integer, FactorElement::Int(a), FactorElement::Int(b)) => {
                FactorElement::Int(a + b)
            }
            (FactorDescriptor::Cyclic(n), FactorElement::Finite(a), FactorElement::Finite(b)) => {
                FactorElement::Finite((a + b) % n)
            }
            (FactorDescriptor::Table(t), FactorElement::Finite(a), FactorElement::Finite(b)) => {
                FactorElement::Finite(t.mul(*a, *b))
            }
            _ => panic!("element kind does not match descriptor {self}"),
        }
    }

    pub(crate) fn inv_unchecked(&self, x: &FactorElement) -> FactorElement {
        match (self, x) {
            (FactorDescriptor::Integer, FactorElement::Int(a)) => FactorElement::Int(-a),
            (FactorDescriptor::Cyclic(n), FactorElement::Finite(a)) => {
                FactorElement::Finite((n - a) % n)
            }
            (FactorDescriptor::Table(t), FactorElement::Finite(a)) => {
                FactorElement::Finite(t.inv(*a))
            }
            _ => panic!("element kind does not match descriptor {self}"),
        }
    }

    pub(crate) fn pow_unchecked(&self, x: &FactorElement, k: &BigInt) -> FactorElement {
        match (self, x) {
            (FactorDescriptor::Integer, FactorElement::Int(a)) => FactorElement::Int(a * k),
            (FactorDescriptor::Cyclic(n), FactorElement::Finite(a)) => {
                let r = (BigInt::from(*a) * k).mod_floor(&BigInt::from(*n));
                FactorElement::Finite(r.to_usize().expect("residue fits in usize"))
            }
            (FactorDescriptor::Table(t), FactorElement::Finite(a)) => {
                FactorElement::Finite(t.pow(*a, k))
            }
            _ => panic!("element kind does not match descriptor {self}"),
        }
    }

    pub fn element_order(&self, x: &FactorElement) -> Result<Order> {
        self.validate(x)?;
        Ok(match (self, x) {
            (FactorDescriptor::Integer, FactorElement::Int(k)) => {
                if k.is_zero() {
                    Order::Finite(1)
                } else {
                    Order::Infinite
                }
            }
            (FactorDescriptor::Cyclic(n), FactorElement::Finite(r)) => {
                Order::Finite((n / n.gcd(r)) as u64)
            }
            (FactorDescriptor::Table(t), FactorElement::Finite(i)) => {
                Order::Finite(t.element_order(*i))
            }
            _ => unreachable!("validated above"),
        })
    }

    /// All elements of a finite factor, identity first for cyclic groups.
    pub fn enumerate(&self) -> Result<Vec<FactorElement>> {
        match self.size() {
            Some(n) => Ok((0..n).map(FactorElement::Finite).collect()),
            None => Err(Error::InfiniteGroup(self.to_string())),
        }
    }

    /// A table for a finite factor (cyclic groups are expanded).
    pub fn to_table(&self) -> Result<TableGroup> {
        match self {
            FactorDescriptor::Integer => Err(Error::InfiniteGroup(self.to_string())),
            FactorDescriptor::Cyclic(n) => TableGroup::cyclic(*n),
            FactorDescriptor::Table(t) => Ok(t.clone()),
        }
    }

    /// Radius of an integer element, used for window computations.
    pub fn int_abs(x: &FactorElement) -> Option<BigInt> {
        x.as_int().map(|k| k.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s3() -> FactorDescriptor {
        FactorDescriptor::Table(TableGroup::symmetric3())
    }

    #[test]
    fn multiply_examples() {
        let z = FactorDescriptor::Integer;
        assert_eq!(
            z.multiply(&FactorElement::int(3), &FactorElement::int(-3))
                .unwrap(),
            z.identity()
        );
        let c3 = FactorDescriptor::cyclic(3).unwrap();
        assert_eq!(
            c3.multiply(&FactorElement::Finite(2), &FactorElement::Finite(2))
                .unwrap(),
            FactorElement::Finite(1)
        );
        let g = s3();
        for t in 3..6 {
            let x = FactorElement::Finite(t);
            assert!(g.is_identity(&g.multiply(&x, &x).unwrap()));
        }
    }

    #[test]
    fn descriptor_mismatch_is_an_error() {
        let z = FactorDescriptor::Integer;
        assert!(z
            .multiply(&FactorElement::Finite(1), &FactorElement::int(1))
            .is_err());
        let c4 = FactorDescriptor::cyclic(4).unwrap();
        assert!(c4.invert(&FactorElement::Finite(4)).is_err());
        assert!(FactorDescriptor::cyclic(1).is_err());
    }

    #[test]
    fn inverse_and_identity() {
        let z = FactorDescriptor::Integer;
        assert_eq!(
            z.invert(&FactorElement::int(5)).unwrap(),
            FactorElement::int(-5)
        );
        assert_eq!(
            FactorDescriptor::Cyclic(4).identity(),
            FactorElement::Finite(0)
        );
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x = FactorElement::int(rng.gen_range(-1000..1000));
            assert_eq!(z.invert(&z.invert(&x).unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn orders() {
        let z = FactorDescriptor::Integer;
        assert_eq!(
            z.element_order(&FactorElement::int(0)).unwrap(),
            Order::Finite(1)
        );
        assert_eq!(
            z.element_order(&FactorElement::int(7)).unwrap(),
            Order::Infinite
        );
        let c6 = FactorDescriptor::Cyclic(6);
        // brute-force oracle: least n with n*4 = 0 mod 6
        let brute = (1..=6).find(|k| (4 * k) % 6 == 0).unwrap();
        assert_eq!(
            c6.element_order(&FactorElement::Finite(4)).unwrap(),
            Order::Finite(brute)
        );
        assert_eq!(brute, 3);
    }

    #[test]
    fn enumerate_finite() {
        assert_eq!(
            FactorDescriptor::Cyclic(2).enumerate().unwrap(),
            vec![FactorElement::Finite(0), FactorElement::Finite(1)]
        );
        assert_eq!(FactorDescriptor::Cyclic(3).enumerate().unwrap().len(), 3);
        assert_eq!(s3().enumerate().unwrap().len(), 6);
        assert!(FactorDescriptor::Integer.enumerate().is_err());
    }

    #[test]
    fn group_laws_exhaustive_on_finite_descriptors() {
        for d in [
            FactorDescriptor::Cyclic(5),
            FactorDescriptor::Cyclic(6),
            s3(),
        ] {
            let els = d.enumerate().unwrap();
            let n = els.len() as u64;
            for x in &els {
                assert_eq!(d.multiply(x, &d.identity()).unwrap(), *x);
                assert!(d.is_identity(&d.multiply(x, &d.invert(x).unwrap()).unwrap()));
                match d.element_order(x).unwrap() {
                    Order::Finite(k) => assert_eq!(n % k, 0),
                    Order::Infinite => panic!("finite group element of infinite order"),
                }
                for y in &els {
                    for z in &els {
                        let l = d.multiply(&d.multiply(x, y).unwrap(), z).unwrap();
                        let r = d.multiply(x, &d.multiply(y, z).unwrap()).unwrap();
                        assert_eq!(l, r);
                    }
                }
            }
        }
    }

    #[test]
    fn integer_associativity_sampled() {
        let z = FactorDescriptor::Integer;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let [x, y, w] = [0; 3].map(|_| FactorElement::int(rng.gen_range(-10_000..10_000)));
            let l = z.multiply(&z.multiply(&x, &y).unwrap(), &w).unwrap();
            let r = z.multiply(&x, &z.multiply(&y, &w).unwrap()).unwrap();
            assert_eq!(l, r);
        }
    }

    #[test]
    fn table_validation_rejects_non_groups() {
        // row 1 repeats an entry
        let bad = vec![vec![0, 1, 2], vec![1, 1, 0], vec![2, 0, 1]];
        assert!(TableGroup::new(bad, vec![0, 2, 1], 0).is_err());
        let wrong_inv = TableGroup::new(
            vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]],
            vec![0, 1, 2],
            0,
        );
        assert!(wrong_inv.is_err());
        assert!(TableGroup::cyclic(4).is_ok());
    }

    #[test]
    fn powers() {
        let c5 = FactorDescriptor::Cyclic(5);
        assert_eq!(
            c5.power(&FactorElement::Finite(2), &BigInt::from(-1))
                .unwrap(),
            FactorElement::Finite(3)
        );
        let g = s3();
        assert_eq!(
            g.power(&FactorElement::Finite(1), &BigInt::from(3))
                .unwrap(),
            g.identity()
        );
        assert_eq!(
            g.power(&FactorElement::Finite(1), &BigInt::from(-1))
                .unwrap(),
            FactorElement::Finite(2)
        );
    }
}
