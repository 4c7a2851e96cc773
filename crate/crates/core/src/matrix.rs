//! Small dense matrices over the rationals.

use num::{BigInt, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    n: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch(
                "matrix must be square and nonempty".into(),
            ));
        }
        Ok(Matrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![Rational::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = Rational::one();
        }
        Matrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Matrix::identity(self.n)
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let n = self.n;
        let mut data = vec![Rational::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.data[k * n + j];
                    if !b.is_zero() {
                        data[i * n + j] += a * b;
                    }
                }
            }
        }
        Matrix { n, data }
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        (0..self.n)
            .map(|i| {
                let mut acc = Rational::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = &self.data[i * self.n + j];
                    if !a.is_zero() && !x.is_zero() {
                        acc += a * x;
                    }
                }
                acc
            })
            .collect()
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Matrix::identity(n).data;
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[r * n + col].is_zero())
                .ok_or_else(|| Error::InvalidMap("matrix is singular".into()))?;
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                    inv.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[col * n + col].clone();
            for j in 0..n {
                a[col * n + j] /= &p;
                inv[col * n + j] /= &p;
            }
            for r in 0..n {
                if r == col || a[r * n + col].is_zero() {
                    continue;
                }
                let factor = a[r * n + col].clone();
                for j in 0..n {
                    let t = &factor * &a[col * n + j];
                    a[r * n + j] -= t;
                    let t = &factor * &inv[col * n + j];
                    inv[r * n + j] -= t;
                }
            }
        }
        Ok(Matrix { n, data: inv })
    }

    /// `self^k` given the inverse for negative exponents.
    pub fn pow_with_inverse(&self, inverse: &Matrix, k: &BigInt) -> Matrix {
        let mut base = if k.is_negative() {
            inverse.clone()
        } else {
            self.clone()
        };
        let mut e = k.abs();
        let mut acc = Matrix::identity(self.n);
        let two = BigInt::from(2);
        while !e.is_zero() {
            if (&e % &two).is_one() {
                acc = acc.mul(&base);
            }
            e /= &two;
            if !e.is_zero() {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut data = vec![Rational::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].clone();
            }
        }
        Matrix { n, data }
    }

    /// `MᵀM = I`.
    pub fn is_orthogonal(&self) -> bool {
        self.transpose().mul(self).is_identity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn rotation() -> Matrix {
        Matrix::from_rows(vec![
            vec![rat(3, 5), rat(-4, 5), int(0)],
            vec![rat(4, 5), rat(3, 5), int(0)],
            vec![int(0), int(0), int(1)],
        ])
        .unwrap()
    }

    #[test]
    fn inverse_and_powers() {
        let r = rotation();
        let ri = r.inverse().unwrap();
        assert!(r.mul(&ri).is_identity());
        assert_eq!(ri, r.transpose());
        assert!(r.is_orthogonal());
        let p5 = r.pow_with_inverse(&ri, &BigInt::from(5));
        let mut slow = Matrix::identity(3);
        for _ in 0..5 {
            slow = slow.mul(&r);
        }
        assert_eq!(p5, slow);
        assert!(r
            .pow_with_inverse(&ri, &BigInt::from(-5))
            .mul(&p5)
            .is_identity());
        let singular = Matrix::from_rows(vec![vec![int(1), int(2)], vec![int(2), int(4)]]).unwrap();
        assert!(singular.inverse().is_err());
    }
}
