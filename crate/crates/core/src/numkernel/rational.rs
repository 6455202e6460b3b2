//! Dense square matrices over exact rationals.

use std::fmt;
use std::ops::Mul;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::NumError;

/// Exact rational vector.
pub type RationalVector = Vec<BigRational>;

/// Parses small integers into a rational vector. Mostly useful in tests and generators.
pub fn rvec(values: &[i64]) -> RationalVector {
    values
        .iter()
        .map(|&v| BigRational::from_integer(v.into()))
        .collect()
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Exact value of a finite `f64` as a dyadic rational.
pub fn rational_from_f64(x: f64) -> Result<BigRational, NumError> {
    BigRational::from_float(x).ok_or(NumError::NonFinite)
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // to_f64 only fails on overflow
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn dot_exact(u: &[BigRational], v: &[BigRational]) -> BigRational {
    u.iter()
        .zip(v)
        .fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
}

pub fn add_exact(u: &[BigRational], v: &[BigRational]) -> RationalVector {
    u.iter().zip(v).map(|(a, b)| a + b).collect()
}

pub fn vector_to_f64(v: &[BigRational]) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().map(rational_to_f64))
}

/// Square matrix of exact rationals stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    n: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![BigRational::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = BigRational::one();
        }
        m
    }

    pub fn diagonal(values: &[BigRational]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for (i, v) in values.iter().enumerate() {
            m.entries[i * n + i] = v.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self, NumError> {
        let n = rows.len();
        if n == 0 {
            return Err(NumError::Empty);
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(NumError::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(Self { n, entries })
    }

    /// Builds a matrix from integer rows; panics on ragged input.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let rows = rows.iter().map(|r| rvec(r)).collect();
        Self::from_rows(rows).expect("integer rows must form a square matrix")
    }

    /// Exact dyadic image of a finite float matrix.
    pub fn from_f64(m: &DMatrix<f64>) -> Result<Self, NumError> {
        if m.nrows() != m.ncols() {
            return Err(NumError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let n = m.nrows();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.entries[i * n + j] = rational_from_f64(m[(i, j)])?;
            }
        }
        Ok(out)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigRational) {
        self.entries[i * self.n + j] = value;
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn rows(&self) -> impl Iterator<Item = &[BigRational]> {
        self.entries.chunks(self.n)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// First off-diagonal position breaking exact symmetry.
    pub fn check_symmetric(&self) -> Result<(), NumError> {
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.get(i, j) != self.get(j, i) {
                    return Err(NumError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|x| !x.is_negative())
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.entries[j * n + i] = self.entries[i * n + j].clone();
            }
        }
        out
    }

    pub fn trace(&self) -> BigRational {
        (0..self.n).fold(BigRational::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Result<RationalVector, NumError> {
        if v.len() != self.n {
            return Err(NumError::DimensionMismatch {
                expected: self.n,
                actual: v.len(),
            });
        }
        Ok(self.rows().map(|row| dot_exact(row, v)).collect())
    }

    /// Adds `v vᵀ` in place.
    pub fn add_outer(&mut self, v: &[BigRational]) -> Result<(), NumError> {
        if v.len() != self.n {
            return Err(NumError::DimensionMismatch {
                expected: self.n,
                actual: v.len(),
            });
        }
        let n = self.n;
        for i in 0..n {
            if v[i].is_zero() {
                continue;
            }
            for j in 0..n {
                self.entries[i * n + j] += &v[i] * &v[j];
            }
        }
        Ok(())
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| rational_to_f64(self.get(i, j)))
    }

    /// Least common denominator of all entries together with the integer matrix `lcd · self`.
    pub fn to_scaled_integers(&self) -> (BigInt, Vec<BigInt>) {
        use num_integer::Integer;
        let lcd = self
            .entries
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let scaled = self
            .entries
            .iter()
            .map(|x| x.numer() * (&lcd / x.denom()))
            .collect();
        (lcd, scaled)
    }
}

impl Mul for &RationalMatrix {
    type Output = RationalMatrix;

    fn mul(self, rhs: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.n, rhs.n, "matrix orders differ");
        let n = self.n;
        let mut out = RationalMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.entries[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &rhs.entries[k * n + j];
                    if !b.is_zero() {
                        out.entries[i * n + j] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = self
            .rows()
            .map(|r| r.iter().map(|x| x.to_string()).collect())
            .collect();
        f.debug_struct("RationalMatrix")
            .field("n", &self.n)
            .field("rows", &rows)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_integers_clear_denominators() {
        let m =
            RationalMatrix::from_rows(vec![vec![rat(1, 2), rat(1, 3)], vec![rat(1, 3), rat(2, 1)]])
                .unwrap();
        let (lcd, ints) = m.to_scaled_integers();
        assert_eq!(lcd, BigInt::from(6));
        let expected: Vec<BigInt> = [3, 2, 2, 12].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(ints, expected);
    }

    #[test]
    fn add_outer_matches_explicit_product() {
        let mut m = RationalMatrix::zeros(2);
        m.add_outer(&rvec(&[1, 2])).unwrap();
        assert_eq!(m, RationalMatrix::from_i64_rows(&[&[1, 2], &[2, 4]]));
        assert!(m.add_outer(&rvec(&[1])).is_err());
    }

    #[test]
    fn float_round_trip_is_exact() {
        let f = DMatrix::from_row_slice(2, 2, &[0.1, -3.5, 1e-300, 7.0]);
        let r = RationalMatrix::from_f64(&f).unwrap();
        assert_eq!(r.to_f64(), f);
        assert!(RationalMatrix::from_f64(&DMatrix::from_element(1, 1, f64::NAN)).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = RationalMatrix::from_rows(vec![rvec(&[1, 2]), rvec(&[3])]).unwrap_err();
        assert!(matches!(err, NumError::NotSquare { .. }));
    }
}
