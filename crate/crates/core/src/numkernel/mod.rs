//! Linear-algebra substrate: exact rational matrices and characteristic polynomials, the
//! symmetric eigensolver, and eigenvalue clustering.

mod charpoly;
mod cluster;
mod eigh;
mod rational;

pub use charpoly::{charpoly_exact, charpoly_faddeev_leverrier, similar_exact, CharPoly};
pub use cluster::{cluster_eigenvalues, default_cluster_tol, EigenClustering};
pub use eigh::{asymmetry, check_symmetric_f64, eigh, SymmetricEigen};
pub use rational::{
    add_exact, dot_exact, rat, rational_from_f64, rational_to_f64, rvec, vector_to_f64,
    RationalMatrix, RationalVector,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix must have positive order")]
    Empty,
    #[error("matrix orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("matrix asymmetry {asymmetry:e} exceeds tolerance")]
    NotSymmetricFloat { asymmetry: f64 },
    #[error("non-finite entry")]
    NonFinite,
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("QL iteration did not converge for eigenvalue {index}")]
    EighNoConvergence { index: usize },
}

/// Monic polynomial with float coefficients, ascending (`coeffs[k]` multiplies `x^k`).
#[derive(Clone, Debug, PartialEq)]
pub struct FloatCharPoly {
    pub coeffs: Vec<f64>,
}

impl FloatCharPoly {
    /// `∏ (x - r)` expanded.
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut coeffs = vec![1.0];
        for &r in roots {
            coeffs.push(0.0);
            for k in (1..coeffs.len()).rev() {
                coeffs[k] = coeffs[k - 1] - r * coeffs[k];
            }
            coeffs[0] *= -r;
        }
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// `scale[k] = e_{n-k}(|r_1|, …, |r_n|)`, the natural magnitude of the `x^k` coefficient of
/// `∏ (x - r_i)`; it dominates the coefficient and stays positive under cancellation.
pub fn coefficient_scales(roots: &[f64]) -> Vec<f64> {
    let abs: Vec<f64> = roots.iter().map(|r| -r.abs()).collect();
    FloatCharPoly::from_roots(&abs).coeffs
}

/// Worst per-coefficient error of `approx` against `reference`, each coefficient measured
/// relative to its scale from [`coefficient_scales`].
pub fn coefficient_relative_error(approx: &[f64], reference: &[f64], scales: &[f64]) -> f64 {
    approx
        .iter()
        .zip(reference)
        .zip(scales)
        .map(|((a, r), s)| {
            let denom = s.max(r.abs()).max(f64::MIN_POSITIVE);
            (a - r).abs() / denom
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};

    #[test]
    fn from_roots_expands() {
        let p = FloatCharPoly::from_roots(&[1.0, 1.0, 1.0]);
        assert_eq!(p.coeffs, vec![-1.0, 3.0, -3.0, 1.0]);
        assert_eq!(coefficient_scales(&[1.0, -1.0]), vec![1.0, 2.0, 1.0]);
    }

    #[test]
    fn float_route_tracks_exact_charpoly() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in 1..=12 {
            for _ in 0..4 {
                let mut m = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in i..n {
                        let x: f64 = rng.random_range(-3.0..3.0);
                        m[(i, j)] = x;
                        m[(j, i)] = x;
                    }
                }
                let eig = eigh(&m, 1e-10).unwrap();
                let float_poly = FloatCharPoly::from_roots(&eig.eigenvalues);
                let exact = charpoly_exact(&RationalMatrix::from_f64(&m).unwrap()).to_f64();
                let err = coefficient_relative_error(
                    &float_poly.coeffs,
                    &exact,
                    &coefficient_scales(&eig.eigenvalues),
                );
                assert!(err <= 1e-6, "n={n} err={err}");
            }
        }
    }
}
