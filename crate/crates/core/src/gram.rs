//! Gram matrices of vector families and orthogonal maps between families that share one.
//!
//! Two families `v_1..v_m` and `w_1..w_m` in `R^d` with the same Gram matrix are related
//! by an orthogonal `Q` with `Q v_i = w_i`. The construction here selects a maximal
//! independent subfamily by pivoted Cholesky of the shared Gram matrix, orthonormalizes
//! that subfamily on both sides with the same pivot order, completes both bases to all of
//! `R^d`, and returns `Q = Ū_W Ū_Vᵀ`.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::numkernel::{dot_exact, RationalVector};

/// Default orthonormality allowance for [`complete_orthonormal`] input, scaled by the width.
pub const DEFAULT_ORTH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GramError {
    #[error("vector {index} has dimension {actual}, expected {expected}")]
    MixedDimensions {
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("families have different sizes: {left} vs {right}")]
    FamilySizeMismatch { left: usize, right: usize },
    #[error("Gram matrices differ by {deviation:e}, tolerance {tol:e}")]
    GramMismatch { deviation: f64, tol: f64 },
    #[error("numerical rank differs between families: {left} vs {right} (shared {shared})")]
    RankMismatch {
        left: usize,
        right: usize,
        shared: usize,
    },
    #[error("columns are not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },
}

/// `entries[i][j] = v_iᵀ v_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub entries: DMatrix<f64>,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Largest entrywise difference.
    pub fn max_deviation(&self, other: &GramMatrix) -> f64 {
        (&self.entries - &other.entries).amax()
    }
}

fn stack(vecs: &[DVector<f64>]) -> Result<DMatrix<f64>, GramError> {
    let d = vecs.first().map_or(0, |v| v.len());
    for (index, v) in vecs.iter().enumerate() {
        if v.len() != d {
            return Err(GramError::MixedDimensions {
                index,
                expected: d,
                actual: v.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(d, vecs.len(), |r, c| vecs[c][r]))
}

pub fn gram(vecs: &[DVector<f64>]) -> Result<GramMatrix, GramError> {
    let family = stack(vecs)?;
    Ok(gram_of_columns(&family))
}

/// Gram matrix of the columns of `family`.
pub fn gram_of_columns(family: &DMatrix<f64>) -> GramMatrix {
    GramMatrix {
        entries: family.transpose() * family,
    }
}

/// Exact Gram matrix, row-major.
pub fn gram_exact(vecs: &[RationalVector]) -> Result<Vec<Vec<BigRational>>, GramError> {
    let d = vecs.first().map_or(0, |v| v.len());
    for (index, v) in vecs.iter().enumerate() {
        if v.len() != d {
            return Err(GramError::MixedDimensions {
                index,
                expected: d,
                actual: v.len(),
            });
        }
    }
    Ok(vecs
        .iter()
        .map(|u| vecs.iter().map(|v| dot_exact(u, v)).collect())
        .collect())
}

/// Outcome of a diagonally pivoted Cholesky factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct PivotedCholesky {
    /// Full permutation; the first `rank` entries index the selected subfamily.
    pub pivots: Vec<usize>,
    pub rank: usize,
    /// Accepted pivots (squared lengths of the orthogonalized members).
    pub pivot_values: Vec<f64>,
    /// Lower-triangular factor of the selected block, `rank × rank`, in pivot order.
    pub factor: DMatrix<f64>,
}

/// Pivoted Cholesky that stops once the largest remaining pivot is `<= threshold`.
pub fn pivoted_cholesky(g: &DMatrix<f64>, threshold: f64) -> PivotedCholesky {
    let m = g.nrows();
    let mut work = g.clone();
    let mut pivots: Vec<usize> = (0..m).collect();
    let mut l = DMatrix::zeros(m, m);
    let mut pivot_values = Vec::new();
    let mut rank = 0;
    for k in 0..m {
        let (best, value) = (k..m)
            .map(|i| (i, work[(i, i)]))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if value <= threshold {
            break;
        }
        if best != k {
            work.swap_rows(k, best);
            work.swap_columns(k, best);
            l.swap_rows(k, best);
            pivots.swap(k, best);
        }
        let lkk = value.sqrt();
        l[(k, k)] = lkk;
        for i in k + 1..m {
            l[(i, k)] = work[(i, k)] / lkk;
        }
        for i in k + 1..m {
            for j in k + 1..=i {
                let upd = work[(i, j)] - l[(i, k)] * l[(j, k)];
                work[(i, j)] = upd;
                work[(j, i)] = upd;
            }
        }
        pivot_values.push(value);
        rank += 1;
    }
    let factor = l.view((0, 0), (rank, rank)).into_owned();
    PivotedCholesky {
        pivots,
        rank,
        pivot_values,
        factor,
    }
}

/// Square matrix, orthogonal up to rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalMap {
    pub q: DMatrix<f64>,
}

impl OrthogonalMap {
    pub fn identity(d: usize) -> Self {
        Self {
            q: DMatrix::identity(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    /// `‖QᵀQ - I‖_F`.
    pub fn orth_residual(&self) -> f64 {
        let d = self.dim();
        (self.q.transpose() * &self.q - DMatrix::identity(d, d)).norm()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.q * v
    }
}

/// Thresholds for [`gram_match`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GramMatchOptions {
    /// Largest allowed entrywise Gram difference.
    pub gram_tol: f64,
    /// Pivots below `rank_tol ·` (largest diagonal entry) count as zero.
    pub rank_tol: f64,
    /// Absolute floor for zero pivots, in squared-length units.
    pub zero_tol: f64,
}

impl Default for GramMatchOptions {
    fn default() -> Self {
        Self {
            gram_tol: 1e-8,
            rank_tol: 1e-10,
            zero_tol: 0.0,
        }
    }
}

/// Orthogonal `Q` with `Q v_i ≈ w_i` for families sharing a Gram matrix.
pub fn gram_match<R: Rng + ?Sized>(
    vs: &[DVector<f64>],
    ws: &[DVector<f64>],
    opts: &GramMatchOptions,
    rng: &mut R,
) -> Result<OrthogonalMap, GramError> {
    if vs.len() != ws.len() {
        return Err(GramError::FamilySizeMismatch {
            left: vs.len(),
            right: ws.len(),
        });
    }
    let v = stack(vs)?;
    let w = stack(ws)?;
    if v.nrows() != w.nrows() {
        return Err(GramError::MixedDimensions {
            index: 0,
            expected: v.nrows(),
            actual: w.nrows(),
        });
    }
    gram_match_columns(&v, &w, opts, rng)
}

/// [`gram_match`] on families stored as the columns of `d × m` matrices.
pub fn gram_match_columns<R: Rng + ?Sized>(
    v: &DMatrix<f64>,
    w: &DMatrix<f64>,
    opts: &GramMatchOptions,
    rng: &mut R,
) -> Result<OrthogonalMap, GramError> {
    let d = v.nrows();
    if w.nrows() != d {
        return Err(GramError::MixedDimensions {
            index: 0,
            expected: d,
            actual: w.nrows(),
        });
    }
    if w.ncols() != v.ncols() {
        return Err(GramError::FamilySizeMismatch {
            left: v.ncols(),
            right: w.ncols(),
        });
    }
    let gv = gram_of_columns(v);
    let gw = gram_of_columns(w);
    let deviation = gv.max_deviation(&gw);
    if deviation > opts.gram_tol || !deviation.is_finite() {
        return Err(GramError::GramMismatch {
            deviation,
            tol: opts.gram_tol,
        });
    }

    let shared = (&gv.entries + &gw.entries) * 0.5;
    let largest = shared.diagonal().iter().fold(0.0f64, |a, b| a.max(*b));
    let threshold = (opts.rank_tol * largest).max(opts.zero_tol);
    let chol = pivoted_cholesky(&shared, threshold);
    let left = pivoted_cholesky(&gv.entries, threshold).rank;
    let right = pivoted_cholesky(&gw.entries, threshold).rank;
    if left != chol.rank || right != chol.rank {
        return Err(GramError::RankMismatch {
            left,
            right,
            shared: chol.rank,
        });
    }

    let selected = &chol.pivots[..chol.rank];
    let u_v = orthonormal_basis(v, selected);
    let u_w = orthonormal_basis(w, selected);
    let full_v = complete_orthonormal(&u_v, DEFAULT_ORTH_TOL, rng)?;
    let full_w = complete_orthonormal(&u_w, DEFAULT_ORTH_TOL, rng)?;
    Ok(OrthogonalMap {
        q: full_w * full_v.transpose(),
    })
}

/// Orthonormal basis of the selected columns via QR, signs fixed so that `R` has a
/// positive diagonal; both sides of a match then share the same triangular factor.
fn orthonormal_basis(family: &DMatrix<f64>, selected: &[usize]) -> DMatrix<f64> {
    let d = family.nrows();
    if selected.is_empty() {
        return DMatrix::zeros(d, 0);
    }
    let sub = DMatrix::from_fn(d, selected.len(), |r, c| family[(r, selected[c])]);
    let qr = sub.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (k, mut col) in q.column_iter_mut().enumerate() {
        if r[(k, k)] < 0.0 {
            col.neg_mut();
        }
    }
    q
}

/// Extends orthonormal columns `u` (d × r) to a d × d orthogonal matrix whose leading
/// columns are exactly `u`. The complement comes from a Householder QR of `[u | G]` with
/// Gaussian `G` drawn from `rng`.
pub fn complete_orthonormal<R: Rng + ?Sized>(
    u: &DMatrix<f64>,
    orth_tol: f64,
    rng: &mut R,
) -> Result<DMatrix<f64>, GramError> {
    let (d, r) = u.shape();
    let residual = (u.transpose() * u - DMatrix::identity(r, r)).norm();
    if residual > orth_tol * r.max(1) as f64 {
        return Err(GramError::NotOrthonormal { residual });
    }
    if r == d {
        return Ok(u.clone());
    }
    let mut aug = DMatrix::zeros(d, d);
    aug.columns_mut(0, r).copy_from(u);
    for c in r..d {
        for row in 0..d {
            aug[(row, c)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    let q = aug.qr().q();
    let mut out = q;
    out.columns_mut(0, r).copy_from(u);
    Ok(out)
}
