//! Spectral decompositions into distinct-eigenvalue blocks, projections of vectors onto
//! the eigenspaces, moment sequences `uᵀAᵗv`, and the rank-two characteristic polynomial
//! obtained from the Weinstein–Aronszajn identity.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::BigRational;
use thiserror::Error;

use crate::numkernel::{
    cluster_eigenvalues, default_cluster_tol, dot_exact, eigh, EigenClustering, FloatCharPoly,
    NumError, RationalMatrix, SymmetricEigen,
};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error("vector {index} has length {actual}, expected {expected}")]
    VectorLength {
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("moment count must be positive")]
    ZeroCount,
    #[error("Vandermonde system is singular")]
    SingularVandermonde,
}

/// `M = Σ_k λ_k P_k P_kᵀ` with orthonormal blocks `P_k` of width `r_k`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub clustering: EigenClustering,
    pub blocks: Vec<DMatrix<f64>>,
}

impl SpectralDecomposition {
    /// Groups eigenvector columns by `clustering.assignment` (indexed like
    /// `eig.eigenvalues`) and re-orthonormalizes every block.
    pub fn from_grouping(eig: &SymmetricEigen, clustering: EigenClustering) -> Self {
        let n = eig.eigenvalues.len();
        debug_assert_eq!(clustering.assignment.len(), n);
        let blocks = (0..clustering.len())
            .map(|k| {
                let cols: Vec<usize> = (0..n).filter(|&i| clustering.assignment[i] == k).collect();
                let raw = DMatrix::from_fn(n, cols.len(), |r, c| eig.eigenvectors[(r, cols[c])]);
                thin_orthonormalize(raw)
            })
            .collect();
        Self { clustering, blocks }
    }

    pub fn order(&self) -> usize {
        self.clustering.raw.len()
    }

    pub fn cluster_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.clustering.lambdas
    }

    /// `Σ_k λ_k P_k P_kᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.order();
        let mut out = DMatrix::zeros(n, n);
        for (lambda, p) in self.clustering.lambdas.iter().zip(&self.blocks) {
            out += p * p.transpose() * *lambda;
        }
        out
    }

    /// `[P_1 … P_s]`, an orthogonal matrix when the blocks cover the space.
    pub fn stacked(&self) -> DMatrix<f64> {
        let n = self.order();
        let mut out = DMatrix::zeros(n, n);
        let mut col = 0;
        for p in &self.blocks {
            out.columns_mut(col, p.ncols()).copy_from(p);
            col += p.ncols();
        }
        out
    }
}

/// Householder thin QR; returns the orthonormal factor with the input's shape.
pub(crate) fn thin_orthonormalize(m: DMatrix<f64>) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return m;
    }
    m.qr().q()
}

/// Eigendecomposition followed by clustering and per-block re-orthonormalization.
pub fn decompose(
    m: &DMatrix<f64>,
    tols: &Tolerances,
) -> Result<SpectralDecomposition, SpectralError> {
    let eig = eigh(m, tols.sym)?;
    let tol = tols
        .cluster
        .unwrap_or_else(|| default_cluster_tol(&eig.eigenvalues));
    let clustering = cluster_eigenvalues(&eig.eigenvalues, tol);
    Ok(SpectralDecomposition::from_grouping(&eig, clustering))
}

/// `P_kᵀ v_i` for every cluster `k`; cluster `k` holds an `r_k × m` matrix.
#[derive(Clone, Debug)]
pub struct ProjectedVectors {
    pub per_cluster: Vec<DMatrix<f64>>,
}

impl ProjectedVectors {
    pub fn family_size(&self) -> usize {
        self.per_cluster.first().map_or(0, |p| p.ncols())
    }

    /// The projected family of cluster `k` as separate vectors.
    pub fn family(&self, k: usize) -> Vec<DVector<f64>> {
        self.per_cluster[k]
            .column_iter()
            .map(|c| c.into_owned())
            .collect()
    }

    pub fn norm(&self, k: usize, i: usize) -> f64 {
        self.per_cluster[k].column(i).norm()
    }

    pub fn inner(&self, k: usize, i: usize, j: usize) -> f64 {
        self.per_cluster[k]
            .column(i)
            .dot(&self.per_cluster[k].column(j))
    }

    /// `Σ_k ‖P_kᵀ v_i‖²`, which equals `‖v_i‖²` when the blocks span the space.
    pub fn total_sq_norm(&self, i: usize) -> f64 {
        (0..self.per_cluster.len())
            .map(|k| self.norm(k, i).powi(2))
            .sum()
    }
}

pub fn project_vectors(
    d: &SpectralDecomposition,
    vecs: &[DVector<f64>],
) -> Result<ProjectedVectors, SpectralError> {
    let n = d.order();
    for (index, v) in vecs.iter().enumerate() {
        if v.len() != n {
            return Err(SpectralError::VectorLength {
                index,
                expected: n,
                actual: v.len(),
            });
        }
    }
    let family = DMatrix::from_fn(n, vecs.len(), |r, c| vecs[c][r]);
    let per_cluster = d.blocks.iter().map(|p| p.transpose() * &family).collect();
    Ok(ProjectedVectors { per_cluster })
}

fn check_moment_args(n: usize, u: usize, v: usize, count: usize) -> Result<(), SpectralError> {
    if count == 0 {
        return Err(SpectralError::ZeroCount);
    }
    for (index, len) in [(0, u), (1, v)] {
        if len != n {
            return Err(SpectralError::VectorLength {
                index,
                expected: n,
                actual: len,
            });
        }
    }
    Ok(())
}

/// `uᵀAᵗv` for `t = 0..count` by repeated matrix-vector products.
pub fn moments(
    a: &DMatrix<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    count: usize,
) -> Result<Vec<f64>, SpectralError> {
    check_moment_args(a.nrows(), u.len(), v.len(), count)?;
    let mut w = v.clone();
    let mut out = Vec::with_capacity(count);
    for t in 0..count {
        out.push(u.dot(&w));
        if t + 1 < count {
            w = a * w;
        }
    }
    Ok(out)
}

/// Exact counterpart of [`moments`].
pub fn moments_exact(
    a: &RationalMatrix,
    u: &[BigRational],
    v: &[BigRational],
    count: usize,
) -> Result<Vec<BigRational>, SpectralError> {
    check_moment_args(a.order(), u.len(), v.len(), count)?;
    let mut w = v.to_vec();
    let mut out = Vec::with_capacity(count);
    for t in 0..count {
        out.push(dot_exact(u, &w));
        if t + 1 < count {
            w = a.mul_vec(&w)?;
        }
    }
    Ok(out)
}

/// `Σ_k λ_kᵗ ⟨P_kᵀu, P_kᵀv⟩` for `t = 0..count`; agrees with [`moments`] by the spectral theorem.
pub fn spectral_moments(
    d: &SpectralDecomposition,
    u: &DVector<f64>,
    v: &DVector<f64>,
    count: usize,
) -> Result<Vec<f64>, SpectralError> {
    check_moment_args(d.order(), u.len(), v.len(), count)?;
    let proj = project_vectors(d, &[u.clone(), v.clone()])?;
    let inner: Vec<f64> = (0..d.cluster_count())
        .map(|k| proj.inner(k, 0, 1))
        .collect();
    Ok((0..count)
        .map(|t| {
            d.lambdas()
                .iter()
                .zip(&inner)
                .map(|(l, c)| l.powi(t as i32) * c)
                .sum()
        })
        .collect())
}

/// Solves `Σ_k λ_kᵗ x_k = values[t]` for `t = 0..s`.
pub fn vandermonde_solve(lambdas: &[f64], values: &[f64]) -> Result<Vec<f64>, SpectralError> {
    let s = lambdas.len();
    if values.len() != s {
        return Err(SpectralError::VectorLength {
            index: 0,
            expected: s,
            actual: values.len(),
        });
    }
    let vander = DMatrix::from_fn(s, s, |t, k| lambdas[k].powi(t as i32));
    vander
        .lu()
        .solve(&DVector::from_row_slice(values))
        .map(|x| x.iter().copied().collect())
        .ok_or(SpectralError::SingularVandermonde)
}

/// `det(xI - (A + uuᵀ + vvᵀ))` through the 2×2 resolvent determinant.
pub fn wa_charpoly_rank2(
    a: &DMatrix<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    tols: &Tolerances,
) -> Result<FloatCharPoly, SpectralError> {
    let d = decompose(a, tols)?;
    wa_charpoly_rank2_from(&d, u, v)
}

/// [`wa_charpoly_rank2`] with a precomputed decomposition of `A`.
///
/// With `a_k = ‖P_kᵀu‖²`, `b_k = ‖P_kᵀv‖²`, `c_k = ⟨P_kᵀu, P_kᵀv⟩` the polynomial equals
/// `∏_k (x - λ_k)^{r_k} · [(1 - Σ a_k/(x-λ_k))(1 - Σ b_k/(x-λ_k)) - (Σ c_k/(x-λ_k))²]`.
/// It is sampled at the `n + 1` roots of unity scaled to radius `1 + max|λ|`, where no
/// sample meets a real eigenvalue, and the coefficients are read off by a discrete
/// Fourier transform.
pub fn wa_charpoly_rank2_from(
    d: &SpectralDecomposition,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<FloatCharPoly, SpectralError> {
    let n = d.order();
    let proj = project_vectors(d, &[u.clone(), v.clone()])?;
    let s = d.cluster_count();
    let a: Vec<f64> = (0..s).map(|k| proj.inner(k, 0, 0)).collect();
    let b: Vec<f64> = (0..s).map(|k| proj.inner(k, 1, 1)).collect();
    let c: Vec<f64> = (0..s).map(|k| proj.inner(k, 0, 1)).collect();
    let lambdas = d.lambdas();
    let mults = &d.clustering.mults;

    let radius = 1.0 + lambdas.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    let points = n + 1;
    let root = |e: usize| {
        let angle = 2.0 * PI * (e % points) as f64 / points as f64;
        Complex64::from_polar(1.0, angle)
    };

    let values: Vec<Complex64> = (0..points)
        .map(|j| {
            let z = root(j) * radius;
            let mut base = Complex64::new(1.0, 0.0);
            let (mut sa, mut sb, mut sc) = (
                Complex64::default(),
                Complex64::default(),
                Complex64::default(),
            );
            for k in 0..s {
                let diff = z - lambdas[k];
                base *= diff.powu(mults[k] as u32);
                let inv = diff.inv();
                sa += inv * a[k];
                sb += inv * b[k];
                sc += inv * c[k];
            }
            base * ((Complex64::new(1.0, 0.0) - sa) * (Complex64::new(1.0, 0.0) - sb) - sc * sc)
        })
        .collect();

    let mut coeffs: Vec<f64> = (0..points)
        .map(|t| {
            let sum: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, f)| f * root(j * t).conj())
                .sum();
            sum.re / points as f64 / radius.powi(t as i32)
        })
        .collect();
    coeffs[n] = 1.0;
    Ok(FloatCharPoly { coeffs })
}
