use std::fmt;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_condition, PerturbationInstance, TheoremError};
use crate::gram::{gram_match_columns, GramMatchOptions, OrthogonalMap};
use crate::numkernel::{cluster_eigenvalues, default_cluster_tol, eigh, EigenClustering};
use crate::spectral::{project_vectors, SpectralDecomposition};
use crate::tolerances::Tolerances;

/// Spectral decompositions of `A` and `B` built against one list of distinct eigenvalues.
#[derive(Clone, Debug)]
pub struct JointDecomposition {
    pub left: SpectralDecomposition,
    pub right: SpectralDecomposition,
}

impl JointDecomposition {
    pub fn lambdas(&self) -> &[f64] {
        self.left.lambdas()
    }

    pub fn mults(&self) -> &[usize] {
        &self.left.clustering.mults
    }

    pub fn cluster_count(&self) -> usize {
        self.left.cluster_count()
    }
}

/// Pools the eigenvalues of `A` and `B`, clusters them together, and requires every
/// cluster to hold as many eigenvalues of `A` as of `B`.
pub fn joint_decomposition(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    tols: &Tolerances,
) -> Result<JointDecomposition, TheoremError> {
    if a.nrows() != b.nrows() {
        return Err(TheoremError::OrderMismatch {
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    let ea = eigh(a, tols.sym)?;
    let eb = eigh(b, tols.sym)?;
    let n = ea.eigenvalues.len();

    // (value, from B?, index within its side)
    let mut pooled: Vec<(f64, bool, usize)> = ea
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, false, i))
        .chain(
            eb.eigenvalues
                .iter()
                .enumerate()
                .map(|(i, &x)| (x, true, i)),
        )
        .collect();
    pooled.sort_by(|p, q| p.0.total_cmp(&q.0));
    let values: Vec<f64> = pooled.iter().map(|p| p.0).collect();
    let tol = tols.cluster.unwrap_or_else(|| default_cluster_tol(&values));
    let shared = cluster_eigenvalues(&values, tol);

    let s = shared.len();
    let mut left_mults = vec![0usize; s];
    let mut right_mults = vec![0usize; s];
    let mut left_assign = vec![0usize; n];
    let mut right_assign = vec![0usize; n];
    for (&(_, from_b, idx), &k) in pooled.iter().zip(&shared.assignment) {
        if from_b {
            right_mults[k] += 1;
            right_assign[idx] = k;
        } else {
            left_mults[k] += 1;
            left_assign[idx] = k;
        }
    }
    for k in 0..s {
        if left_mults[k] != right_mults[k] {
            return Err(TheoremError::MultiplicityMismatch {
                lambda: shared.lambdas[k],
                left: left_mults[k],
                right: right_mults[k],
            });
        }
    }

    let side = |raw: Vec<f64>, assignment: Vec<usize>| EigenClustering {
        lambdas: shared.lambdas.clone(),
        mults: left_mults.clone(),
        raw,
        tol,
        assignment,
    };
    Ok(JointDecomposition {
        left: SpectralDecomposition::from_grouping(&ea, side(ea.eigenvalues.clone(), left_assign)),
        right: SpectralDecomposition::from_grouping(
            &eb,
            side(eb.eigenvalues.clone(), right_assign),
        ),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `‖QᵀQ - I‖_F`.
    pub orth: f64,
    /// `‖QᵀAQ - B‖_F`.
    pub sim: f64,
    /// `max_i ‖Qᵀα_i - β_i‖`.
    pub map: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.orth.max(self.sim).max(self.map)
    }

    pub fn within(&self, bound: f64) -> bool {
        self.orth <= bound && self.sim <= bound && self.map <= bound
    }
}

impl fmt::Display for Residuals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "orth {:e}, sim {:e}, map {:e}",
            self.orth, self.sim, self.map
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub residuals: Residuals,
    /// `cert · n · (1 + ‖A‖_F)`.
    pub bound: f64,
    pub pass: bool,
}

/// Orthogonal `Q` with `QᵀAQ = B` and `Qᵀα_i = β_i`, up to the recorded residuals.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityCertificate {
    pub q: OrthogonalMap,
    pub residuals: Residuals,
    pub bound: f64,
}

/// Recomputes the three residuals of `q` against the instance.
pub fn verify_certificate(
    inst: &PerturbationInstance,
    q: &DMatrix<f64>,
    tols: &Tolerances,
) -> Result<VerificationReport, TheoremError> {
    let n = inst.order();
    if q.nrows() != n || q.ncols() != n {
        return Err(TheoremError::CertificateOrder {
            expected: n,
            actual: if q.nrows() != n { q.nrows() } else { q.ncols() },
        });
    }
    let qt = q.transpose();
    let orth = (&qt * q - DMatrix::identity(n, n)).norm();
    let sim = (&qt * &inst.a * q - &inst.b).norm();
    let map = inst
        .alphas
        .iter()
        .zip(&inst.betas)
        .map(|(a, b)| (&qt * a - b).norm())
        .fold(0.0, f64::max);
    let residuals = Residuals { orth, sim, map };
    let bound = tols.cert * n as f64 * (1.0 + inst.a.norm());
    Ok(VerificationReport {
        residuals,
        bound,
        pass: residuals.within(bound),
    })
}

/// Decides the applicable condition and, when it holds, builds a certificate.
///
/// Randomness only fills orthogonal complements the families do not reach; it is drawn
/// from ChaCha8 seeded with `seed`.
pub fn construct_q(
    inst: &PerturbationInstance,
    tols: &Tolerances,
    seed: u64,
) -> Result<SimilarityCertificate, TheoremError> {
    let report = check_condition(inst, tols)?;
    if let Some(w) = report.witness() {
        return Err(TheoremError::ConditionFails {
            subset: w.subset.clone(),
        });
    }
    construct_q_with(inst, tols, seed)
}

/// Builds `Q = Σ_k P_k Q_kᵀ R_kᵀ` without deciding the condition first.
pub fn construct_q_with(
    inst: &PerturbationInstance,
    tols: &Tolerances,
    seed: u64,
) -> Result<SimilarityCertificate, TheoremError> {
    let n = inst.order();
    let joint = joint_decomposition(&inst.a, &inst.b, tols)?;
    let pa = project_vectors(&joint.left, &inst.alphas)?;
    let pb = project_vectors(&joint.right, &inst.betas)?;

    let scale = inst.gram_scale();
    let noise = tols.eigh * n as f64 * (1.0 + inst.a.norm()) * scale.sqrt();
    let opts = GramMatchOptions {
        gram_tol: tols.gram * scale,
        rank_tol: tols.rank,
        zero_tol: noise * noise,
    };

    let blocks: Vec<DMatrix<f64>> = (0..joint.cluster_count())
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let qk = gram_match_columns(&pa.per_cluster[k], &pb.per_cluster[k], &opts, &mut rng)
                .map_err(|source| TheoremError::Cluster { cluster: k, source })?;
            Ok(&joint.left.blocks[k] * qk.q.transpose() * joint.right.blocks[k].transpose())
        })
        .collect::<Result<_, TheoremError>>()?;
    let q = blocks
        .into_iter()
        .fold(DMatrix::zeros(n, n), |acc, term| acc + term);

    let report = verify_certificate(inst, &q, tols)?;
    if !report.pass {
        return Err(TheoremError::ResidualsExceeded {
            residuals: report.residuals,
            bound: report.bound,
        });
    }
    Ok(SimilarityCertificate {
        q: OrthogonalMap { q },
        residuals: report.residuals,
        bound: report.bound,
    })
}
