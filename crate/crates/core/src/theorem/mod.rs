//! Deciding simultaneous orthogonal similarity of two symmetric matrices carrying families
//! of rank-one perturbations, building the orthogonal map when it exists, and the
//! diagnostic tables behind the construction.

mod condition;
mod construct;
mod diag;
mod instance;

pub use condition::{
    check_condition, check_condition_general, check_condition_nonnegative, subsets_up_to_two,
    ConditionReport, PairRule, PolyPair, SubsetCheck,
};
pub use construct::{
    construct_q, construct_q_with, joint_decomposition, verify_certificate, JointDecomposition,
    Residuals, SimilarityCertificate, VerificationReport,
};
pub use diag::{
    diag_moments, diag_projection_inner, diag_projection_norms, diag_wa, diagnose,
    resolve_sign_nonneg, Diagnostics, InnerRoute, InnerRow, InnerTable, MomentRow, NormRow,
    SignReport, SignResolution, WaRow, WA_COEFF_TOL,
};
pub use instance::{ExactData, Mode, PerturbationInstance};

use thiserror::Error;

use crate::gram::GramError;
use crate::numkernel::NumError;
use crate::spectral::SpectralError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoremError {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("matrix orders differ: A is {left}, B is {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("{alphas} alphas but {betas} betas")]
    FamilySizeMismatch { alphas: usize, betas: usize },
    #[error("{side}[{index}] has length {actual}, expected {expected}")]
    VectorLength {
        side: &'static str,
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("{what} has a negative entry")]
    Negative { what: String },
    #[error("index {index} out of range for a family of {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("similarity condition fails at subset {}", fmt_subset(.subset))]
    ConditionFails { subset: Vec<usize> },
    #[error("eigenvalue cluster near {lambda} holds {left} eigenvalues of A but {right} of B")]
    MultiplicityMismatch {
        lambda: f64,
        left: usize,
        right: usize,
    },
    #[error("cluster {cluster}: {source}")]
    Cluster {
        cluster: usize,
        #[source]
        source: GramError,
    },
    #[error("certificate residuals exceed the bound {bound:e}: {residuals}")]
    ResidualsExceeded { residuals: Residuals, bound: f64 },
    #[error("certificate has order {actual}, expected {expected}")]
    CertificateOrder { expected: usize, actual: usize },
    #[error("moment {t} of pair ({i}, {j}) is {value:e} < 0")]
    NegativeMoment {
        i: usize,
        j: usize,
        t: usize,
        value: f64,
    },
    #[error("pair ({i}, {j}): inner products flip sign but moments do not vanish")]
    ClaimViolated { i: usize, j: usize },
    #[error("pair ({i}, {j}): inner products are neither equal nor opposite")]
    NeitherAlternative { i: usize, j: usize },
}

/// 1-based rendering of a 0-based subset, e.g. `{1,2}`.
pub fn fmt_subset(subset: &[usize]) -> String {
    let items: Vec<String> = subset.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", items.join(","))
}
