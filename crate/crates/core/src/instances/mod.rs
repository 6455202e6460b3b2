//! Seeded instance generators and the JSON instance format.

mod format;
mod gen;
mod orthogonal;

pub use format::{
    instance_to_json, parse_instance, parse_rational, rational_to_json, render_compact_rows,
    serialize_instance, SCHEMA_VERSION,
};
pub use gen::{
    gen_adversarial_instance, gen_disjoint_support_instance, gen_haar_orthogonal,
    gen_positive_instance, gen_positive_with_truth, GenSpec,
};
pub use orthogonal::{haar_orthogonal, RationalOrthogonal};

use thiserror::Error;

use crate::numkernel::NumError;
use crate::theorem::TheoremError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("invalid instance: {0}")]
    Schema(String),
    #[error("invalid entry at {path}: {msg}")]
    Entry { path: String, msg: String },
    #[error("invalid generator spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Theorem(#[from] TheoremError),
}

impl From<NumError> for InstanceError {
    fn from(e: NumError) -> Self {
        InstanceError::Theorem(e.into())
    }
}
