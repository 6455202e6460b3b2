pub mod gram;
pub mod instances;
pub mod numkernel;
pub mod spectral;
pub mod theorem;
pub mod tolerances;

pub use tolerances::Tolerances;
