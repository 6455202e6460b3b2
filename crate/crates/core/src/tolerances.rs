use serde::{Deserialize, Serialize};

/// Numerical thresholds used across the crate. Exact-mode decisions ignore all of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed asymmetry of float input, relative to `max(1, max |M_ij|)`.
    pub sym: f64,
    /// Eigensolver residual contract, scaled by the order.
    pub eigh: f64,
    /// Eigenvalue clustering gap; `None` means `max(1e-8, 1e-8 · max|λ|)`.
    pub cluster: Option<f64>,
    /// Float similarity test: sorted spectra must agree within `poly · (1 + max|λ|)`.
    pub poly: f64,
    /// Certificate residuals must be at most `cert · n · (1 + ‖A‖_F)`.
    pub cert: f64,
    /// Per-cluster Gram agreement, scaled by `1 + max‖α_i‖²`.
    pub gram: f64,
    /// Pivoted Cholesky stops below `rank · largest pivot`.
    pub rank: f64,
    /// Moments below `-moment` violate nonnegativity.
    pub moment: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sym: 1e-10,
            eigh: 1e-12,
            cluster: None,
            poly: 1e-8,
            cert: 1e-8,
            gram: 1e-7,
            rank: 1e-10,
            moment: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), String> {
        let named = [
            ("sym", self.sym),
            ("eigh", self.eigh),
            ("poly", self.poly),
            ("cert", self.cert),
            ("gram", self.gram),
            ("rank", self.rank),
            ("moment", self.moment),
            ("cluster", self.cluster.unwrap_or(1.0)),
        ];
        for (name, value) in named {
            if !(value.is_finite() && value > 0.0) {
                return Err(format!("tolerance `{name}` must be positive, got {value}"));
            }
        }
        Ok(())
    }
}
