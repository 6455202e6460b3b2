use nalgebra::{DMatrix, DVector};
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::TheoremError;
use crate::numkernel::{
    check_symmetric_f64, rational_from_f64, vector_to_f64, RationalMatrix, RationalVector,
};

/// Which hypothesis an instance is meant to satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Arbitrary symmetric matrices and vectors; pairs are tested as `(α_i + α_j)(α_i + α_j)ᵀ`.
    General,
    /// Entrywise nonnegative data; pairs are tested as `α_iα_iᵀ + α_jα_jᵀ`.
    Nonnegative,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::General => "general",
            Mode::Nonnegative => "nonnegative",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "general" => Ok(Mode::General),
            "nonnegative" => Ok(Mode::Nonnegative),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// Rational payload of an instance.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactData {
    pub a: RationalMatrix,
    pub b: RationalMatrix,
    pub alphas: Vec<RationalVector>,
    pub betas: Vec<RationalVector>,
}

/// `(A, B, [α_i], [β_i])` with a mode flag.
///
/// Float copies are always present; the rational payload is kept when the instance was
/// built from exact data, and exact-mode decisions use it.
#[derive(Clone, Debug)]
pub struct PerturbationInstance {
    pub mode: Mode,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub alphas: Vec<DVector<f64>>,
    pub betas: Vec<DVector<f64>>,
    exact: Option<ExactData>,
}

fn check_lengths<T>(n: usize, side: &'static str, vecs: &[Vec<T>]) -> Result<(), TheoremError> {
    for (index, v) in vecs.iter().enumerate() {
        if v.len() != n {
            return Err(TheoremError::VectorLength {
                side,
                index,
                expected: n,
                actual: v.len(),
            });
        }
    }
    Ok(())
}

impl PerturbationInstance {
    pub fn from_exact(
        mode: Mode,
        a: RationalMatrix,
        b: RationalMatrix,
        alphas: Vec<RationalVector>,
        betas: Vec<RationalVector>,
    ) -> Result<Self, TheoremError> {
        let n = a.order();
        if b.order() != n {
            return Err(TheoremError::OrderMismatch {
                left: n,
                right: b.order(),
            });
        }
        a.check_symmetric()?;
        b.check_symmetric()?;
        if alphas.len() != betas.len() {
            return Err(TheoremError::FamilySizeMismatch {
                alphas: alphas.len(),
                betas: betas.len(),
            });
        }
        check_lengths(n, "alphas", &alphas)?;
        check_lengths(n, "betas", &betas)?;
        let data = ExactData {
            a,
            b,
            alphas,
            betas,
        };
        if mode == Mode::Nonnegative {
            check_nonnegative_exact(&data)?;
        }
        Ok(Self {
            mode,
            a: data.a.to_f64(),
            b: data.b.to_f64(),
            alphas: data.alphas.iter().map(|v| vector_to_f64(v)).collect(),
            betas: data.betas.iter().map(|v| vector_to_f64(v)).collect(),
            exact: Some(data),
        })
    }

    pub fn from_float(
        mode: Mode,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        alphas: Vec<DVector<f64>>,
        betas: Vec<DVector<f64>>,
        sym_tol: f64,
    ) -> Result<Self, TheoremError> {
        check_symmetric_f64(&a, sym_tol)?;
        check_symmetric_f64(&b, sym_tol)?;
        let n = a.nrows();
        if b.nrows() != n {
            return Err(TheoremError::OrderMismatch {
                left: n,
                right: b.nrows(),
            });
        }
        if alphas.len() != betas.len() {
            return Err(TheoremError::FamilySizeMismatch {
                alphas: alphas.len(),
                betas: betas.len(),
            });
        }
        for (side, vecs) in [("alphas", &alphas), ("betas", &betas)] {
            for (index, v) in vecs.iter().enumerate() {
                if v.len() != n {
                    return Err(TheoremError::VectorLength {
                        side,
                        index,
                        expected: n,
                        actual: v.len(),
                    });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(crate::numkernel::NumError::NonFinite.into());
                }
            }
        }
        let inst = Self {
            mode,
            a,
            b,
            alphas,
            betas,
            exact: None,
        };
        if mode == Mode::Nonnegative {
            inst.check_nonnegative()?;
        }
        Ok(inst)
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn family_size(&self) -> usize {
        self.alphas.len()
    }

    pub fn exact(&self) -> Option<&ExactData> {
        self.exact.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Drops the rational payload so that decisions use float arithmetic.
    pub fn into_float(mut self) -> Self {
        self.exact = None;
        self
    }

    /// Attaches the exact dyadic value of every float entry as rational payload.
    pub fn into_exact(self) -> Result<Self, TheoremError> {
        if self.exact.is_some() {
            return Ok(self);
        }
        let vec_exact = |v: &DVector<f64>| -> Result<RationalVector, TheoremError> {
            v.iter()
                .map(|&x| rational_from_f64(x).map_err(TheoremError::from))
                .collect()
        };
        // float input was accepted within sym_tol; exact mode needs exact symmetry
        let a = RationalMatrix::from_f64(&((&self.a + self.a.transpose()) * 0.5))?;
        let b = RationalMatrix::from_f64(&((&self.b + self.b.transpose()) * 0.5))?;
        let alphas = self
            .alphas
            .iter()
            .map(vec_exact)
            .collect::<Result<_, _>>()?;
        let betas = self.betas.iter().map(vec_exact).collect::<Result<_, _>>()?;
        Self::from_exact(self.mode, a, b, alphas, betas)
    }

    pub fn with_mode(mut self, mode: Mode) -> Result<Self, TheoremError> {
        self.mode = mode;
        if mode == Mode::Nonnegative {
            self.check_nonnegative()?;
        }
        Ok(self)
    }

    /// Every entry of `A`, `B`, the `α_i` and the `β_i` is `>= 0`.
    pub fn check_nonnegative(&self) -> Result<(), TheoremError> {
        if let Some(data) = &self.exact {
            return check_nonnegative_exact(data);
        }
        let neg_matrix = |m: &DMatrix<f64>| m.iter().any(|x| *x < 0.0);
        if neg_matrix(&self.a) {
            return Err(TheoremError::Negative { what: "A".into() });
        }
        if neg_matrix(&self.b) {
            return Err(TheoremError::Negative { what: "B".into() });
        }
        for (side, vecs) in [("alpha", &self.alphas), ("beta", &self.betas)] {
            if let Some(i) = vecs.iter().position(|v| v.iter().any(|x| *x < 0.0)) {
                return Err(TheoremError::Negative {
                    what: format!("{side}_{}", i + 1),
                });
            }
        }
        Ok(())
    }

    /// `1 + max ‖v‖²` over all alphas and betas, the scale of Gram entries.
    pub(crate) fn gram_scale(&self) -> f64 {
        let max_sq = self
            .alphas
            .iter()
            .chain(&self.betas)
            .map(|v| v.norm_squared())
            .fold(0.0, f64::max);
        1.0 + max_sq
    }
}

fn check_nonnegative_exact(data: &ExactData) -> Result<(), TheoremError> {
    if !data.a.is_nonnegative() {
        return Err(TheoremError::Negative { what: "A".into() });
    }
    if !data.b.is_nonnegative() {
        return Err(TheoremError::Negative { what: "B".into() });
    }
    for (side, vecs) in [("alpha", &data.alphas), ("beta", &data.betas)] {
        if let Some(i) = vecs.iter().position(|v| v.iter().any(|x| x.is_negative())) {
            return Err(TheoremError::Negative {
                what: format!("{side}_{}", i + 1),
            });
        }
    }
    Ok(())
}
