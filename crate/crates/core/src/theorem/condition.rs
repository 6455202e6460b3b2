use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{Mode, PerturbationInstance, TheoremError};
use crate::numkernel::{
    add_exact, charpoly_exact, eigh, CharPoly, FloatCharPoly, RationalMatrix, RationalVector,
};
use crate::tolerances::Tolerances;

/// How a subset `S` of the family perturbs the base matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairRule {
    /// `A + σσᵀ` with `σ = Σ_{i∈S} α_i`.
    OuterOfSum,
    /// `A + Σ_{i∈S} α_iα_iᵀ`.
    SumOfOuters,
}

impl PairRule {
    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::General => PairRule::OuterOfSum,
            Mode::Nonnegative => PairRule::SumOfOuters,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PairRule::OuterOfSum => "outer_of_sum",
            PairRule::SumOfOuters => "sum_of_outers",
        }
    }
}

/// Characteristic data of the two perturbed matrices for one subset.
#[derive(Clone, Debug, PartialEq)]
pub enum PolyPair {
    Exact {
        left: CharPoly,
        right: CharPoly,
    },
    Float {
        left: FloatCharPoly,
        right: FloatCharPoly,
        left_spectrum: Vec<f64>,
        right_spectrum: Vec<f64>,
        /// Largest gap between sorted spectra.
        deviation: f64,
        tol: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubsetCheck {
    /// 0-based indices, ascending.
    pub subset: Vec<usize>,
    pub polys: PolyPair,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub rule: PairRule,
    pub exact: bool,
    pub verdict: bool,
    /// `∅`, then singletons, then pairs in lexicographic order.
    pub checks: Vec<SubsetCheck>,
}

impl ConditionReport {
    /// First failing subset, if any.
    pub fn witness(&self) -> Option<&SubsetCheck> {
        self.checks.iter().find(|c| !c.equal)
    }
}

/// `∅`, `{0}`, …, `{m-1}`, `{0,1}`, `{0,2}`, …, `{m-2,m-1}`.
pub fn subsets_up_to_two(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(1 + m + m * m.saturating_sub(1) / 2);
    out.push(vec![]);
    out.extend((0..m).map(|i| vec![i]));
    for i in 0..m {
        for j in i + 1..m {
            out.push(vec![i, j]);
        }
    }
    out
}

/// Tests `A + σσᵀ ~ B + ττᵀ` for every subset of size at most two.
pub fn check_condition_general(
    inst: &PerturbationInstance,
    tols: &Tolerances,
) -> Result<ConditionReport, TheoremError> {
    run_checks(inst, PairRule::OuterOfSum, tols)
}

/// Tests `A + Σ α_iα_iᵀ ~ B + Σ β_iβ_iᵀ` for every subset of size at most two; all data
/// must be entrywise nonnegative.
pub fn check_condition_nonnegative(
    inst: &PerturbationInstance,
    tols: &Tolerances,
) -> Result<ConditionReport, TheoremError> {
    inst.check_nonnegative()?;
    run_checks(inst, PairRule::SumOfOuters, tols)
}

/// Dispatches on the instance mode.
pub fn check_condition(
    inst: &PerturbationInstance,
    tols: &Tolerances,
) -> Result<ConditionReport, TheoremError> {
    match inst.mode {
        Mode::General => check_condition_general(inst, tols),
        Mode::Nonnegative => check_condition_nonnegative(inst, tols),
    }
}

fn run_checks(
    inst: &PerturbationInstance,
    rule: PairRule,
    tols: &Tolerances,
) -> Result<ConditionReport, TheoremError> {
    let subsets = subsets_up_to_two(inst.family_size());
    let checks: Vec<SubsetCheck> = match inst.exact() {
        Some(data) => subsets
            .into_par_iter()
            .map(|subset| {
                let left = charpoly_exact(&perturbed_exact(&data.a, &data.alphas, &subset, rule));
                let right = charpoly_exact(&perturbed_exact(&data.b, &data.betas, &subset, rule));
                let equal = left == right;
                SubsetCheck {
                    subset,
                    polys: PolyPair::Exact { left, right },
                    equal,
                }
            })
            .collect(),
        None => subsets
            .into_par_iter()
            .map(|subset| {
                let left = perturbed_float(&inst.a, &inst.alphas, &subset, rule);
                let right = perturbed_float(&inst.b, &inst.betas, &subset, rule);
                float_check(subset, &left, &right, tols)
            })
            .collect::<Result<_, _>>()?,
    };
    let verdict = checks.iter().all(|c| c.equal);
    Ok(ConditionReport {
        rule,
        exact: inst.is_exact(),
        verdict,
        checks,
    })
}

fn perturbed_exact(
    base: &RationalMatrix,
    vecs: &[RationalVector],
    subset: &[usize],
    rule: PairRule,
) -> RationalMatrix {
    let mut m = base.clone();
    match rule {
        PairRule::OuterOfSum => {
            if let Some((&first, rest)) = subset.split_first() {
                let sigma = rest
                    .iter()
                    .fold(vecs[first].clone(), |acc, &i| add_exact(&acc, &vecs[i]));
                m.add_outer(&sigma).expect("lengths validated");
            }
        }
        PairRule::SumOfOuters => {
            for &i in subset {
                m.add_outer(&vecs[i]).expect("lengths validated");
            }
        }
    }
    m
}

pub(crate) fn perturbed_float(
    base: &DMatrix<f64>,
    vecs: &[DVector<f64>],
    subset: &[usize],
    rule: PairRule,
) -> DMatrix<f64> {
    let mut m = base.clone();
    match rule {
        PairRule::OuterOfSum => {
            if !subset.is_empty() {
                let sigma: DVector<f64> = subset
                    .iter()
                    .fold(DVector::zeros(base.nrows()), |acc, &i| acc + &vecs[i]);
                m += &sigma * sigma.transpose();
            }
        }
        PairRule::SumOfOuters => {
            for &i in subset {
                m += &vecs[i] * vecs[i].transpose();
            }
        }
    }
    m
}

fn float_check(
    subset: Vec<usize>,
    left: &DMatrix<f64>,
    right: &DMatrix<f64>,
    tols: &Tolerances,
) -> Result<SubsetCheck, TheoremError> {
    let sym_tol = f64::INFINITY;
    let ls = eigh(left, sym_tol)?.eigenvalues;
    let rs = eigh(right, sym_tol)?.eigenvalues;
    let scale = ls.iter().chain(&rs).fold(0.0f64, |acc, x| acc.max(x.abs()));
    let tol = tols.poly * (1.0 + scale);
    let deviation = ls
        .iter()
        .zip(&rs)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    let equal = deviation <= tol;
    Ok(SubsetCheck {
        subset,
        polys: PolyPair::Float {
            left: FloatCharPoly::from_roots(&ls),
            right: FloatCharPoly::from_roots(&rs),
            left_spectrum: ls,
            right_spectrum: rs,
            deviation,
            tol,
        },
        equal,
    })
}
