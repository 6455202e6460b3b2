use super::condition::{perturbed_float, PairRule};
use super::construct::{joint_decomposition, JointDecomposition};
use super::{Mode, PerturbationInstance, TheoremError};
use crate::numkernel::{
    charpoly_exact, coefficient_relative_error, coefficient_scales, eigh, rational_to_f64,
    FloatCharPoly, RationalMatrix,
};
use crate::spectral::{
    moments, moments_exact, project_vectors, spectral_moments, vandermonde_solve,
    wa_charpoly_rank2_from, ProjectedVectors,
};
use crate::tolerances::Tolerances;

/// Per-coefficient agreement required between the resolvent-determinant polynomial and
/// the directly computed one.
pub const WA_COEFF_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct NormRow {
    pub cluster: usize,
    pub lambda: f64,
    pub index: usize,
    /// `‖P_kᵀα_i‖`.
    pub left: f64,
    /// `‖R_kᵀβ_i‖`.
    pub right: f64,
    pub equal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerRoute {
    /// `⟨x, y⟩ = (‖x + y‖² - ‖x‖² - ‖y‖²) / 2`.
    Polarization,
    /// Inner products taken directly, with the sign alternative resolved through moments.
    Direct,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerRow {
    pub cluster: usize,
    pub lambda: f64,
    pub i: usize,
    pub j: usize,
    pub left: f64,
    pub right: f64,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerTable {
    pub route: InnerRoute,
    pub tol: f64,
    pub rows: Vec<InnerRow>,
    /// Sign resolution for each pair `i < j`; only filled on the direct route.
    pub resolutions: Vec<(usize, usize, Result<SignResolution, TheoremError>)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignResolution {
    /// `⟨P_kᵀα_i, P_kᵀα_j⟩ = ⟨R_kᵀβ_i, R_kᵀβ_j⟩` for every cluster.
    AllEqual,
    /// The inner products are opposite, hence all zero.
    AllZero,
}

impl SignResolution {
    pub fn as_str(self) -> &'static str {
        match self {
            SignResolution::AllEqual => "all_equal",
            SignResolution::AllZero => "all_zero",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignReport {
    pub resolution: SignResolution,
    pub left_inner: Vec<f64>,
    pub right_inner: Vec<f64>,
    /// `α_iᵀAᵗα_j` for `t = 0..s`.
    pub left_moments: Vec<f64>,
    pub right_moments: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentRow {
    pub i: usize,
    pub j: usize,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// Largest gap between direct moments and `Σ_k λ_kᵗ ⟨P_kᵀα_i, P_kᵀα_j⟩`, both sides.
    pub identity_error: f64,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaRow {
    pub i: usize,
    pub j: usize,
    /// Resolvent-determinant polynomial of `A + α_iα_iᵀ + α_jα_jᵀ` against the direct one.
    pub left_error: f64,
    pub right_error: f64,
    /// The two resolvent-determinant polynomials against each other.
    pub cross_error: f64,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub lambdas: Vec<f64>,
    pub mults: Vec<usize>,
    pub norms: Vec<NormRow>,
    pub inner: InnerTable,
    pub moments: Vec<MomentRow>,
    pub wa: Vec<WaRow>,
}

struct Context<'a> {
    inst: &'a PerturbationInstance,
    joint: JointDecomposition,
    pa: ProjectedVectors,
    pb: ProjectedVectors,
    gram_tol: f64,
}

impl<'a> Context<'a> {
    fn new(inst: &'a PerturbationInstance, tols: &Tolerances) -> Result<Self, TheoremError> {
        let joint = joint_decomposition(&inst.a, &inst.b, tols)?;
        let pa = project_vectors(&joint.left, &inst.alphas)?;
        let pb = project_vectors(&joint.right, &inst.betas)?;
        Ok(Self {
            inst,
            joint,
            pa,
            pb,
            gram_tol: tols.gram * inst.gram_scale(),
        })
    }

    fn lambda_scale(&self) -> f64 {
        1.0 + self
            .joint
            .lambdas()
            .iter()
            .fold(0.0f64, |acc, l| acc.max(l.abs()))
    }

    fn pair_moments(&self, i: usize, j: usize) -> Result<(Vec<f64>, Vec<f64>), TheoremError> {
        let s = self.joint.cluster_count();
        let inst = self.inst;
        Ok(match inst.exact() {
            Some(data) => {
                let to_f = |v: Vec<_>| v.iter().map(rational_to_f64).collect();
                (
                    to_f(moments_exact(&data.a, &data.alphas[i], &data.alphas[j], s)?),
                    to_f(moments_exact(&data.b, &data.betas[i], &data.betas[j], s)?),
                )
            }
            None => (
                moments(&inst.a, &inst.alphas[i], &inst.alphas[j], s)?,
                moments(&inst.b, &inst.betas[i], &inst.betas[j], s)?,
            ),
        })
    }

    fn moment_tol(&self, t: usize) -> f64 {
        self.gram_tol * self.lambda_scale().powi(t as i32)
    }

    fn resolve(&self, i: usize, j: usize, tols: &Tolerances) -> Result<SignReport, TheoremError> {
        let s = self.joint.cluster_count();
        let left_inner: Vec<f64> = (0..s).map(|k| self.pa.inner(k, i, j)).collect();
        let right_inner: Vec<f64> = (0..s).map(|k| self.pb.inner(k, i, j)).collect();
        let (left_moments, right_moments) = self.pair_moments(i, j)?;
        for (t, value) in left_moments.iter().chain(&right_moments).enumerate() {
            if *value < -tols.moment {
                return Err(TheoremError::NegativeMoment {
                    i,
                    j,
                    t: t % s,
                    value: *value,
                });
            }
        }
        let tol = self.gram_tol;
        let flipped = left_inner
            .iter()
            .zip(&right_inner)
            .all(|(a, b)| (a + b).abs() <= tol);
        let equal = left_inner
            .iter()
            .zip(&right_inner)
            .all(|(a, b)| (a - b).abs() <= tol);
        let resolution = if flipped {
            // opposite per-cluster inner products make the moments opposite; being
            // nonnegative they vanish, and the Vandermonde system forces zero
            let vanish = |m: &[f64]| {
                m.iter()
                    .enumerate()
                    .all(|(t, v)| v.abs() <= self.moment_tol(t))
            };
            if !vanish(&left_moments) || !vanish(&right_moments) {
                return Err(TheoremError::ClaimViolated { i, j });
            }
            let lambdas = self.joint.lambdas();
            let solved_left = vandermonde_solve(lambdas, &left_moments)?;
            let solved_right = vandermonde_solve(lambdas, &right_moments)?;
            let zero = |c: &[f64]| c.iter().all(|x| x.abs() <= tol);
            if !zero(&solved_left) || !zero(&solved_right) {
                return Err(TheoremError::ClaimViolated { i, j });
            }
            SignResolution::AllZero
        } else if equal {
            SignResolution::AllEqual
        } else {
            return Err(TheoremError::NeitherAlternative { i, j });
        };
        Ok(SignReport {
            resolution,
            left_inner,
            right_inner,
            left_moments,
            right_moments,
        })
    }

    fn norms(&self) -> Vec<NormRow> {
        let mut rows = Vec::new();
        for k in 0..self.joint.cluster_count() {
            for index in 0..self.inst.family_size() {
                let left = self.pa.norm(k, index);
                let right = self.pb.norm(k, index);
                rows.push(NormRow {
                    cluster: k,
                    lambda: self.joint.lambdas()[k],
                    index,
                    left,
                    right,
                    equal: (left * left - right * right).abs() <= self.gram_tol,
                });
            }
        }
        rows
    }

    fn inner(&self, tols: &Tolerances) -> InnerTable {
        let m = self.inst.family_size();
        let route = match self.inst.mode {
            Mode::General => InnerRoute::Polarization,
            Mode::Nonnegative => InnerRoute::Direct,
        };
        let polarized = |p: &ProjectedVectors, k: usize, i: usize, j: usize| {
            let sum = p.per_cluster[k].column(i) + p.per_cluster[k].column(j);
            0.5 * (sum.norm_squared() - p.norm(k, i).powi(2) - p.norm(k, j).powi(2))
        };
        let mut rows = Vec::new();
        for k in 0..self.joint.cluster_count() {
            for i in 0..m {
                for j in i + 1..m {
                    let (left, right) = match route {
                        InnerRoute::Polarization => {
                            (polarized(&self.pa, k, i, j), polarized(&self.pb, k, i, j))
                        }
                        InnerRoute::Direct => (self.pa.inner(k, i, j), self.pb.inner(k, i, j)),
                    };
                    rows.push(InnerRow {
                        cluster: k,
                        lambda: self.joint.lambdas()[k],
                        i,
                        j,
                        left,
                        right,
                        equal: (left - right).abs() <= self.gram_tol,
                    });
                }
            }
        }
        let mut resolutions = Vec::new();
        if route == InnerRoute::Direct {
            for i in 0..m {
                for j in i + 1..m {
                    resolutions.push((i, j, self.resolve(i, j, tols).map(|r| r.resolution)));
                }
            }
        }
        InnerTable {
            route,
            tol: self.gram_tol,
            rows,
            resolutions,
        }
    }

    fn moments(&self) -> Result<Vec<MomentRow>, TheoremError> {
        let m = self.inst.family_size();
        let s = self.joint.cluster_count();
        let mut rows = Vec::new();
        for i in 0..m {
            for j in i..m {
                let (left, right) = self.pair_moments(i, j)?;
                let sl = spectral_moments(
                    &self.joint.left,
                    &self.inst.alphas[i],
                    &self.inst.alphas[j],
                    s,
                )?;
                let sr = spectral_moments(
                    &self.joint.right,
                    &self.inst.betas[i],
                    &self.inst.betas[j],
                    s,
                )?;
                let identity_error = left
                    .iter()
                    .zip(&sl)
                    .chain(right.iter().zip(&sr))
                    .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
                let equal = left
                    .iter()
                    .zip(&right)
                    .enumerate()
                    .all(|(t, (a, b))| (a - b).abs() <= self.moment_tol(t));
                rows.push(MomentRow {
                    i,
                    j,
                    left,
                    right,
                    identity_error,
                    equal,
                });
            }
        }
        Ok(rows)
    }

    fn wa(&self, tols: &Tolerances) -> Result<Vec<WaRow>, TheoremError> {
        let m = self.inst.family_size();
        let mut rows = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                let inst = self.inst;
                let wl =
                    wa_charpoly_rank2_from(&self.joint.left, &inst.alphas[i], &inst.alphas[j])?;
                let wr = wa_charpoly_rank2_from(&self.joint.right, &inst.betas[i], &inst.betas[j])?;
                let (dl, scales_l) = self.direct(true, i, j, tols)?;
                let (dr, scales_r) = self.direct(false, i, j, tols)?;
                let left_error = coefficient_relative_error(&wl.coeffs, &dl, &scales_l);
                let right_error = coefficient_relative_error(&wr.coeffs, &dr, &scales_r);
                let cross_error = coefficient_relative_error(&wl.coeffs, &wr.coeffs, &scales_l);
                rows.push(WaRow {
                    i,
                    j,
                    left_error,
                    right_error,
                    cross_error,
                    equal: cross_error <= WA_COEFF_TOL,
                });
            }
        }
        Ok(rows)
    }

    /// Coefficients of `det(xI - (M + u uᵀ + v vᵀ))` and their scales, exact when possible.
    fn direct(
        &self,
        left: bool,
        i: usize,
        j: usize,
        tols: &Tolerances,
    ) -> Result<(Vec<f64>, Vec<f64>), TheoremError> {
        let inst = self.inst;
        let (base, vecs) = if left {
            (&inst.a, &inst.alphas)
        } else {
            (&inst.b, &inst.betas)
        };
        let explicit = perturbed_float(base, vecs, &[i, j], PairRule::SumOfOuters);
        let roots = eigh(
            &explicit,
            tols.sym.max(f64::EPSILON * (1.0 + explicit.norm())),
        )?
        .eigenvalues;
        let scales = coefficient_scales(&roots);
        let coeffs = match inst.exact() {
            Some(data) => {
                let (m, us) = if left {
                    (&data.a, &data.alphas)
                } else {
                    (&data.b, &data.betas)
                };
                let mut exact: RationalMatrix = m.clone();
                exact.add_outer(&us[i])?;
                exact.add_outer(&us[j])?;
                charpoly_exact(&exact).to_f64()
            }
            None => FloatCharPoly::from_roots(&roots).coeffs,
        };
        Ok((coeffs, scales))
    }
}

fn check_index(inst: &PerturbationInstance, index: usize) -> Result<(), TheoremError> {
    if index >= inst.family_size() {
        return Err(TheoremError::IndexOutOfRange {
            index,
            size: inst.family_size(),
        });
    }
    Ok(())
}

/// `‖P_kᵀα_i‖` against `‖R_kᵀβ_i‖` for every cluster and index.
pub fn diag_projection_norms(
    inst: &PerturbationInstance,
    tols: &Tolerances,
) -> Result<Vec<NormRow>, TheoremError> {
    Ok(Context::new(inst, tols)?.norms())
}

/// Per-cluster inner products of every pair `i < j`.
pub fn diag_projection_inner(
    inst: &PerturbationInstance,
    tols: &Tolerances,
) -> Result<InnerTable, TheoremError> {
    Ok(Context::new(inst, tols)?.inner(tols))
}

/// Moment sequences `α_iᵀAᵗα_j` and `β_iᵀBᵗβ_j` for `i <= j`, `t = 0..s`.
pub fn diag_moments(
    inst: &PerturbationInstance,
    tols: &Tolerances,
) -> Result<Vec<MomentRow>, TheoremError> {
    Context::new(inst, tols)?.moments()
}

/// Resolvent-determinant polynomials of the rank-two updates for every pair `i < j`.
pub fn diag_wa(inst: &PerturbationInstance, tols: &Tolerances) -> Result<Vec<WaRow>, TheoremError> {
    Context::new(inst, tols)?.wa(tols)
}

/// All diagnostic tables from one joint decomposition.
pub fn diagnose(
    inst: &PerturbationInstance,
    tols: &Tolerances,
) -> Result<Diagnostics, TheoremError> {
    let ctx = Context::new(inst, tols)?;
    Ok(Diagnostics {
        lambdas: ctx.joint.lambdas().to_vec(),
        mults: ctx.joint.mults().to_vec(),
        norms: ctx.norms(),
        inner: ctx.inner(tols),
        moments: ctx.moments()?,
        wa: ctx.wa(tols)?,
    })
}

/// Decides whether the per-cluster inner products of pair `(i, j)` agree or are opposite.
///
/// Opposite inner products make the moment sequences opposite; nonnegative data forces
/// both to vanish, and then the Vandermonde system forces every inner product to zero.
/// The function checks each of those steps numerically.
pub fn resolve_sign_nonneg(
    inst: &PerturbationInstance,
    i: usize,
    j: usize,
    tols: &Tolerances,
) -> Result<SignReport, TheoremError> {
    inst.check_nonnegative()?;
    check_index(inst, i)?;
    check_index(inst, j)?;
    Context::new(inst, tols)?.resolve(i, j, tols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector, DMatrix, DVector};

    fn inst(
        mode: Mode,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        alphas: Vec<DVector<f64>>,
        betas: Vec<DVector<f64>>,
    ) -> PerturbationInstance {
        PerturbationInstance::from_float(mode, a, b, alphas, betas, 1e-10).unwrap()
    }

    fn e(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    #[test]
    fn identical_instance_all_tables_equal() {
        let a = dmatrix![2.0, 1.0, 0.0; 1.0, 2.0, 1.0; 0.0, 1.0, 2.0];
        let al = vec![
            dvector![1.0, 0.0, 1.0],
            dvector![0.0, 2.0, 1.0],
            dvector![1.0, 1.0, 1.0],
        ];
        for mode in [Mode::General, Mode::Nonnegative] {
            let x = inst(mode, a.clone(), a.clone(), al.clone(), al.clone());
            let d = diagnose(&x, &Tolerances::default()).unwrap();
            assert!(d.norms.iter().all(|r| r.equal));
            assert!(d.inner.rows.iter().all(|r| r.equal));
            assert!(d
                .moments
                .iter()
                .all(|r| r.equal && r.identity_error < 1e-10));
            assert!(d.wa.iter().all(|r| r.equal && r.left_error < WA_COEFF_TOL));
        }
    }

    #[test]
    fn singleton_failure_shows_in_norms() {
        let z = DMatrix::zeros(2, 2);
        let x = inst(
            Mode::General,
            z.clone(),
            z,
            vec![dvector![1.0, 0.0]],
            vec![dvector![2.0, 0.0]],
        );
        let rows = diag_projection_norms(&x, &Tolerances::default()).unwrap();
        assert!(rows.iter().any(|r| !r.equal));
    }

    #[test]
    fn adversarial_zero_example_flags_pair() {
        let z = DMatrix::zeros(2, 2);
        let x = inst(
            Mode::General,
            z.clone(),
            z,
            vec![e(2, 0), e(2, 1)],
            vec![e(2, 0), e(2, 0)],
        );
        let table = diag_projection_inner(&x, &Tolerances::default()).unwrap();
        assert_eq!(table.route, InnerRoute::Polarization);
        assert_eq!(table.rows.len(), 1);
        let row = &table.rows[0];
        assert_eq!((row.i, row.j), (0, 1));
        assert!(row.left.abs() < 1e-14 && (row.right - 1.0).abs() < 1e-14);
        assert!(!row.equal);
    }

    #[test]
    fn resolve_sign_trivial_pair() {
        let z = DMatrix::zeros(2, 2);
        let x = inst(
            Mode::Nonnegative,
            z.clone(),
            z,
            vec![e(2, 0)],
            vec![e(2, 0)],
        );
        let r = resolve_sign_nonneg(&x, 0, 0, &Tolerances::default()).unwrap();
        assert_eq!(r.resolution, SignResolution::AllEqual);
    }

    #[test]
    fn resolve_sign_swapped_basis_is_all_zero() {
        let z = DMatrix::zeros(2, 2);
        let x = inst(
            Mode::Nonnegative,
            z.clone(),
            z,
            vec![e(2, 0), e(2, 1)],
            vec![e(2, 1), e(2, 0)],
        );
        let r = resolve_sign_nonneg(&x, 0, 1, &Tolerances::default()).unwrap();
        assert_eq!(r.resolution, SignResolution::AllZero);
        assert!(r
            .left_inner
            .iter()
            .chain(&r.right_inner)
            .all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn resolve_sign_identity_repeated_vector() {
        let i2 = DMatrix::identity(2, 2);
        let x = inst(
            Mode::Nonnegative,
            i2.clone(),
            i2,
            vec![e(2, 0), e(2, 0)],
            vec![e(2, 0), e(2, 0)],
        );
        let r = resolve_sign_nonneg(&x, 0, 1, &Tolerances::default()).unwrap();
        assert_eq!(r.resolution, SignResolution::AllEqual);
        assert_eq!(r.left_inner.len(), 1);
        assert!((r.left_inner[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn resolve_sign_rejects_general_data_and_bad_index() {
        let i2 = DMatrix::identity(2, 2);
        let x = inst(
            Mode::General,
            i2.clone(),
            i2,
            vec![dvector![1.0, -1.0]],
            vec![dvector![1.0, -1.0]],
        );
        assert!(matches!(
            resolve_sign_nonneg(&x, 0, 0, &Tolerances::default()),
            Err(TheoremError::Negative { .. })
        ));
        let y = inst(
            Mode::Nonnegative,
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            vec![e(2, 0)],
            vec![e(2, 0)],
        );
        assert!(matches!(
            resolve_sign_nonneg(&y, 0, 1, &Tolerances::default()),
            Err(TheoremError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn nonnegative_adversarial_has_neither_alternative() {
        let z = DMatrix::zeros(2, 2);
        let x = inst(
            Mode::Nonnegative,
            z.clone(),
            z,
            vec![e(2, 0), e(2, 1)],
            vec![e(2, 0), e(2, 0)],
        );
        let table = diag_projection_inner(&x, &Tolerances::default()).unwrap();
        assert_eq!(table.route, InnerRoute::Direct);
        assert!(matches!(
            table.resolutions[0].2,
            Err(TheoremError::NeitherAlternative { i: 0, j: 1 })
        ));
    }
}
