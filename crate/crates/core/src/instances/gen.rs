use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::orthogonal::{haar_orthogonal, RationalOrthogonal};
use super::InstanceError;
use crate::gram::OrthogonalMap;
use crate::numkernel::{rat, rational_from_f64, RationalMatrix, RationalVector};
use crate::theorem::{Mode, PerturbationInstance};

/// Generator parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    /// Eigenvalue multiplicities of `A`; must sum to `n`.
    pub multiplicities: Option<Vec<usize>>,
    pub nonneg: bool,
    /// Multiplies every entry of `A` and of the vectors.
    pub entry_scale: f64,
    /// Rational payload (`true`) or float payload.
    pub exact: bool,
}

impl GenSpec {
    pub fn new(n: usize, m: usize, seed: u64) -> Self {
        Self {
            n,
            m,
            seed,
            multiplicities: None,
            nonneg: false,
            entry_scale: 1.0,
            exact: true,
        }
    }

    pub fn with_multiplicities(mut self, mults: Vec<usize>) -> Self {
        self.multiplicities = Some(mults);
        self
    }

    pub fn nonnegative(mut self) -> Self {
        self.nonneg = true;
        self
    }

    pub fn float(mut self) -> Self {
        self.exact = false;
        self
    }

    pub fn mode(&self) -> Mode {
        if self.nonneg {
            Mode::Nonnegative
        } else {
            Mode::General
        }
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.n == 0 {
            return Err(InstanceError::Spec("n must be at least 1".into()));
        }
        if !(self.entry_scale.is_finite() && self.entry_scale > 0.0) {
            return Err(InstanceError::Spec("entry scale must be positive".into()));
        }
        if let Some(mults) = &self.multiplicities {
            if mults.contains(&0) {
                return Err(InstanceError::Spec(
                    "multiplicities must be positive".into(),
                ));
            }
            let total: usize = mults.iter().sum();
            if total != self.n {
                return Err(InstanceError::Spec(format!(
                    "multiplicities sum to {total}, expected n = {}",
                    self.n
                )));
            }
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Haar-distributed orthogonal matrix of order `n`, deterministic in `seed`.
pub fn gen_haar_orthogonal(n: usize, seed: u64) -> OrthogonalMap {
    haar_orthogonal(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Positive instance: `B = Q₀ᵀAQ₀` and `β_i = Q₀ᵀα_i`.
pub fn gen_positive_instance(spec: &GenSpec) -> Result<PerturbationInstance, InstanceError> {
    Ok(gen_positive_with_truth(spec)?.0)
}

/// [`gen_positive_instance`] together with the float image of `Q₀`.
///
/// Rational payloads take `Q₀` from [`RationalOrthogonal::random`] in general mode so that
/// `B` and the `β_i` stay exact; float payloads use a Haar sample. Nonnegative mode always
/// uses a permutation.
pub fn gen_positive_with_truth(
    spec: &GenSpec,
) -> Result<(PerturbationInstance, DMatrix<f64>), InstanceError> {
    spec.validate()?;
    let mut rng = spec.rng();
    let n = spec.n;
    if spec.exact {
        let scale = rational_from_f64(spec.entry_scale)?;
        let a = base_matrix_exact(spec, &mut rng).scale(&scale);
        let alphas: Vec<RationalVector> = (0..spec.m)
            .map(|_| {
                random_int_vector(n, spec.nonneg, &mut rng)
                    .into_iter()
                    .map(|x| x * &scale)
                    .collect()
            })
            .collect();
        let q0 = if spec.nonneg {
            random_permutation(n, &mut rng)
        } else {
            RationalOrthogonal::random(n, &mut rng)
        };
        let b = q0.conjugate(&a);
        let betas = alphas.iter().map(|v| q0.apply_transpose(v)).collect();
        let inst = PerturbationInstance::from_exact(spec.mode(), a, b, alphas, betas)?;
        Ok((inst, q0.to_f64()))
    } else {
        let a = base_matrix_float(spec, &mut rng) * spec.entry_scale;
        let alphas: Vec<DVector<f64>> = (0..spec.m)
            .map(|_| {
                DVector::from_fn(n, |_, _| {
                    let x: f64 = if spec.nonneg {
                        rng.random()
                    } else {
                        rng.sample(StandardNormal)
                    };
                    x * spec.entry_scale
                })
            })
            .collect();
        let q0 = if spec.nonneg {
            random_permutation(n, &mut rng).to_f64()
        } else {
            haar_orthogonal(n, &mut rng).q
        };
        let qt = q0.transpose();
        let b = symmetrize(&qt * &a * &q0);
        let betas = alphas.iter().map(|v| &qt * v).collect();
        let inst = PerturbationInstance::from_float(spec.mode(), a, b, alphas, betas, 1e-10)?;
        Ok((inst, q0))
    }
}

/// Instance whose empty and singleton checks pass while the pair `{1, 2}` fails.
///
/// `A = B` carries the eigenvalue `c` on a two-dimensional subspace spanned by `x_1, x_2`.
/// There `α_1 = β_1 = t x_1`, `α_2 = t x_2` and `β_2 = t (a x_1 + b x_2)` with a rational
/// unit vector `(a, b)`, `a > 0`: every single vector keeps its length inside the eigenspace
/// but the angle between the first two changes. Further vectors satisfy `α_i = β_i`. In
/// general mode both sides are then conjugated by independent rational orthogonal
/// matrices, in nonnegative mode by independent permutations.
pub fn gen_adversarial_instance(spec: &GenSpec) -> Result<PerturbationInstance, InstanceError> {
    spec.validate()?;
    if spec.n < 2 {
        return Err(InstanceError::Spec(
            "an adversarial instance needs n >= 2 to host a repeated eigenvalue".into(),
        ));
    }
    if spec.m < 2 {
        return Err(InstanceError::Spec(
            "an adversarial instance needs m >= 2".into(),
        ));
    }
    let mut rng = spec.rng();
    let n = spec.n;
    let scale = rational_from_f64(spec.entry_scale)?;

    let c = if spec.nonneg {
        rng.random_range(0..=3i64)
    } else {
        rng.random_range(-3..=3i64)
    };
    let mut a = RationalMatrix::zeros(n);
    a.set(0, 0, rat(c, 1));
    a.set(1, 1, rat(c, 1));
    for i in 2..n {
        for j in i..n {
            let x = if spec.nonneg {
                rng.random_range(0..=4i64)
            } else {
                rng.random_range(-4..=4i64)
            };
            a.set(i, j, rat(x, 1));
            a.set(j, i, rat(x, 1));
        }
    }
    let a = a.scale(&scale);

    const UNITS: [(i64, i64, i64); 5] = [(1, 0, 1), (3, 4, 5), (4, 3, 5), (5, 12, 13), (8, 15, 17)];
    let (p, q, r) = UNITS[rng.random_range(0..UNITS.len())];
    let t = rat(rng.random_range(1..=3i64), 1) * &scale;
    let unit = |i: usize| {
        let mut v = vec![rat(0, 1); n];
        v[i] = t.clone();
        v
    };
    let mut alphas = vec![unit(0), unit(1)];
    let mut tilted = vec![rat(0, 1); n];
    tilted[0] = &t * rat(p, r);
    tilted[1] = &t * rat(q, r);
    let mut betas = vec![unit(0), tilted];
    for _ in 2..spec.m {
        let v: RationalVector = random_int_vector(n, spec.nonneg, &mut rng)
            .into_iter()
            .map(|x| x * &scale)
            .collect();
        alphas.push(v.clone());
        betas.push(v);
    }

    let (left, right) = if spec.nonneg {
        (
            random_permutation(n, &mut rng),
            random_permutation(n, &mut rng),
        )
    } else {
        (
            RationalOrthogonal::random(n, &mut rng),
            RationalOrthogonal::random(n, &mut rng),
        )
    };
    let inst = PerturbationInstance::from_exact(
        spec.mode(),
        left.conjugate(&a),
        right.conjugate(&a),
        alphas.iter().map(|v| left.apply_transpose(v)).collect(),
        betas.iter().map(|v| right.apply_transpose(v)).collect(),
    )?;
    Ok(if spec.exact { inst } else { inst.into_float() })
}

/// Nonnegative positive instance in which `α_iᵀAᵗα_j = 0` for all `i ≠ j` and all `t`.
///
/// The coordinates are split into `m` consecutive groups, `A` is block diagonal along
/// the groups with nonnegative blocks, and `α_i` is supported on group `i`. `B` and the
/// `β_i` come from a random permutation. Requires `1 <= m <= n`.
pub fn gen_disjoint_support_instance(
    spec: &GenSpec,
) -> Result<PerturbationInstance, InstanceError> {
    spec.validate()?;
    if spec.m == 0 || spec.m > spec.n {
        return Err(InstanceError::Spec(
            "disjoint supports need 1 <= m <= n".into(),
        ));
    }
    let mut rng = spec.rng();
    let n = spec.n;
    let scale = rational_from_f64(spec.entry_scale)?;
    let group = |i: usize| i * spec.m / n;
    let mut a = RationalMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            if group(i) == group(j) {
                let x = rat(rng.random_range(0..=4i64), 1) * &scale;
                a.set(i, j, x.clone());
                a.set(j, i, x);
            }
        }
    }
    let alphas: Vec<RationalVector> = (0..spec.m)
        .map(|k| {
            (0..n)
                .map(|i| {
                    if group(i) == k {
                        rat(rng.random_range(1..=3i64), 1) * &scale
                    } else {
                        rat(0, 1)
                    }
                })
                .collect()
        })
        .collect();
    let q0 = random_permutation(n, &mut rng);
    let b = q0.conjugate(&a);
    let betas = alphas.iter().map(|v| q0.apply_transpose(v)).collect();
    let inst = PerturbationInstance::from_exact(Mode::Nonnegative, a, b, alphas, betas)?;
    Ok(if spec.exact { inst } else { inst.into_float() })
}

fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RationalOrthogonal {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    RationalOrthogonal::permutation(perm)
}

fn random_int_vector<R: Rng + ?Sized>(n: usize, nonneg: bool, rng: &mut R) -> RationalVector {
    (0..n)
        .map(|_| {
            let x = if nonneg {
                rng.random_range(0..=3i64)
            } else {
                rng.random_range(-3..=3i64)
            };
            rat(x, 1)
        })
        .collect()
}

/// Distinct integers for the clusters of a multiplicity profile.
fn distinct_eigenvalues<R: Rng + ?Sized>(count: usize, nonneg: bool, rng: &mut R) -> Vec<i64> {
    let span = 2 * count as i64 + 2;
    let (lo, width) = if nonneg {
        (0, span + 1)
    } else {
        (-span, 2 * span + 1)
    };
    let mut picked: Vec<i64> = index::sample(rng, width as usize, count)
        .into_iter()
        .map(|k| lo + k as i64)
        .collect();
    picked.sort_unstable();
    picked
}

fn profile_values<R: Rng + ?Sized>(mults: &[usize], nonneg: bool, rng: &mut R) -> Vec<i64> {
    let values = distinct_eigenvalues(mults.len(), nonneg, rng);
    mults
        .iter()
        .zip(&values)
        .flat_map(|(&k, &v)| std::iter::repeat_n(v, k))
        .collect()
}

fn base_matrix_exact<R: Rng + ?Sized>(spec: &GenSpec, rng: &mut R) -> RationalMatrix {
    let n = spec.n;
    match &spec.multiplicities {
        Some(mults) => {
            let diag: Vec<BigRational> = profile_values(mults, spec.nonneg, rng)
                .into_iter()
                .map(|v| rat(v, 1))
                .collect();
            let d = RationalMatrix::diagonal(&diag);
            let v = if spec.nonneg {
                random_permutation(n, rng)
            } else {
                RationalOrthogonal::random(n, rng)
            };
            v.conjugate(&d)
        }
        None => {
            let mut a = RationalMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    let x = if spec.nonneg {
                        rng.random_range(0..=4i64)
                    } else {
                        rng.random_range(-4..=4i64)
                    };
                    a.set(i, j, rat(x, 1));
                    a.set(j, i, rat(x, 1));
                }
            }
            a
        }
    }
}

fn base_matrix_float<R: Rng + ?Sized>(spec: &GenSpec, rng: &mut R) -> DMatrix<f64> {
    let n = spec.n;
    match &spec.multiplicities {
        Some(mults) => {
            let diag: Vec<f64> = profile_values(mults, spec.nonneg, rng)
                .into_iter()
                .map(|v| v as f64)
                .collect();
            let d = DMatrix::from_diagonal(&DVector::from_vec(diag));
            if spec.nonneg {
                let p = random_permutation(n, rng).to_f64();
                p.transpose() * d * p
            } else {
                let v = haar_orthogonal(n, rng).q;
                symmetrize(&v * d * v.transpose())
            }
        }
        None => {
            let g = DMatrix::from_fn(n, n, |_, _| {
                if spec.nonneg {
                    rng.random::<f64>()
                } else {
                    rng.sample::<f64, _>(StandardNormal)
                }
            });
            symmetrize(g)
        }
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}
