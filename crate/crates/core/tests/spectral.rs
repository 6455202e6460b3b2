use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use simsim_core::instances::{
    gen_disjoint_support_instance, gen_haar_orthogonal, gen_positive_instance, GenSpec,
};
use simsim_core::numkernel::{
    charpoly_exact, coefficient_relative_error, coefficient_scales, eigh, RationalMatrix,
};
use simsim_core::spectral::{
    decompose, moments, project_vectors, spectral_moments, vandermonde_solve, wa_charpoly_rank2,
};
use simsim_core::Tolerances;

fn symmetric(n: usize, entries: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = entries[k];
            m[(j, i)] = entries[k];
            k += 1;
        }
    }
    m
}

/// `Qᵀ diag(d) Q` with entries of `d` drawn from a few integers so eigenvalues repeat.
fn repeated_spectrum(n: usize, picks: &[i32], seed: u64) -> DMatrix<f64> {
    let q = gen_haar_orthogonal(n, seed).q;
    let d = DMatrix::from_fn(n, n, |i, j| if i == j { f64::from(picks[i]) } else { 0.0 });
    let m = q.transpose() * d * &q;
    (&m + m.transpose()) * 0.5
}

fn matrix_strategy() -> impl Strategy<Value = DMatrix<f64>> {
    (1usize..=10).prop_flat_map(|n| {
        prop_oneof![
            prop::collection::vec(-2.0f64..2.0, n * (n + 1) / 2)
                .prop_map(move |e| symmetric(n, &e)),
            (prop::collection::vec(-2i32..=2, n), any::<u64>())
                .prop_map(move |(p, s)| repeated_spectrum(n, &p, s)),
        ]
    })
}

fn with_vectors(count: usize) -> impl Strategy<Value = (DMatrix<f64>, Vec<DVector<f64>>)> {
    matrix_strategy().prop_flat_map(move |a| {
        let n = a.nrows();
        let vecs = prop::collection::vec(
            prop::collection::vec(-2.0f64..2.0, n).prop_map(DVector::from_vec),
            count,
        );
        (Just(a), vecs)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_blocks_are_orthonormal_and_reconstruct(a in matrix_strategy()) {
        let tols = Tolerances::default();
        let d = decompose(&a, &tols).unwrap();
        let n = a.nrows() as f64;
        let scale = tols.eigh * n;
        let p = d.stacked();
        prop_assert!((p.transpose() * &p - DMatrix::identity(a.nrows(), a.nrows())).amax() <= scale * 10.0);
        prop_assert!((d.reconstruct() - &a).norm() <= scale * 10.0 * (1.0 + a.norm()));
        prop_assert_eq!(d.clustering.mults.iter().sum::<usize>(), a.nrows());
    }

    #[test]
    fn parseval_holds((a, vecs) in with_vectors(3)) {
        let d = decompose(&a, &Tolerances::default()).unwrap();
        let proj = project_vectors(&d, &vecs).unwrap();
        for (i, v) in vecs.iter().enumerate() {
            let total = proj.total_sq_norm(i);
            prop_assert!((total - v.norm_squared()).abs() <= 1e-9 * v.norm_squared().max(1e-300));
        }
    }

    #[test]
    fn moment_identity_absolute_at_moderate_scale((a, vecs) in with_vectors(2)) {
        let n = a.nrows() as f64;
        let a = a / (2.0 * n);
        let d = decompose(&a, &Tolerances::default()).unwrap();
        let s = d.cluster_count();
        let direct = moments(&a, &vecs[0], &vecs[1], s).unwrap();
        let spectral = spectral_moments(&d, &vecs[0], &vecs[1], s).unwrap();
        for (x, y) in direct.iter().zip(&spectral) {
            prop_assert!((x - y).abs() <= 1e-8, "{} vs {}", x, y);
        }
    }

    #[test]
    fn moment_identity_relative_to_magnitude((a, vecs) in with_vectors(2)) {
        let d = decompose(&a, &Tolerances::default()).unwrap();
        let s = d.cluster_count();
        let direct = moments(&a, &vecs[0], &vecs[1], s).unwrap();
        let spectral = spectral_moments(&d, &vecs[0], &vecs[1], s).unwrap();
        let proj = project_vectors(&d, &vecs).unwrap();
        for (t, (x, y)) in direct.iter().zip(&spectral).enumerate() {
            let size: f64 = (0..s)
                .map(|k| d.lambdas()[k].abs().powi(t as i32) * proj.norm(k, 0) * proj.norm(k, 1))
                .sum();
            prop_assert!((x - y).abs() <= 1e-8 * size.max(1.0), "t = {}: {} vs {}", t, x, y);
        }
    }

    #[test]
    fn rank_two_determinant_identity_per_coefficient(
        (a, u, v) in (1usize..=10).prop_flat_map(|n| (
            prop::collection::vec(-2.0f64..2.0, n * (n + 1) / 2).prop_map(move |e| symmetric(n, &e)),
            prop::collection::vec(-2.0f64..2.0, n).prop_map(DVector::from_vec),
            prop::collection::vec(-2.0f64..2.0, n).prop_map(DVector::from_vec),
        ))
    ) {
        let (wa, exact, roots) = rank_two_pair(&a, &u, &v);
        let err = coefficient_relative_error(&wa, &exact, &coefficient_scales(&roots));
        prop_assert!(err <= 1e-6, "coefficient error {}", err);
    }

    #[test]
    fn rank_two_determinant_identity_normwise((a, vecs) in with_vectors(2)) {
        let (wa, exact, roots) = rank_two_pair(&a, &vecs[0], &vecs[1]);
        let n = roots.len();
        let rho = 1.0 + roots.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let mut binom = 1.0;
        for k in 0..=n {
            let size = binom * rho.powi((n - k) as i32);
            prop_assert!((wa[k] - exact[k]).abs() <= 1e-6 * size, "x^{}: {} vs {}", k, wa[k], exact[k]);
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
    }
}

/// Resolvent-determinant coefficients, exact coefficients of the explicit matrix, and its
/// eigenvalues.
fn rank_two_pair(
    a: &DMatrix<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let wa = wa_charpoly_rank2(a, u, v, &Tolerances::default()).unwrap();
    let explicit = a + u * u.transpose() + v * v.transpose();
    let exact = charpoly_exact(&RationalMatrix::from_f64(&explicit).unwrap()).to_f64();
    let roots = eigh(&explicit, 1e-10).unwrap().eigenvalues;
    (wa.coeffs, exact, roots)
}

#[test]
fn vanishing_moments_force_zero_cluster_inner_products() {
    let tols = Tolerances::default();
    for seed in 0..30u64 {
        let n = 2 + (seed % 9) as usize;
        let m = 2.min(n);
        let inst = gen_disjoint_support_instance(&GenSpec::new(n, m, seed)).unwrap();
        let d = decompose(&inst.a, &tols).unwrap();
        let s = d.cluster_count();
        let mom = moments(&inst.a, &inst.alphas[0], &inst.alphas[1], s).unwrap();
        assert!(mom.iter().all(|x| x.abs() < 1e-9), "seed {seed}: {mom:?}");
        let proj = project_vectors(&d, &inst.alphas).unwrap();
        for k in 0..s {
            assert!(proj.inner(k, 0, 1).abs() <= 1e-7, "seed {seed} cluster {k}");
        }
        let solved = vandermonde_solve(d.lambdas(), &mom);
        if let Ok(x) = solved {
            assert!(x.iter().all(|c| c.abs() <= 1e-7));
        }
    }
}

#[test]
fn parseval_on_generated_instances() {
    let tols = Tolerances::default();
    for seed in 0..20u64 {
        let spec = GenSpec::new(2 + (seed % 10) as usize, 3, seed);
        let inst = gen_positive_instance(&spec).unwrap();
        for (mat, vecs) in [(&inst.a, &inst.alphas), (&inst.b, &inst.betas)] {
            let d = decompose(mat, &tols).unwrap();
            let proj = project_vectors(&d, vecs).unwrap();
            for (i, v) in vecs.iter().enumerate() {
                assert!(
                    (proj.total_sq_norm(i) - v.norm_squared()).abs() <= 1e-9 * v.norm_squared()
                );
            }
        }
    }
}

#[test]
fn nonnegative_decomposition_of_nonnegative_data_keeps_moments_nonnegative() {
    let tols = Tolerances::default();
    for seed in 0..20u64 {
        let inst = gen_positive_instance(&GenSpec::new(5, 2, seed).nonnegative()).unwrap();
        let d = decompose(&inst.a, &tols).unwrap();
        let mom = moments(&inst.a, &inst.alphas[0], &inst.alphas[1], d.cluster_count()).unwrap();
        assert!(mom.iter().all(|x| *x >= 0.0));
    }
}
