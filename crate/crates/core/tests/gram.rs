use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simsim_core::gram::{gram, gram_exact, gram_match, GramError, GramMatchOptions};
use simsim_core::instances::{gen_haar_orthogonal, RationalOrthogonal};
use simsim_core::numkernel::rvec;

/// `(V, W = Q₀V)` with `V` of the requested rank.
fn equal_gram_family() -> impl Strategy<Value = (Vec<DVector<f64>>, Vec<DVector<f64>>, usize)> {
    (1usize..=8, 1usize..=8)
        .prop_flat_map(|(d, m)| (Just(d), Just(m), 0..=d.min(m), any::<u64>()))
        .prop_flat_map(|(d, m, r, seed)| {
            (
                prop::collection::vec(-3.0f64..3.0, d * r),
                prop::collection::vec(-3.0f64..3.0, r * m),
                Just((d, m, r, seed)),
            )
        })
        .prop_map(|(basis, coeffs, (d, m, r, seed))| {
            let v = DMatrix::from_vec(d, r, basis) * DMatrix::from_vec(r, m, coeffs);
            let w = &gen_haar_orthogonal(d, seed).q * &v;
            let cols =
                |x: &DMatrix<f64>| x.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>();
            (cols(&v), cols(&w), r)
        })
}

fn scaled_options(vs: &[DVector<f64>]) -> GramMatchOptions {
    let scale = 1.0 + vs.iter().map(|v| v.norm_squared()).fold(0.0, f64::max);
    GramMatchOptions {
        gram_tol: 1e-8 * scale,
        ..GramMatchOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gram_match_meets_residuals((vs, ws, _rank) in equal_gram_family(), seed in any::<u64>()) {
        let d = vs[0].len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = gram_match(&vs, &ws, &scaled_options(&vs), &mut rng).unwrap();
        prop_assert_eq!(q.dim(), d);
        prop_assert!(q.orth_residual() <= 1e-10 * d as f64, "orth {}", q.orth_residual());
        for (v, w) in vs.iter().zip(&ws) {
            let err = (q.apply(v) - w).norm();
            prop_assert!(err <= 1e-9 * (1.0 + v.norm()), "map {}", err);
        }
    }

    #[test]
    fn full_rank_match_is_unique(
        d in 1usize..=6,
        extra in 0usize..3,
        entries in prop::collection::vec(-3.0f64..3.0, 54),
        seed in any::<u64>(),
        s1 in any::<u64>(),
        s2 in any::<u64>(),
    ) {
        let m = d + extra;
        let v = DMatrix::from_fn(d, m, |i, j| entries[i * 9 + j] + if i == j { 4.0 } else { 0.0 });
        let w = &gen_haar_orthogonal(d, seed).q * &v;
        let vs: Vec<_> = v.column_iter().map(|c| c.into_owned()).collect();
        let ws: Vec<_> = w.column_iter().map(|c| c.into_owned()).collect();
        let opts = scaled_options(&vs);
        let q1 = gram_match(&vs, &ws, &opts, &mut ChaCha8Rng::seed_from_u64(s1)).unwrap();
        let q2 = gram_match(&vs, &ws, &opts, &mut ChaCha8Rng::seed_from_u64(s2)).unwrap();
        prop_assert!((&q1.q - &q2.q).amax() <= 1e-8);
    }

    #[test]
    fn gram_invariant_under_orthogonal_maps(
        d in 1usize..=8,
        m in 1usize..=6,
        entries in prop::collection::vec(-3.0f64..3.0, 48),
        seed in any::<u64>(),
    ) {
        let vs: Vec<DVector<f64>> = (0..m)
            .map(|j| DVector::from_fn(d, |i, _| entries[j * 8 + i]))
            .collect();
        let q = gen_haar_orthogonal(d, seed);
        let qvs: Vec<_> = vs.iter().map(|v| q.apply(v)).collect();
        prop_assert!(gram(&vs).unwrap().max_deviation(&gram(&qvs).unwrap()) <= 1e-10 * 9.0 * d as f64);
    }

    #[test]
    fn exact_gram_invariant_under_rational_orthogonal(
        d in 1usize..=7,
        m in 1usize..=4,
        entries in prop::collection::vec(-5i64..=5, 28),
        seed in any::<u64>(),
    ) {
        let vs: Vec<_> = (0..m).map(|j| rvec(&entries[j * 7..j * 7 + d])).collect();
        let q = RationalOrthogonal::random(d, &mut ChaCha8Rng::seed_from_u64(seed));
        let qvs: Vec<_> = vs.iter().map(|v| q.apply_transpose(v)).collect();
        prop_assert_eq!(gram_exact(&vs).unwrap(), gram_exact(&qvs).unwrap());
    }
}

#[test]
fn unequal_grams_are_rejected() {
    let vs = vec![DVector::from_vec(vec![1.0, 0.0])];
    let ws = vec![DVector::from_vec(vec![2.0, 0.0])];
    let err = gram_match(
        &vs,
        &ws,
        &GramMatchOptions::default(),
        &mut ChaCha8Rng::seed_from_u64(0),
    );
    assert!(
        matches!(err, Err(GramError::GramMismatch { .. })),
        "{err:?}"
    );
}

#[test]
fn zero_family_gives_an_orthogonal_map() {
    let vs = vec![DVector::zeros(3); 2];
    let q = gram_match(
        &vs,
        &vs,
        &GramMatchOptions::default(),
        &mut ChaCha8Rng::seed_from_u64(1),
    )
    .unwrap();
    assert!(q.orth_residual() < 1e-12);
}

#[test]
fn mismatched_family_sizes_are_rejected() {
    let vs = vec![DVector::zeros(2)];
    let err = gram_match(
        &vs,
        &[],
        &GramMatchOptions::default(),
        &mut ChaCha8Rng::seed_from_u64(0),
    );
    assert!(matches!(err, Err(GramError::FamilySizeMismatch { .. })));
}
