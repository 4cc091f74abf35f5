mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use psdcert::deflation::dplus_exact;
use psdcert::generators::gap_family;
use psdcert::mtx::{format_matrix_market, parse_matrix_market};
use psdcert::{
    corollary1_bound, drop_ritz_pairs, matrix_from_spectrum, orthonormal_complement, project_approx_negative,
    project_approx_positive, project_exact, rayleigh_ritz, split_by_sign, theorem1_bound, CertificateRecord,
    CertOptions, DPlusMode, LanczosConfig, ProjectionCertificate, RitzBlock, Segment, Side, SpectrumSpec,
    SymmetricOperator, Tolerances,
};
use rand::Rng;

fn config() -> ProptestConfig {
    // PROPTEST_CASES raises the count for longer soak runs
    let cases = std::env::var("PROPTEST_CASES").ok().and_then(|c| c.parse().ok()).unwrap_or(64);
    ProptestConfig { cases, ..ProptestConfig::default() }
}

/// A random symmetric matrix and a Rayleigh-Ritz block on a random or
/// near-invariant subspace, positive pairs only.
fn positive_block(seed: u64, n: usize, k: usize) -> (DMatrix<f64>, SymmetricOperator, RitzBlock) {
    let mut rng = common::rng(seed);
    let a = common::random_symmetric(n, &mut rng);
    let op = SymmetricOperator::dense(a.clone()).unwrap();
    let q = common::random_basis(&a, k.min(n - 1), true, &mut rng);
    let rb = rayleigh_ritz(&op, &q, &Tolerances::default()).unwrap();
    (a, op, split_by_sign(&rb, Side::Positive))
}

fn dense_err(approx: &DMatrix<f64>, a: &DMatrix<f64>) -> f64 {
    (approx - common::pplus(a)).norm()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn complement_completes_an_orthogonal_matrix(seed in any::<u64>(), n in 1usize..40, k in 0usize..40) {
        let k = k % (n + 1);
        let mut rng = common::rng(seed);
        let v = common::random_orthonormal(n, k, &mut rng);
        let vp = orthonormal_complement(&v, seed, 1e-10).unwrap();
        let mut w = DMatrix::zeros(n, n);
        w.columns_mut(0, k).copy_from(&v);
        w.columns_mut(k, n - k).copy_from(&vp);
        prop_assert!((w.transpose() * &w - DMatrix::identity(n, n)).norm() <= 1e-10);
    }

    #[test]
    fn frobenius_norm_splits_over_blocks(seed in any::<u64>(), n in 2usize..40, k in 1usize..40) {
        let k = k % n;
        let mut rng = common::rng(seed);
        let a = common::random_symmetric(n, &mut rng);
        let v = common::random_orthonormal(n, k, &mut rng);
        let vp = orthonormal_complement(&v, seed, 1e-10).unwrap();
        let h = v.transpose() * &a * &v;
        let c = vp.transpose() * &a * &v;
        let d = vp.transpose() * &a * &vp;
        let total = h.norm_squared() + 2.0 * c.norm_squared() + d.norm_squared();
        prop_assert!((total - a.norm_squared()).abs() <= 1e-10 * a.norm_squared().max(1.0));
    }

    #[test]
    fn residual_frob_is_root_sum_of_column_norms(seed in any::<u64>(), n in 2usize..40, k in 1usize..10) {
        let (_, _, rb) = positive_block(seed, n, k);
        let sum: f64 = rb.residual_norms().iter().map(|r| r * r).sum();
        prop_assert!((rb.residual_frob() - sum.sqrt()).abs() <= 1e-12 * (1.0 + sum.sqrt()));
        prop_assert!((rb.residual_frob() - rb.residual().norm()).abs() <= 1e-12 * (1.0 + sum.sqrt()));
    }

    #[test]
    fn implicit_operator_is_symmetric(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = common::rng(seed);
        let a = common::random_symmetric(n, &mut rng);
        let m = a.clone();
        let op = SymmetricOperator::implicit(n, move |x: &DVector<f64>| &m * x, None).unwrap();
        let x = common::gaussian(n, 1, &mut rng).column(0).into_owned();
        let y = common::gaussian(n, 1, &mut rng).column(0).into_owned();
        let lhs = x.dot(&op.apply(&y));
        let rhs = op.apply(&x).dot(&y);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + a.norm() * x.norm() * y.norm()));
    }

    #[test]
    fn certificate_bounds_the_exact_error(seed in any::<u64>(), n in 3usize..40, k in 1usize..12) {
        let (a, op, rb) = positive_block(seed, n, k);
        let cert = ProjectionCertificate::for_positive_block(&op, &rb, dplus_exact(&a, rb.basis())).unwrap();
        let err = dense_err(&rb.assemble(), &a);
        prop_assert!(err <= cert.bound_value + 1e-8 * a.norm(), "error {} bound {}", err, cert.bound_value);
    }

    #[test]
    fn bound_formulas_are_monotone(r in 0.0f64..10.0, c in 0.0f64..10.0, d in 0.0f64..10.0, dr in 0.0f64..1.0) {
        prop_assert!(theorem1_bound(r + dr, c, d).unwrap() >= theorem1_bound(r, c, d).unwrap());
        prop_assert!(theorem1_bound(r, c + dr, d).unwrap() >= theorem1_bound(r, c, d).unwrap());
        prop_assert!(theorem1_bound(r, c, d + dr).unwrap() >= theorem1_bound(r, c, d).unwrap());
        prop_assert!(corollary1_bound(r + dr, d).unwrap() >= corollary1_bound(r, d).unwrap());
        // the cross term never exceeds the residual
        prop_assert!(theorem1_bound(r, r, d).unwrap() <= corollary1_bound(r, d).unwrap() * (1.0 + 1e-15));
    }

    #[test]
    fn dropping_pairs_never_raises_the_bound(seed in any::<u64>(), n in 3usize..40, k in 1usize..12) {
        let (a, _, rb) = positive_block(seed, n, k);
        let before = dplus_exact(&a, rb.basis());
        let bound_before = corollary1_bound(rb.residual_frob(), before.frob).unwrap();
        let (kept, _) = drop_ritz_pairs(&rb, before.lambda_max);
        let after = dplus_exact(&a, kept.basis());
        let bound_after = corollary1_bound(kept.residual_frob(), after.frob).unwrap();
        prop_assert!(bound_after <= bound_before * (1.0 + 1e-10) + 1e-12 * a.norm(),
            "before {} after {}", bound_before, bound_after);
    }

    #[test]
    fn exact_projection_is_psd_idempotent_and_complementary(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = common::rng(seed);
        let a = common::random_symmetric(n, &mut rng);
        let tol = Tolerances::default();
        let (p, _) = project_exact(&SymmetricOperator::dense(a.clone()).unwrap(), &tol).unwrap();
        let (pp, _) = project_exact(&SymmetricOperator::dense(p.clone()).unwrap(), &tol).unwrap();
        let scale = common::spectral(&a).max(1.0);
        prop_assert!(common::eigenvalues(&p).min() >= -1e-12 * scale);
        prop_assert!((&pp - &p).norm() <= 1e-10 * scale);
        prop_assert!(p.dot(&(&a - &p)).abs() <= 1e-10 * scale * scale);
        prop_assert!((&p - common::pplus(&a)).norm() <= 1e-10 * scale);
    }

    #[test]
    fn projection_is_nonexpansive(seed in any::<u64>(), n in 1usize..30, t in -8.0f64..1.0) {
        let mut rng = common::rng(seed);
        let a = common::random_symmetric(n, &mut rng);
        let b = &a + common::random_symmetric(n, &mut rng) * 10f64.powf(t);
        let tol = Tolerances::default();
        let (pa, _) = project_exact(&SymmetricOperator::dense(a.clone()).unwrap(), &tol).unwrap();
        let (pb, _) = project_exact(&SymmetricOperator::dense(b.clone()).unwrap(), &tol).unwrap();
        let diff = &a - &b;
        let slack = 1e-10 * a.norm().max(b.norm()).max(1.0);
        prop_assert!((&pa - &pb).norm() <= diff.norm() + slack);
        prop_assert!(common::spectral(&(&pa - &pb)) <= std::f64::consts::SQRT_2 * common::spectral(&diff) + slack);
    }

    #[test]
    fn negative_side_mirrors_positive_side(seed in any::<u64>(), n in 2usize..30) {
        let mut rng = common::rng(seed);
        let a = common::random_symmetric(n, &mut rng);
        let op = SymmetricOperator::dense(a.clone()).unwrap();
        let cfg = LanczosConfig::new(n).with_seed(seed);
        let opts = CertOptions::default().with_dplus(DPlusMode::Oracle);
        let neg = project_approx_negative(&op, &cfg, &opts).unwrap();
        let pos_of_neg = project_approx_positive(&op.negated(), &cfg, &opts).unwrap();
        let scale = a.norm().max(1.0);
        prop_assert!((neg.to_dense() - (&a + pos_of_neg.to_dense())).norm() <= 1e-10 * scale);
        let (b1, b2) = (neg.certificate().bound_value, pos_of_neg.certificate().bound_value);
        prop_assert!((b1 - b2).abs() <= 1e-8 * scale, "{} vs {}", b1, b2);
        let (p, _) = project_exact(&op, &Tolerances::default()).unwrap();
        let (q, _) = project_exact(&op.negated(), &Tolerances::default()).unwrap();
        prop_assert!((&p - &q - &a).norm() <= 1e-10 * scale);
    }

    #[test]
    fn generated_matrices_have_the_requested_spectrum(seed in any::<u64>(), values in prop::collection::vec(-5.0f64..5.0, 1..30)) {
        let spec = SpectrumSpec::new(vec![Segment::Explicit(values.clone())], seed);
        let (op, exact) = matrix_from_spectrum(&spec).unwrap();
        let (op2, _) = matrix_from_spectrum(&spec).unwrap();
        let mut sorted = values.clone();
        sorted.sort_by(|x, y| y.total_cmp(x));
        let got = common::eigenvalues(&op.to_dense());
        for (g, s) in got.iter().zip(&sorted) {
            prop_assert!((g - s).abs() <= 1e-12 * 10.0);
        }
        for (e, s) in exact.values().iter().zip(&sorted) {
            prop_assert_eq!(*e, *s);
        }
        prop_assert_eq!(op.to_dense(), op2.to_dense());
    }

    #[test]
    fn matrix_market_round_trips(seed in any::<u64>(), r in 1usize..12, c in 1usize..12) {
        let mut rng = common::rng(seed);
        let m = DMatrix::from_fn(r, c, |_, _| {
            let x: f64 = rng.random_range(-1.0..1.0);
            x * 10f64.powi(rng.random_range(-300..300))
        });
        let parsed = parse_matrix_market(&format_matrix_market(&m)).unwrap();
        prop_assert_eq!(parsed, m);
    }

    #[test]
    fn certificate_records_revalidate(seed in any::<u64>(), n in 3usize..30, k in 1usize..10) {
        let (a, op, rb) = positive_block(seed, n, k);
        let cert = ProjectionCertificate::for_positive_block(&op, &rb, dplus_exact(&a, rb.basis())).unwrap();
        let line = serde_json::to_string(&cert.to_record(1.0)).unwrap();
        let record: CertificateRecord = serde_json::from_str(&line).unwrap();
        prop_assert!(record.revalidate(1e-12).unwrap());
    }
}

#[test]
fn gap_family_is_deterministic_per_seed() {
    let (a, _) = matrix_from_spectrum(&gap_family(1e-3, 60, 5).unwrap()).unwrap();
    let (b, _) = matrix_from_spectrum(&gap_family(1e-3, 60, 5).unwrap()).unwrap();
    let (c, _) = matrix_from_spectrum(&gap_family(1e-3, 60, 6).unwrap()).unwrap();
    assert_eq!(a.to_dense(), b.to_dense());
    assert_ne!(a.to_dense(), c.to_dense());
}
