//! Property checks that cut across modules.

use proptest::prelude::*;
use qlb_core::certifier::certify_lower_bound;
use qlb_core::moments::trace_moment;
use qlb_core::vandam::choose_t;
use qlb_core::{BooleanFunction, CertifyOptions, NormOptions, TruncatedOperator};

fn norm(f: &BooleanFunction, t: u32) -> f64 {
    TruncatedOperator::dense(f, t)
        .unwrap()
        .spectral_norm(&NormOptions::default())
        .unwrap()
        .value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dense_operator_is_symmetric_contraction(n in 2u32..=8, seed: u64, t_frac in 0.0f64..=1.0) {
        let t = (f64::from(n) * t_frac) as u32;
        let f = BooleanFunction::sample_uniform(n, seed).unwrap();
        let op = TruncatedOperator::dense(&f, t).unwrap();
        let b = op.dim();
        let m = op.dense_matrix().unwrap();
        for j in 0..b {
            for l in 0..b {
                prop_assert_eq!(m[j * b + l], m[l * b + j]);
                prop_assert!(m[j * b + l].abs() <= 1.0);
            }
        }
        let v = op.spectral_norm(&NormOptions::default()).unwrap().value;
        prop_assert!(v <= 1.0 + 1e-8);
    }

    #[test]
    fn norm_is_monotone_and_negation_invariant(n in 2u32..=8, seed: u64) {
        let f = BooleanFunction::sample_uniform(n, seed).unwrap();
        let g = f.negate();
        let mut prev = 0.0;
        for t in 0..=n {
            let a = norm(&f, t);
            prop_assert!(a >= prev - 1e-8);
            prop_assert!((a - norm(&g, t)).abs() <= 1e-9);
            prev = a;
        }
        prop_assert!((prev - 1.0).abs() <= 1e-8);
        let canon = f.canonical_sign();
        prop_assert!(canon.sum() >= 0);
        prop_assert_eq!(canon.canonical_sign(), canon.clone());
        prop_assert!((norm(&canon, n / 2) - norm(&f, n / 2)).abs() <= 1e-9);
    }

    #[test]
    fn matrix_free_apply_matches_dense(n in 2u32..=9, seed: u64, t_frac in 0.0f64..=1.0) {
        let t = (f64::from(n) * t_frac) as u32;
        let f = BooleanFunction::sample_uniform(n, seed).unwrap();
        let dense = TruncatedOperator::dense(&f, t).unwrap();
        let free = TruncatedOperator::matrix_free(&f, t).unwrap();
        let v: Vec<f64> = (0..dense.dim()).map(|i| ((i * 37 + 11) % 17) as f64 - 8.0).collect();
        let a = dense.apply(&v).unwrap();
        let b = free.apply(&v).unwrap();
        let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        let diff = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        prop_assert!(diff <= 1e-9 * scale.max(1.0));
    }

    #[test]
    fn trace_sandwich(n in 3u32..=8, seed: u64, k in 1u32..=3) {
        let f = BooleanFunction::sample_uniform(n, seed).unwrap();
        let t = n / 2;
        let tr = trace_moment(&f, t, k).unwrap();
        let nm = norm(&f, t).powi(2 * k as i32);
        prop_assert!(tr.value >= nm * (1.0 - 1e-6));
        prop_assert!(tr.value <= tr.b as f64 * nm * (1.0 + 1e-6));
    }

    #[test]
    fn certificate_is_sound(n in 3u32..=9, seed: u64, loose in proptest::bool::ANY) {
        let eps = if loose { 1.0 / 3.0 } else { 0.1 };
        let f = BooleanFunction::sample_uniform(n, seed).unwrap();
        let c = certify_lower_bound(&f, "u", eps, &CertifyOptions::default()).unwrap();
        prop_assert!(c.lower_bound_t <= choose_t(n, eps).unwrap().exact);
        for w in c.evidence.windows(2) {
            prop_assert!(w[1].norm >= w[0].norm - 1e-8);
        }
    }
}

#[test]
fn parity_certificates_hit_half() {
    for n in 2..=12u32 {
        let f = BooleanFunction::from_family(qlb_core::Family::Parity, n).unwrap();
        let c = certify_lower_bound(&f, "parity", 0.1, &CertifyOptions::default()).unwrap();
        assert_eq!(c.lower_bound_t, n.div_ceil(2), "n={n}");
        assert_eq!(c.status, qlb_core::CertificateStatus::Certified);
    }
}

#[test]
fn full_truncation_is_an_involution() {
    for seed in 0..5u64 {
        let f = BooleanFunction::sample_uniform(7, seed).unwrap();
        let op = TruncatedOperator::dense(&f, 7).unwrap();
        let b = op.dim();
        let m = op.dense_matrix().unwrap();
        for i in 0..b {
            for j in 0..b {
                let sq: f64 = (0..b).map(|k| m[i * b + k] * m[k * b + j]).sum();
                assert!((sq - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
            }
        }
    }
}
