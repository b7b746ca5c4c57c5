//! Per-function quantum query lower bounds.
//!
//! If a `T`-query algorithm computes `f` (normalized so `Σ_x f(x) ≥ 0`) with
//! error at most `eps`, then `‖F̂_T‖∞ ≥ 1/2 − eps`. Read the other way, every
//! `T` with `‖F̂_T‖∞ < 1/2 − eps` is refuted, and the first `T` that is not
//! refuted is a lower bound on `Q_eps(f)`. The norm grows with `T`, so a
//! scan from `T = 0` can stop at the first non-refuted value.
//!
//! A refutation is only labeled certified when its norm came from a dense
//! eigendecomposition. Power iteration under-estimates the norm, which is
//! harmless when it shows a `T` is *not* refuted but not when it refutes.

use crate::boolfn::{BooleanFunction, Family};
use crate::error::{invalid, Result};
use crate::operator::{NormMethod, NormOptions, OperatorMode, TruncatedFourierOperator, DENSE_LIMIT};
use crate::seed;
use crate::transforms::{binomial_sum, entropy_exponent};
use crate::vandam::choose_t;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Seed of the power-iteration start vector.
    pub seed: u64,
    /// Largest `B` evaluated densely.
    pub dense_limit: usize,
    /// Above this `B`, a power-iteration estimate is tried first and the
    /// dense solve is skipped when the estimate already clears the threshold.
    pub precheck_above: usize,
    /// Force one representation for every `T`.
    pub mode: Option<OperatorMode>,
    pub binary_search: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
            seed: 0,
            dense_limit: DENSE_LIMIT,
            precheck_above: 512,
            mode: None,
            binary_search: false,
        }
    }
}

impl CertifyOptions {
    fn norm_options(&self, t: u32) -> NormOptions {
        NormOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            seed: seed::child_seed(self.seed, u64::from(t)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateStatus {
    Certified,
    Empirical,
}

impl CertificateStatus {
    pub fn name(self) -> &'static str {
        match self {
            CertificateStatus::Certified => "certified",
            CertificateStatus::Empirical => "empirical",
        }
    }
}

/// Norm evaluation at one truncation level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evidence {
    pub t: u32,
    pub b: u128,
    pub norm: f64,
    pub method: NormMethod,
    pub converged: bool,
    pub residual: f64,
    pub refuted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedBound {
    pub descriptor: String,
    pub n: u32,
    pub eps: f64,
    /// `1/2 − eps`.
    pub threshold: f64,
    pub lower_bound_t: u32,
    pub evidence: Vec<Evidence>,
    pub status: CertificateStatus,
    /// `B(n, lower_bound_t)`.
    pub b_at_bound: u128,
    /// `log2 B(n, lower_bound_t)`.
    pub log2_b_at_bound: f64,
    /// `n · H(lower_bound_t / n)`, the exponent of the entropy bound on `B`.
    pub entropy_exponent_at_bound: f64,
    /// Universal upper bound from oracle interrogation at the same `eps`.
    pub upper_bound_t: u32,
}

fn evaluate(f: &BooleanFunction, t: u32, threshold: f64, opts: &CertifyOptions) -> Result<Evidence> {
    let b = binomial_sum(f.n(), t)?;
    let norm_opts = opts.norm_options(t);
    let dense_ok = b <= opts.dense_limit.min(DENSE_LIMIT) as u128;
    let use_dense = match opts.mode {
        Some(OperatorMode::Dense) => true,
        Some(OperatorMode::MatrixFree) => false,
        None => dense_ok,
    };
    let record = |est: crate::operator::NormEstimate<f64>| {
        let guard = opts.tol.max(est.residual);
        Evidence {
            t,
            b,
            norm: est.value,
            method: est.method,
            converged: est.converged,
            residual: est.residual,
            refuted: est.value + guard < threshold,
        }
    };
    if use_dense {
        if opts.mode.is_none() && b > opts.precheck_above as u128 {
            let est = TruncatedFourierOperator::<f64>::matrix_free(f, t)?.power_iteration(&norm_opts)?;
            let ev = record(est);
            if !ev.refuted {
                return Ok(ev);
            }
        }
        let est = TruncatedFourierOperator::<f64>::dense(f, t)?.spectral_norm(&norm_opts)?;
        Ok(record(est))
    } else {
        let est = TruncatedFourierOperator::<f64>::matrix_free(f, t)?.spectral_norm(&norm_opts)?;
        Ok(record(est))
    }
}

/// Lower bound on `Q_eps(f)` from the norm threshold, for `0 < eps < 1/2`.
pub fn certify_lower_bound(
    f: &BooleanFunction,
    descriptor: &str,
    eps: f64,
    opts: &CertifyOptions,
) -> Result<CertifiedBound> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    if !(opts.tol > 0.0) {
        return Err(invalid(format!("tol must be positive, got {}", opts.tol)));
    }
    let n = f.n();
    let threshold = 0.5 - eps;
    let g = f.canonical_sign();
    let mut evidence = Vec::new();

    let lower_bound_t = if opts.binary_search {
        // smallest T in [0, n] that is not refuted; T = n never is (norm 1)
        let (mut lo, mut hi) = (0u32, n);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let ev = evaluate(&g, mid, threshold, opts)?;
            evidence.push(ev);
            if ev.refuted {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        evidence.sort_by_key(|e| e.t);
        lo
    } else {
        let mut stop = n;
        for t in 0..=n {
            let ev = evaluate(&g, t, threshold, opts)?;
            evidence.push(ev);
            if !ev.refuted {
                stop = t;
                break;
            }
        }
        stop
    };

    let all_converged = evidence.iter().all(|e| e.converged);
    let refutations_dense = evidence
        .iter()
        .filter(|e| e.refuted)
        .all(|e| e.method == NormMethod::DenseEigen);
    let status = if all_converged && refutations_dense {
        CertificateStatus::Certified
    } else {
        CertificateStatus::Empirical
    };
    let b_at_bound = binomial_sum(n, lower_bound_t)?;
    Ok(CertifiedBound {
        descriptor: descriptor.to_string(),
        n,
        eps,
        threshold,
        lower_bound_t,
        evidence,
        status,
        b_at_bound,
        log2_b_at_bound: (b_at_bound as f64).log2(),
        entropy_exponent_at_bound: entropy_exponent(n, lower_bound_t)?,
        upper_bound_t: choose_t(n, eps)?.exact,
    })
}

/// Function used for trial `index` of a sweep: the injected family for
/// trial 0 when one is given, otherwise a uniform sample with seed
/// `child_seed(seed, index)`.
pub fn sweep_function(
    n: u32,
    seed: u64,
    index: u64,
    inject: Option<Family>,
) -> Result<(BooleanFunction, String, u64)> {
    let trial_seed = seed::child_seed(seed, index);
    match inject {
        Some(fam) if index == 0 => Ok((BooleanFunction::from_family(fam, n)?, fam.name().to_string(), trial_seed)),
        _ => Ok((BooleanFunction::sample_uniform(n, trial_seed)?, "uniform".to_string(), trial_seed)),
    }
}

/// One sweep trial; the power-iteration seed is the trial seed.
pub fn certify_trial(
    n: u32,
    eps: f64,
    seed: u64,
    index: u64,
    inject: Option<Family>,
    opts: &CertifyOptions,
) -> Result<CertifiedBound> {
    let (f, descriptor, trial_seed) = sweep_function(n, seed, index, inject)?;
    certify_lower_bound(&f, &descriptor, eps, &CertifyOptions { seed: trial_seed, ..*opts })
}

/// Sequential sweep over `trials` functions. Failed trials are kept as
/// errors in place.
pub fn certify_random_sweep(
    n: u32,
    eps: f64,
    trials: u64,
    seed: u64,
    inject: Option<Family>,
    opts: &CertifyOptions,
) -> Result<(Vec<Result<CertifiedBound>>, SweepSummary)> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let results: Vec<_> = (0..trials)
        .map(|i| certify_trial(n, eps, seed, i, inject, opts))
        .collect();
    let ok: Vec<&CertifiedBound> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let summary = SweepSummary::from_bounds(n, &ok, results.len() - ok.len());
    Ok((results, summary))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub n: u32,
    pub completed: usize,
    pub failed: usize,
    pub certified: usize,
    pub min: u32,
    pub median: f64,
    pub max: u32,
    /// Fraction of completed trials with `lower_bound_t ≥ ⌊n/4⌋`.
    pub fraction_at_least_quarter: f64,
}

impl SweepSummary {
    pub fn from_bounds(n: u32, bounds: &[&CertifiedBound], failed: usize) -> Self {
        let mut values: Vec<u32> = bounds.iter().map(|b| b.lower_bound_t).collect();
        values.sort_unstable();
        let completed = values.len();
        let median = match completed {
            0 => f64::NAN,
            c if c % 2 == 1 => f64::from(values[c / 2]),
            c => (f64::from(values[c / 2 - 1]) + f64::from(values[c / 2])) / 2.0,
        };
        let quarter = n / 4;
        Self {
            n,
            completed,
            failed,
            certified: bounds.iter().filter(|b| b.status == CertificateStatus::Certified).count(),
            min: values.first().copied().unwrap_or(0),
            median,
            max: values.last().copied().unwrap_or(0),
            fraction_at_least_quarter: if completed == 0 {
                f64::NAN
            } else {
                values.iter().filter(|&&v| v >= quarter).count() as f64 / completed as f64
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(f: Family, n: u32) -> BooleanFunction {
        BooleanFunction::from_family(f, n).unwrap()
    }

    #[test]
    fn constant_has_trivial_bound() {
        let c = certify_lower_bound(&fam(Family::ConstantPlus, 5), "c", 0.1, &CertifyOptions::default()).unwrap();
        assert_eq!(c.lower_bound_t, 0);
        assert_eq!(c.evidence.len(), 1);
        assert_eq!(c.evidence[0].norm, 1.0);
        assert_eq!(c.status, CertificateStatus::Certified);
    }

    #[test]
    fn parity_six() {
        let c = certify_lower_bound(&fam(Family::Parity, 6), "parity", 0.1, &CertifyOptions::default()).unwrap();
        assert_eq!(c.lower_bound_t, 3);
        assert_eq!(c.status, CertificateStatus::Certified);
        let norms: Vec<f64> = c.evidence.iter().map(|e| e.norm).collect();
        assert_eq!(norms.len(), 4);
        assert!(norms[..3].iter().all(|&v| v.abs() < 1e-9));
        assert!((norms[3] - 1.0).abs() < 1e-9);
        assert_eq!(c.b_at_bound, 42);
        assert_eq!(c.upper_bound_t, choose_t(6, 0.1).unwrap().exact);
    }

    #[test]
    fn or_is_weak() {
        let c = certify_lower_bound(&fam(Family::Or, 4), "or", 0.1, &CertifyOptions::default()).unwrap();
        assert_eq!(c.lower_bound_t, 0);
        assert_eq!(c.evidence[0].norm, 0.875);
    }

    #[test]
    fn rejects_eps_at_half() {
        let f = fam(Family::Parity, 3);
        assert!(certify_lower_bound(&f, "p", 0.5, &CertifyOptions::default()).is_err());
        assert!(certify_lower_bound(&f, "p", 0.0, &CertifyOptions::default()).is_err());
    }

    #[test]
    fn matrix_free_refutations_are_empirical() {
        let opts = CertifyOptions {
            mode: Some(OperatorMode::MatrixFree),
            ..Default::default()
        };
        let c = certify_lower_bound(&fam(Family::Parity, 6), "parity", 0.1, &opts).unwrap();
        assert_eq!(c.lower_bound_t, 3);
        assert_eq!(c.status, CertificateStatus::Empirical);
    }

    #[test]
    fn binary_search_agrees_with_scan() {
        for i in 0..10u64 {
            let f = BooleanFunction::sample_uniform(9, i).unwrap();
            let scan = certify_lower_bound(&f, "u", 0.1, &CertifyOptions::default()).unwrap();
            let bin = certify_lower_bound(&f, "u", 0.1, &CertifyOptions { binary_search: true, ..Default::default() }).unwrap();
            assert_eq!(scan.lower_bound_t, bin.lower_bound_t);
        }
        let p = certify_lower_bound(&fam(Family::Parity, 9), "p", 0.1, &CertifyOptions { binary_search: true, ..Default::default() }).unwrap();
        assert_eq!(p.lower_bound_t, 5);
    }

    #[test]
    fn negation_and_eps_monotonicity() {
        for i in 0..10u64 {
            let f = BooleanFunction::sample_uniform(8, 100 + i).unwrap();
            let opts = CertifyOptions::default();
            let a = certify_lower_bound(&f, "f", 0.1, &opts).unwrap();
            let b = certify_lower_bound(&f.negate(), "-f", 0.1, &opts).unwrap();
            assert_eq!(a.lower_bound_t, b.lower_bound_t);
            let looser = certify_lower_bound(&f, "f", 1.0 / 3.0, &opts).unwrap();
            assert!(looser.lower_bound_t <= a.lower_bound_t);
            for w in a.evidence.windows(2) {
                assert!(w[1].norm >= w[0].norm - 1e-8);
            }
        }
    }

    #[test]
    fn sweep_is_reproducible_and_sound() {
        let opts = CertifyOptions::default();
        let (a, sa) = certify_random_sweep(8, 1.0 / 3.0, 20, 7, Some(Family::Parity), &opts).unwrap();
        let (b, sb) = certify_random_sweep(8, 1.0 / 3.0, 20, 7, Some(Family::Parity), &opts).unwrap();
        assert_eq!(sa, sb);
        let upper = choose_t(8, 1.0 / 3.0).unwrap().exact;
        for (x, y) in a.iter().zip(&b) {
            let (x, y) = (x.as_ref().unwrap(), y.as_ref().unwrap());
            assert_eq!(x, y);
            assert!(x.lower_bound_t <= upper);
        }
        assert_eq!(a[0].as_ref().unwrap().descriptor, "parity");
        assert_eq!(a[0].as_ref().unwrap().lower_bound_t, 4);
        assert_eq!(sa.completed, 20);
        assert!(sa.min <= sa.max);
    }
}
