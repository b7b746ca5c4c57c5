//! Oracle interrogation by exact state-vector simulation.
//!
//! The algorithm prepares the uniform superposition over strings of weight
//! at most `T`, applies the phase `(-1)^{x·y}` (which costs `T` queries on
//! that support) and finishes with a Hadamard transform. The amplitude at
//! `|x⟩` is then `√(B / 2^n)` for every `x`, so the algorithm recovers `x`
//! with probability `B / 2^n`.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::seed;
use crate::transforms::{binomial_sum, dot_is_odd, weight, Amplitudes};

/// Largest `n` simulated (a `2^24`-entry state vector).
pub const MAX_SIMULATED_BITS: u32 = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct InterrogationOutcome {
    pub n: u32,
    pub t: u32,
    pub target: usize,
    /// Probability that the final measurement returns `target`.
    pub success_probability: f64,
    /// Queries spent by the phase oracle.
    pub queries: u32,
    pub shots: u64,
    /// Measured outcome index to count; empty for exact runs.
    pub counts: BTreeMap<usize, u64>,
}

impl InterrogationOutcome {
    /// Fraction of shots that returned the target.
    pub fn recovered_fraction(&self) -> Option<f64> {
        if self.shots == 0 {
            return None;
        }
        Some(*self.counts.get(&self.target).unwrap_or(&0) as f64 / self.shots as f64)
    }
}

fn check(n: u32, t: u32, x: usize) -> Result<()> {
    if n == 0 || n > MAX_SIMULATED_BITS {
        return Err(invalid(format!("simulation supports 1 <= n <= {MAX_SIMULATED_BITS}, got {n}")));
    }
    if t > n {
        return Err(invalid(format!("T = {t} exceeds n = {n}")));
    }
    if x >> n != 0 {
        return Err(invalid(format!("input {x} has more than {n} bits")));
    }
    Ok(())
}

/// Final state after the three steps.
pub fn final_state<S: Scalar>(n: u32, t: u32, x: usize) -> Result<Amplitudes<S>> {
    check(n, t, x)?;
    let b = binomial_sum(n, t)? as f64;
    let amp = S::one() / S::of(b).sqrt();
    let mut state = Amplitudes::<S>::zeros(n)?;
    for (y, a) in state.as_mut_slice().iter_mut().enumerate() {
        if weight(y) <= t {
            *a = if dot_is_odd(x, y) { -amp } else { amp };
        }
    }
    state.hadamard();
    Ok(state)
}

pub fn simulate_exact(n: u32, t: u32, x: usize) -> Result<InterrogationOutcome> {
    let state = final_state::<f64>(n, t, x)?;
    let amp = state.as_slice()[x];
    Ok(InterrogationOutcome {
        n,
        t,
        target: x,
        success_probability: amp * amp,
        queries: t,
        shots: 0,
        counts: BTreeMap::new(),
    })
}

/// Draws `shots` measurement outcomes from the exact final distribution.
pub fn simulate_sampled(n: u32, t: u32, x: usize, shots: u64, seed: u64) -> Result<InterrogationOutcome> {
    if shots == 0 {
        return Err(invalid("shots must be at least 1"));
    }
    let state = final_state::<f64>(n, t, x)?;
    let probs: Vec<f64> = state.as_slice().iter().map(|a| a * a).collect();
    let dist = WeightedIndex::new(&probs).map_err(|e| invalid(format!("bad distribution: {e}")))?;
    let mut rng = seed::rng(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        *counts.entry(dist.sample(&mut rng)).or_insert(0) += 1;
    }
    Ok(InterrogationOutcome {
        n,
        t,
        target: x,
        success_probability: probs[x],
        queries: t,
        shots,
        counts,
    })
}

/// `B(n, T) / 2^n`.
pub fn success_probability_closed_form(n: u32, t: u32) -> Result<f64> {
    if n > 64 {
        return Err(invalid(format!("n = {n} exceeds 64")));
    }
    Ok(binomial_sum(n, t)? as f64 / 2f64.powi(n as i32))
}

/// Query budget for a target error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueryChoice {
    /// Smallest `T` with `1 - B(n,T)/2^n ≤ eps`.
    pub exact: u32,
    /// `⌈n/2 + √(n ln(1/eps))⌉`, for comparison only.
    pub reference: f64,
}

pub fn choose_t(n: u32, eps: f64) -> Result<QueryChoice> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if n > 64 {
        return Err(invalid(format!("n = {n} exceeds 64")));
    }
    let total = 2f64.powi(n as i32);
    let allowed = eps * total;
    let full = 1u128 << n;
    let exact = (0..=n)
        .find(|&t| {
            let tail = full - binomial_sum(n, t).expect("t <= n");
            tail as f64 <= allowed
        })
        .unwrap_or(n);
    let reference = (f64::from(n) / 2.0 + (f64::from(n) * (1.0 / eps).ln()).sqrt()).ceil();
    Ok(QueryChoice { exact, reference })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_examples() {
        for x in 0..16 {
            assert!((simulate_exact(4, 4, x).unwrap().success_probability - 1.0).abs() < 1e-12);
            assert!((simulate_exact(4, 0, x).unwrap().success_probability - 1.0 / 16.0).abs() < 1e-12);
            assert!((simulate_exact(4, 2, x).unwrap().success_probability - 0.6875).abs() < 1e-12);
        }
        assert_eq!(simulate_exact(4, 2, 5).unwrap().queries, 2);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(success_probability_closed_form(4, 2).unwrap(), 0.6875);
        assert_eq!(success_probability_closed_form(6, 3).unwrap(), 0.65625);
        assert_eq!(success_probability_closed_form(9, 9).unwrap(), 1.0);
        assert!((simulate_exact(6, 3, 11).unwrap().success_probability - 0.65625).abs() < 1e-12);
    }

    #[test]
    fn state_stays_normalized() {
        for (n, t) in [(5, 2), (8, 3), (10, 10)] {
            let st = final_state::<f64>(n, t, 3).unwrap();
            assert!((st.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn success_is_independent_of_input() {
        for n in 1..=10u32 {
            for t in 0..=n {
                let probs: Vec<f64> = (0..1usize << n)
                    .map(|x| simulate_exact(n, t, x).unwrap().success_probability)
                    .collect();
                let lo = probs.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                assert!(hi - lo <= 1e-10);
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(simulate_exact(4, 5, 0).is_err());
        assert!(simulate_exact(4, 2, 16).is_err());
        assert!(simulate_exact(25, 2, 0).is_err());
        assert!(simulate_sampled(4, 2, 0, 0, 1).is_err());
        assert!(choose_t(4, 0.0).is_err());
        assert!(choose_t(4, 1.0).is_err());
    }

    #[test]
    fn choose_t_examples() {
        assert_eq!(choose_t(4, 1.0 - 11.0 / 16.0).unwrap().exact, 2);
        for n in 1..=20u32 {
            let eps = 1.0 - 1.0 / 2f64.powi(n as i32);
            assert_eq!(choose_t(n, eps).unwrap().exact, 0);
        }
        // integer scan: tail counts for n = 10 are 1023, 1013, 968, 848, 638,
        // 386, 176, 56, 11, 1, 0; 0.01 * 1024 = 10.24
        assert_eq!(choose_t(10, 0.01).unwrap().exact, 9);
    }

    #[test]
    fn choose_t_monotone_and_below_reference() {
        let grid = [0.5, 1.0 / 3.0, 0.1, 0.01];
        for n in 1..=24u32 {
            let mut prev = 0;
            for &eps in &grid {
                let c = choose_t(n, eps).unwrap();
                assert!(c.exact >= prev, "n={n} eps={eps}");
                prev = c.exact;
                assert!(f64::from(c.exact) <= c.reference + 1.0);
                assert!(c.exact <= n);
            }
        }
    }

    #[test]
    fn sampling() {
        let one = simulate_sampled(5, 5, 19, 1, 3).unwrap();
        assert_eq!(one.counts.keys().copied().collect::<Vec<_>>(), vec![19]);
        let big = simulate_sampled(4, 2, 6, 100_000, 8).unwrap();
        assert_eq!(big.counts.values().sum::<u64>(), 100_000);
        assert!((big.recovered_fraction().unwrap() - 0.6875).abs() < 0.005);
        assert_eq!(big, simulate_sampled(4, 2, 6, 100_000, 8).unwrap());
    }
}
