//! Trace moments `Tr(F̂_T^{2k}) = Σ_i λ_i^{2k}` and the combinatorial sums
//! behind their expectation over uniformly random `f`.
//!
//! Over a random `f`, `E[f(x_1)⋯f(x_m)]` is 1 when every distinct string
//! appears an even number of times in the tuple and 0 otherwise. Grouping
//! the surviving tuples by which positions coincide turns the expected
//! moment into sums over partitions of `{1..m}` into even parts; each such
//! sum is checked here by direct enumeration ([`claim2_bruteforce`]).

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::boolfn::BooleanFunction;
use crate::error::{invalid, Error, Result};
use crate::operator::TruncatedFourierOperator;
use crate::seed;
use crate::transforms::{binomial_sum, dot_is_odd, WeightIndex};
use crate::Rational;

/// Largest `n` for which expectations are taken over all `2^{2^n}` functions.
pub const MAX_EXHAUSTIVE_BITS: u32 = 4;
/// Enumeration budget for [`claim2_bruteforce`].
pub const CLAIM2_BUDGET: u128 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentMethod {
    DenseExact,
    ExhaustiveExpectation,
    MonteCarlo,
}

impl MomentMethod {
    pub fn name(self) -> &'static str {
        match self {
            MomentMethod::DenseExact => "dense_exact",
            MomentMethod::ExhaustiveExpectation => "exhaustive_expectation",
            MomentMethod::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub n: u32,
    pub t: u32,
    pub k: u32,
    pub b: u128,
    pub value: f64,
    /// Exact value when the method produces one.
    pub exact: Option<Rational>,
    /// Standard error of the mean; zero for exact methods.
    pub stderr: f64,
    pub trials: u64,
    pub method: MomentMethod,
    /// `value / (B (B/2^n)^k)`.
    pub bound_ratio: f64,
}

/// `B (B / 2^n)^k`.
pub fn moment_scale(n: u32, t: u32, k: u32) -> Result<f64> {
    let b = binomial_sum(n, t)? as f64;
    Ok(b * (b / 2f64.powi(n as i32)).powi(k as i32))
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    Ok(())
}

/// `Tr(F̂_T^{2k})` for one function via a dense eigendecomposition.
pub fn trace_moment(f: &BooleanFunction, t: u32, k: u32) -> Result<MomentReport> {
    check_k(k)?;
    let op = TruncatedFourierOperator::<f64>::dense(f, t)?;
    let value: f64 = op.eigenvalues()?.iter().map(|&l| (l * l).powi(k as i32)).sum();
    let n = f.n();
    Ok(MomentReport {
        n,
        t,
        k,
        b: op.dim() as u128,
        value,
        exact: None,
        stderr: 0.0,
        trials: 1,
        method: MomentMethod::DenseExact,
        bound_ratio: value / moment_scale(n, t, k)?,
    })
}

/// `Tr(F̂_T^{2k})` in exact arithmetic: `2^n F̂_T` has integer entries, so
/// the trace is an integer power trace divided by `2^{2kn}`.
pub fn exact_trace_moment(f: &BooleanFunction, t: u32, k: u32) -> Result<Rational> {
    check_k(k)?;
    let (num, den_bits) = integer_trace(f, t, k)?;
    Ok(Rational::new(num, pow2(den_bits)?))
}

fn pow2(bits: u32) -> Result<i128> {
    1i128.checked_shl(bits).filter(|_| bits < 127).ok_or(Error::Overflow("power of two"))
}

/// Returns `(Tr(W^{2k}), 2kn)` with `W = 2^n F̂_T` integral.
fn integer_trace(f: &BooleanFunction, t: u32, k: u32) -> Result<(i128, u32)> {
    let n = f.n();
    let index = WeightIndex::new(n, t)?;
    let mut w_hat: Vec<i64> = f.signs().iter().map(|&v| i64::from(v)).collect();
    fwht_integer(&mut w_hat);
    let strings = index.strings();
    let b = strings.len();
    let mut w = vec![0i128; b * b];
    for (j, &s) in strings.iter().enumerate() {
        for (l, &u) in strings.iter().enumerate() {
            w[j * b + l] = i128::from(w_hat[s ^ u]);
        }
    }
    let sq = matmul(&w, &w, b)?;
    let mut acc = sq.clone();
    for _ in 1..k {
        acc = matmul(&acc, &sq, b)?;
    }
    let trace = (0..b).try_fold(0i128, |s, i| s.checked_add(acc[i * b + i]).ok_or(Error::Overflow("trace")))?;
    Ok((trace, 2 * k * n))
}

fn fwht_integer(v: &mut [i64]) {
    let mut half = 1;
    while half < v.len() {
        for block in v.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
}

fn matmul(a: &[i128], b: &[i128], dim: usize) -> Result<Vec<i128>> {
    let mut out = vec![0i128; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == 0 {
                continue;
            }
            for j in 0..dim {
                let prod = aik.checked_mul(b[k * dim + j]).ok_or(Error::Overflow("matrix power"))?;
                out[i * dim + j] = out[i * dim + j].checked_add(prod).ok_or(Error::Overflow("matrix power"))?;
            }
        }
    }
    Ok(out)
}

/// `E[Tr(F̂_T^{2k})]` averaged exactly over all `2^{2^n}` sign tables.
pub fn expected_trace_moment_exhaustive(n: u32, t: u32, k: u32) -> Result<MomentReport> {
    check_k(k)?;
    if n == 0 || n > MAX_EXHAUSTIVE_BITS {
        return Err(invalid(format!("exhaustive expectation needs 1 <= n <= {MAX_EXHAUSTIVE_BITS}, got {n}")));
    }
    let count = 1u64 << (1u32 << n);
    let mut total = 0i128;
    let mut den_bits = 0;
    for mask in 0..count {
        let f = BooleanFunction::from_mask(n, mask)?;
        let (num, bits) = integer_trace(&f, t, k)?;
        den_bits = bits;
        total = total.checked_add(num).ok_or(Error::Overflow("exhaustive sum"))?;
    }
    let exact = Rational::new(total, pow2(den_bits)?) / Rational::from_integer(i128::from(count));
    let value = ratio_to_f64(&exact);
    Ok(MomentReport {
        n,
        t,
        k,
        b: binomial_sum(n, t)?,
        value,
        exact: Some(exact),
        stderr: 0.0,
        trials: count,
        method: MomentMethod::ExhaustiveExpectation,
        bound_ratio: value / moment_scale(n, t, k)?,
    })
}

pub fn ratio_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Moment of the function used by Monte Carlo trial `index`.
pub fn mc_sample(n: u32, t: u32, k: u32, seed: u64, index: u64) -> Result<f64> {
    let f = BooleanFunction::sample_uniform(n, seed::child_seed(seed, index))?;
    Ok(trace_moment(&f, t, k)?.value)
}

impl MomentReport {
    /// Sample mean and standard error of per-trial moments.
    pub fn from_samples(n: u32, t: u32, k: u32, samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invalid("Monte Carlo needs at least 2 trials"));
        }
        let count = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / count;
        let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1.0);
        Ok(Self {
            n,
            t,
            k,
            b: binomial_sum(n, t)?,
            value: mean,
            exact: None,
            stderr: (var / count).sqrt(),
            trials: samples.len() as u64,
            method: MomentMethod::MonteCarlo,
            bound_ratio: mean / moment_scale(n, t, k)?,
        })
    }
}

/// Monte Carlo estimate of `E[Tr(F̂_T^{2k})]`; trial `i` uses
/// `child_seed(seed, i)`.
pub fn expected_trace_moment_mc(n: u32, t: u32, k: u32, trials: u64, seed: u64) -> Result<MomentReport> {
    check_k(k)?;
    let samples = (0..trials)
        .map(|i| mc_sample(n, t, k, seed, i))
        .collect::<Result<Vec<_>>>()?;
    MomentReport::from_samples(n, t, k, &samples)
}

/// A partition `I_1, …, I_r` of `{1, …, m}`. Parts hold 1-based positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSpec {
    m: usize,
    parts: Vec<Vec<usize>>,
}

impl PartitionSpec {
    pub fn new(m: usize, parts: Vec<Vec<usize>>) -> Result<Self> {
        if m == 0 {
            return Err(invalid("partition of an empty set"));
        }
        let mut seen = vec![false; m];
        for part in &parts {
            if part.is_empty() {
                return Err(invalid("partition has an empty part"));
            }
            for &i in part {
                if i == 0 || i > m {
                    return Err(invalid(format!("position {i} outside 1..={m}")));
                }
                if std::mem::replace(&mut seen[i - 1], true) {
                    return Err(invalid(format!("position {i} appears twice")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(invalid(format!("position {} is not covered", missing + 1)));
        }
        Ok(Self { m, parts })
    }

    /// The single-part partition `{1..m}`.
    pub fn whole(m: usize) -> Result<Self> {
        Self::new(m, vec![(1..=m).collect()])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn all_parts_even(&self) -> bool {
        self.parts.iter().all(|p| p.len() % 2 == 0)
    }

    /// `t_j(s) = ⊕_{i ∈ I_j} (s_i ⊕ s_{i+1})` with `s_{m+1} = s_1`.
    pub fn part_masks(&self, s: &[usize]) -> Vec<usize> {
        self.parts
            .iter()
            .map(|part| part.iter().fold(0, |acc, &i| acc ^ s[i - 1] ^ s[i % self.m]))
            .collect()
    }
}

impl fmt::Display for PartitionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text: Vec<String> = self
            .parts
            .iter()
            .map(|p| p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        f.write_str(&text.join("|"))
    }
}

impl FromStr for PartitionSpec {
    type Err = Error;

    /// Parses `1,2|3,4`; `m` is the largest position.
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split('|')
            .map(|part| {
                part.split(',')
                    .map(|i| i.trim().parse::<usize>().map_err(|_| invalid(format!("bad position `{i}`"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let m = parts.iter().flatten().copied().max().unwrap_or(0);
        Self::new(m, parts)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Claim2Result {
    pub n: u32,
    pub t: u32,
    pub b: u128,
    /// Exact signed sum.
    pub sum: i128,
    /// `B^{m−r+1} · 2^{nr}`.
    pub bound_value: f64,
    /// Number of enumerated `(s, x)` combinations before the distinctness
    /// filter, `B^m · 2^{nr}`.
    pub work: u128,
}

impl Claim2Result {
    pub fn ratio(&self) -> f64 {
        self.sum as f64 / self.bound_value
    }
}

/// Sum over all `s_1..s_m` of weight ≤ `T` and all pairwise distinct
/// `x^{(1)}..x^{(r)} ∈ {0,1}^n` of `(−1)^{Σ_j t_j(s)·x^{(j)}}`, by direct
/// enumeration.
pub fn claim2_bruteforce(n: u32, t: u32, spec: &PartitionSpec) -> Result<Claim2Result> {
    let index = WeightIndex::new(n, t)?;
    let b = index.len() as u128;
    let m = spec.m();
    let r = spec.r();
    let space = 1u128 << n;
    let work = b
        .checked_pow(m as u32)
        .and_then(|x| space.checked_pow(r as u32).and_then(|y| x.checked_mul(y)))
        .unwrap_or(u128::MAX);
    if work > CLAIM2_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "partition-sum enumeration",
            required: work,
            budget: CLAIM2_BUDGET,
        });
    }
    let strings = index.strings();
    let size = 1usize << n;
    let mut sum = 0i128;
    let mut s_pos = vec![0usize; m];
    let mut s = vec![0usize; m];
    loop {
        for (slot, &p) in s.iter_mut().zip(&s_pos) {
            *slot = strings[p];
        }
        let masks = spec.part_masks(&s);
        sum += distinct_character_sum(&masks, size);
        if !advance(&mut s_pos, strings.len()) {
            break;
        }
    }
    Ok(Claim2Result {
        n,
        t,
        b,
        sum,
        bound_value: (b as f64).powi((m - r + 1) as i32) * 2f64.powi((n as usize * r) as i32),
        work,
    })
}

/// `Σ_{x^{(1)},…,x^{(r)} distinct} (−1)^{Σ_j masks_j · x^{(j)}}`.
fn distinct_character_sum(masks: &[usize], size: usize) -> i128 {
    let r = masks.len();
    let mut xs = vec![0usize; r];
    let mut total = 0i128;
    loop {
        let distinct = (0..r).all(|i| (i + 1..r).all(|j| xs[i] != xs[j]));
        if distinct {
            let odd = masks.iter().zip(&xs).filter(|(&mask, &x)| dot_is_odd(mask, x)).count() % 2 == 1;
            total += if odd { -1 } else { 1 };
        }
        if !advance(&mut xs, size) {
            return total;
        }
    }
}

/// Odometer increment; returns false after the last tuple.
fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// True when every distinct value occurs an even number of times.
pub fn is_even_tuple(xs: &[usize]) -> bool {
    let mut sorted = xs.to_vec();
    sorted.sort_unstable();
    sorted.chunk_by(|a, b| a == b).all(|run| run.len() % 2 == 0)
}

/// `E_f[f(x_1)⋯f(x_m)]` averaged exactly over all `2^{2^n}` functions.
pub fn product_expectation(n: u32, xs: &[usize]) -> Result<Rational> {
    if n == 0 || n > MAX_EXHAUSTIVE_BITS {
        return Err(invalid(format!("exhaustive expectation needs 1 <= n <= {MAX_EXHAUSTIVE_BITS}, got {n}")));
    }
    if let Some(&bad) = xs.iter().find(|&&x| x >> n != 0) {
        return Err(invalid(format!("string {bad} has more than {n} bits")));
    }
    let count = 1u64 << (1u32 << n);
    let mut total = 0i128;
    for mask in 0..count {
        let negatives = xs.iter().filter(|&&x| (mask >> x) & 1 == 1).count();
        total += if negatives % 2 == 0 { 1 } else { -1 };
    }
    Ok(Rational::new(total, i128::from(count)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvennessReport {
    pub n: u32,
    pub m: usize,
    pub checked: usize,
    pub even: usize,
    /// Tuples whose expectation was not exactly 1 (even) or 0 (odd).
    pub mismatches: Vec<Vec<usize>>,
}

impl EvennessReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn check_evenness_args(n: u32, m: usize) -> Result<()> {
    if m == 0 || m > 6 {
        return Err(invalid(format!("tuple length must be in 1..=6, got {m}")));
    }
    if n == 0 || n > MAX_EXHAUSTIVE_BITS {
        return Err(invalid(format!("n must be in 1..={MAX_EXHAUSTIVE_BITS}, got {n}")));
    }
    Ok(())
}

fn evenness_over<I: IntoIterator<Item = Vec<usize>>>(n: u32, m: usize, tuples: I) -> Result<EvennessReport> {
    let mut report = EvennessReport {
        n,
        m,
        checked: 0,
        even: 0,
        mismatches: Vec::new(),
    };
    for xs in tuples {
        let even = is_even_tuple(&xs);
        let want = if even { Rational::one() } else { Rational::zero() };
        if product_expectation(n, &xs)? != want {
            report.mismatches.push(xs);
        }
        report.checked += 1;
        report.even += usize::from(even);
    }
    Ok(report)
}

/// Checks `trials` sampled tuples of length `m`; about half are built as
/// shuffled pairs so that even tuples are well represented.
pub fn evenness_check(n: u32, m: usize, trials: usize, seed: u64) -> Result<EvennessReport> {
    use rand::seq::SliceRandom;
    use rand::Rng;
    check_evenness_args(n, m)?;
    let mut rng = seed::rng(seed);
    let size = 1usize << n;
    let tuples: Vec<Vec<usize>> = (0..trials)
        .map(|i| {
            let mut xs: Vec<usize> = if i % 2 == 0 && m % 2 == 0 {
                (0..m / 2).flat_map(|_| {
                    let x = rng.gen_range(0..size);
                    [x, x]
                }).collect()
            } else {
                (0..m).map(|_| rng.gen_range(0..size)).collect()
            };
            xs.shuffle(&mut rng);
            xs
        })
        .collect();
    evenness_over(n, m, tuples)
}

/// Checks every tuple in `({0,1}^n)^m`.
pub fn evenness_check_all(n: u32, m: usize) -> Result<EvennessReport> {
    check_evenness_args(n, m)?;
    let size = 1usize << n;
    let mut digits = vec![0usize; m];
    let mut tuples = Vec::with_capacity(size.pow(m as u32));
    loop {
        tuples.push(digits.clone());
        if !advance(&mut digits, size) {
            break;
        }
    }
    evenness_over(n, m, tuples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::Family;

    #[test]
    fn trace_moment_examples() {
        let f = BooleanFunction::sample_uniform(5, 1).unwrap();
        for k in 1..=3 {
            assert!((trace_moment(&f, 5, k).unwrap().value - 32.0).abs() < 1e-8);
        }
        let p = BooleanFunction::from_family(Family::Parity, 4).unwrap();
        assert!(trace_moment(&p, 1, 2).unwrap().value.abs() < 1e-15);
        let c = BooleanFunction::from_family(Family::ConstantPlus, 4).unwrap();
        for t in 0..=4 {
            let rep = trace_moment(&c, t, 2).unwrap();
            assert!((rep.value - rep.b as f64).abs() < 1e-12);
        }
        assert!(trace_moment(&c, 2, 0).is_err());
    }

    #[test]
    fn exact_trace_agrees_with_eigen() {
        for seed in 0..5u64 {
            let f = BooleanFunction::sample_uniform(5, seed).unwrap();
            for t in 0..=5 {
                for k in 1..=3 {
                    let exact = ratio_to_f64(&exact_trace_moment(&f, t, k).unwrap());
                    let eig = trace_moment(&f, t, k).unwrap().value;
                    assert!((exact - eig).abs() <= 1e-9 * exact.max(1.0));
                }
            }
        }
        let f = BooleanFunction::sample_uniform(3, 9).unwrap();
        assert_eq!(exact_trace_moment(&f, 3, 2).unwrap(), Rational::from_integer(8));
    }

    #[test]
    fn exhaustive_closed_forms() {
        // E[Tr(F̂_T²)] = B² / 2^n
        for (t, want) in [(0, Rational::new(1, 8)), (1, Rational::from_integer(2)), (2, Rational::new(49, 8)), (3, Rational::from_integer(8))] {
            let rep = expected_trace_moment_exhaustive(3, t, 1).unwrap();
            assert_eq!(rep.exact, Some(want));
        }
        assert!(expected_trace_moment_exhaustive(5, 1, 1).is_err());
    }

    #[test]
    fn monte_carlo_matches_k1() {
        let rep = expected_trace_moment_mc(3, 1, 1, 500, 4).unwrap();
        assert!((rep.value - 2.0).abs() <= 4.0 * rep.stderr);
        assert_eq!(rep, expected_trace_moment_mc(3, 1, 1, 500, 4).unwrap());
        assert!(expected_trace_moment_mc(3, 1, 1, 1, 4).is_err());
    }

    #[test]
    fn partition_parsing() {
        let p: PartitionSpec = "1,2|3,4".parse().unwrap();
        assert_eq!((p.m(), p.r()), (4, 2));
        assert!(p.all_parts_even());
        assert_eq!(p.to_string(), "1,2|3,4");
        assert!("1,2|2,3".parse::<PartitionSpec>().is_err());
        assert!(PartitionSpec::new(4, vec![vec![1, 2], vec![4]]).is_err());
        assert!(PartitionSpec::new(2, vec![vec![1, 2], vec![]]).is_err());
        assert!("1,x".parse::<PartitionSpec>().is_err());
    }

    #[test]
    fn whole_partition_masks_vanish() {
        let p = PartitionSpec::whole(5).unwrap();
        assert_eq!(p.part_masks(&[3, 5, 1, 7, 2]), vec![0]);
    }

    #[test]
    fn claim2_base_cases() {
        for (m, n, t, want) in [(2usize, 3u32, 1u32, 128i128), (4, 2, 1, 324), (2, 3, 3, 512)] {
            let res = claim2_bruteforce(n, t, &PartitionSpec::whole(m).unwrap()).unwrap();
            assert_eq!(res.sum, want);
            assert_eq!(res.sum as f64, res.bound_value);
        }
    }

    #[test]
    fn claim2_two_parts() {
        let spec: PartitionSpec = "1,2|3,4".parse().unwrap();
        let a = claim2_bruteforce(3, 1, &spec).unwrap();
        assert_eq!(a.bound_value, 4f64.powi(3) * 64.0);
        assert!(a.ratio().is_finite());
        assert_eq!(a, claim2_bruteforce(3, 1, &spec).unwrap());
    }

    #[test]
    fn claim2_budget() {
        let spec = PartitionSpec::whole(6).unwrap();
        assert!(matches!(claim2_bruteforce(10, 5, &spec), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn evenness_examples() {
        assert_eq!(product_expectation(2, &[3, 3]).unwrap(), Rational::one());
        assert_eq!(product_expectation(2, &[1, 2, 1, 2]).unwrap(), Rational::one());
        assert_eq!(product_expectation(3, &[1, 2, 2, 2]).unwrap(), Rational::zero());
        assert!(is_even_tuple(&[4, 1, 1, 4]));
        assert!(!is_even_tuple(&[4, 1, 1, 1]));
        let rep = evenness_check(3, 4, 200, 6).unwrap();
        assert!(rep.passed() && rep.even > 0 && rep.even < rep.checked);
        assert!(evenness_check(5, 4, 10, 1).is_err());
        assert!(evenness_check(3, 7, 10, 1).is_err());
    }

    #[test]
    fn evenness_all_small() {
        for n in 1..=2 {
            for m in 1..=3 {
                assert!(evenness_check_all(n, m).unwrap().passed());
            }
        }
    }
}
