//! Boolean functions `f : {0,1}^n -> {+1, -1}` as full sign tables.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::RngCore;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::seed;
use crate::transforms::{fwht_in_place, weight, MAX_BITS};

/// Named fixture families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    ConstantPlus,
    Parity,
    Or,
    Majority,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::ConstantPlus, Family::Parity, Family::Or, Family::Majority];

    pub fn name(self) -> &'static str {
        match self {
            Family::ConstantPlus => "constant_plus",
            Family::Parity => "parity",
            Family::Or => "or_fn",
            Family::Majority => "majority",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|fam| fam.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Sign table of a Boolean function; `signs[x]` is `f(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    n: u32,
    signs: Vec<i8>,
}

impl BooleanFunction {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        let len = signs.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let n = len.trailing_zeros();
        if n == 0 || n > MAX_BITS {
            return Err(invalid(format!("n must be in 1..={MAX_BITS}, got {n}")));
        }
        if let Some(bad) = signs.iter().find(|&&v| v != 1 && v != -1) {
            return Err(invalid(format!("sign table entry {bad} is not +1 or -1")));
        }
        Ok(Self { n, signs })
    }

    pub fn from_family(family: Family, n: u32) -> Result<Self> {
        check_bits(n)?;
        if family == Family::Majority && n % 2 == 0 {
            return Err(invalid(format!("majority needs odd n, got {n}")));
        }
        let signs = (0..1usize << n)
            .map(|x| {
                let w = weight(x);
                let plus = match family {
                    Family::ConstantPlus => true,
                    Family::Parity => w % 2 == 0,
                    Family::Or => x == 0,
                    Family::Majority => 2 * w < n,
                };
                if plus {
                    1
                } else {
                    -1
                }
            })
            .collect();
        Ok(Self { n, signs })
    }

    /// The function whose value at `x` is `-1` exactly when bit `x` of
    /// `mask` is set. Enumerates all functions for `n ≤ 6`.
    pub fn from_mask(n: u32, mask: u64) -> Result<Self> {
        if n == 0 || n > 6 {
            return Err(invalid(format!("from_mask supports 1 <= n <= 6, got {n}")));
        }
        let signs = (0..1usize << n).map(|x| if (mask >> x) & 1 == 1 { -1 } else { 1 }).collect();
        Ok(Self { n, signs })
    }

    /// Independent uniform signs from `ChaCha8Rng::seed_from_u64(seed)`:
    /// 64-bit words are drawn in order and bit `j` of word `w` gives the sign
    /// at `x = 64 w + j` (set bit means `-1`).
    pub fn sample_uniform(n: u32, seed: u64) -> Result<Self> {
        check_bits(n)?;
        let mut rng = seed::rng(seed);
        let len = 1usize << n;
        let mut signs = Vec::with_capacity(len);
        while signs.len() < len {
            let word = rng.next_u64();
            let take = (len - signs.len()).min(64);
            signs.extend((0..take).map(|j| if (word >> j) & 1 == 1 { -1i8 } else { 1 }));
        }
        Ok(Self { n, signs })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn value(&self, x: usize) -> i8 {
        self.signs[x]
    }

    /// `Σ_x f(x)`.
    pub fn sum(&self) -> i64 {
        self.signs.iter().map(|&v| i64::from(v)).sum()
    }

    pub fn negate(&self) -> Self {
        Self {
            n: self.n,
            signs: self.signs.iter().map(|&v| -v).collect(),
        }
    }

    /// `f` if `Σ_x f(x) ≥ 0`, otherwise `-f`. Negation does not change query
    /// complexity, so lower bounds are computed on this representative.
    pub fn canonical_sign(&self) -> Self {
        if self.sum() >= 0 {
            self.clone()
        } else {
            self.negate()
        }
    }

    pub fn sign_values<S: Scalar>(&self) -> Vec<S> {
        self.signs.iter().map(|&v| if v > 0 { S::one() } else { -S::one() }).collect()
    }

    /// `f̂(s) = 2^{-n} Σ_x (-1)^{s·x} f(x)` for every `s`.
    pub fn fourier<S: Scalar>(&self) -> FourierSpectrum<S> {
        let mut coeffs = self.sign_values::<S>();
        fwht_in_place(&mut coeffs).expect("sign table length is a power of two");
        let scale = S::one() / S::of(self.signs.len() as f64);
        coeffs.iter_mut().for_each(|c| *c *= scale);
        FourierSpectrum { n: self.n, coeffs }
    }

    /// Two-line text form: `n=<n>` then `2^n` characters from `{+,-}`.
    pub fn to_truth_table(&self) -> String {
        let body: String = self.signs.iter().map(|&v| if v > 0 { '+' } else { '-' }).collect();
        format!("n={}\n{}\n", self.n, body)
    }

    pub fn parse_truth_table(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::TruthTable("empty input".into()))?;
        let n: u32 = header
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::TruthTable(format!("expected `n=<int>`, got `{header}`")))?;
        if n == 0 || n > MAX_BITS {
            return Err(Error::TruthTable(format!("n must be in 1..={MAX_BITS}, got {n}")));
        }
        let body = lines.next().ok_or_else(|| Error::TruthTable("missing sign line".into()))?;
        if lines.next().is_some() {
            return Err(Error::TruthTable("trailing content after sign line".into()));
        }
        if body.len() != 1usize << n {
            return Err(Error::TruthTable(format!(
                "expected {} signs for n={n}, got {}",
                1usize << n,
                body.len()
            )));
        }
        let signs = body
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::TruthTable(format!("unexpected character `{other}`"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        Ok(Self { n, signs })
    }

    pub fn read_truth_table(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_truth_table(&std::fs::read_to_string(path)?)
    }
}

fn check_bits(n: u32) -> Result<()> {
    if n == 0 || n > MAX_BITS {
        return Err(invalid(format!("n must be in 1..={MAX_BITS}, got {n}")));
    }
    Ok(())
}

/// Fourier coefficients `f̂(s)` indexed by `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpectrum<S> {
    n: u32,
    coeffs: Vec<S>,
}

impl<S: Scalar> FourierSpectrum<S> {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, s: usize) -> S {
        self.coeffs[s]
    }

    /// `Σ_s f̂(s)^2`, equal to 1 for every Boolean function.
    pub fn energy(&self) -> S {
        self.coeffs.iter().map(|&c| c * c).sum()
    }

    /// Sign values recovered as `W f̂`.
    pub fn inverse(&self) -> Vec<S> {
        let mut v = self.coeffs.clone();
        fwht_in_place(&mut v).expect("spectrum length is a power of two");
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families() {
        let p = BooleanFunction::from_family(Family::Parity, 2).unwrap();
        assert_eq!(p.signs(), &[1, -1, -1, 1]);
        let c = BooleanFunction::from_family(Family::ConstantPlus, 3).unwrap();
        assert!(c.signs().iter().all(|&v| v == 1));
        let or = BooleanFunction::from_family(Family::Or, 2).unwrap();
        assert_eq!(or.signs(), &[1, -1, -1, -1]);
        let maj = BooleanFunction::from_family(Family::Majority, 3).unwrap();
        assert_eq!(maj.signs(), &[1, 1, 1, -1, 1, -1, -1, -1]);
        assert!(BooleanFunction::from_family(Family::Majority, 4).is_err());
        assert!(BooleanFunction::from_family(Family::Parity, 0).is_err());
        assert!(matches!("xor".parse::<Family>(), Err(Error::UnknownFamily(_))));
        for fam in Family::ALL {
            assert_eq!(fam.name().parse::<Family>().unwrap(), fam);
        }
    }

    #[test]
    fn new_validates() {
        assert!(BooleanFunction::new(vec![1, -1, 1]).is_err());
        assert!(BooleanFunction::new(vec![1, 0]).is_err());
        assert!(BooleanFunction::new(vec![1]).is_err());
        assert!(BooleanFunction::new(vec![1, -1]).is_ok());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = BooleanFunction::sample_uniform(10, 42).unwrap();
        let b = BooleanFunction::sample_uniform(10, 42).unwrap();
        assert_eq!(a, b);
        let golden = BooleanFunction::sample_uniform(4, 2024).unwrap();
        assert_eq!(golden.to_truth_table(), GOLDEN_N4_SEED2024);
    }

    const GOLDEN_N4_SEED2024: &str = "n=4\n---+++----+-++-+\n";

    #[test]
    fn distinct_seeds_give_distinct_functions() {
        let fs: Vec<_> = (0..100u64)
            .map(|i| BooleanFunction::sample_uniform(8, seed::child_seed(5, i)).unwrap())
            .collect();
        let mut collisions = 0;
        for i in 0..fs.len() {
            for j in i + 1..fs.len() {
                if fs[i] == fs[j] {
                    collisions += 1;
                }
            }
        }
        assert_eq!(collisions, 0);
    }

    #[test]
    fn signs_are_balanced_at_fixed_point() {
        let trials = 10_000u64;
        for x in [0usize, 17, 63] {
            let total: i64 = (0..trials)
                .map(|i| i64::from(BooleanFunction::sample_uniform(6, seed::child_seed(9, i)).unwrap().value(x)))
                .sum();
            let mean = total as f64 / trials as f64;
            assert!(mean.abs() <= 4.0 / (trials as f64).sqrt(), "x={x}: mean {mean}");
        }
    }

    #[test]
    fn fourier_examples() {
        let p = BooleanFunction::from_family(Family::Parity, 3).unwrap().fourier::<f64>();
        for s in 0..8 {
            assert_eq!(p.coeff(s), if s == 0b111 { 1.0 } else { 0.0 });
        }
        let c = BooleanFunction::from_family(Family::ConstantPlus, 5).unwrap().fourier::<f64>();
        assert_eq!(c.coeff(0), 1.0);
        assert!(c.coeffs()[1..].iter().all(|&v| v == 0.0));
        let or = BooleanFunction::from_family(Family::Or, 2).unwrap().fourier::<f64>();
        assert_eq!(or.coeffs(), &[-0.5, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn fourier_inverse_and_parseval() {
        for n in 1..=12u32 {
            let f = BooleanFunction::sample_uniform(n, u64::from(n)).unwrap();
            let spec = f.fourier::<f64>();
            let back = spec.inverse();
            for (a, b) in back.iter().zip(f.sign_values::<f64>()) {
                assert!((a - b).abs() <= 1e-10);
            }
            assert!((spec.coeff(0) - f.sum() as f64 / f.len() as f64).abs() <= 1e-12);
        }
        for i in 0..100u64 {
            let n = 1 + (i % 16) as u32;
            let spec = BooleanFunction::sample_uniform(n, seed::child_seed(3, i)).unwrap().fourier::<f64>();
            assert!((spec.energy() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn canonical_sign_examples() {
        let c = BooleanFunction::from_family(Family::ConstantPlus, 3).unwrap();
        assert_eq!(c.canonical_sign(), c);
        assert_eq!(c.negate().canonical_sign(), c);
        let or = BooleanFunction::from_family(Family::Or, 3).unwrap();
        assert_eq!(or.sum(), -6);
        let canon = or.canonical_sign();
        assert_eq!(canon.sum(), 6);
        assert_eq!(canon, or.negate());
        assert_eq!(canon.canonical_sign(), canon);
    }

    #[test]
    fn truth_table_text() {
        let f = BooleanFunction::from_family(Family::Or, 2).unwrap();
        assert_eq!(f.to_truth_table(), "n=2\n+---\n");
        assert_eq!(BooleanFunction::parse_truth_table("n=2\n+---\n").unwrap(), f);
        assert!(BooleanFunction::parse_truth_table("n=2\n+--\n").is_err());
        assert!(BooleanFunction::parse_truth_table("n=2\n+-x-\n").is_err());
        assert!(BooleanFunction::parse_truth_table("m=2\n+---\n").is_err());
        assert!(BooleanFunction::parse_truth_table("").is_err());
    }

    #[test]
    fn mask_enumeration() {
        let f = BooleanFunction::from_mask(2, 0b1110).unwrap();
        assert_eq!(f, BooleanFunction::from_family(Family::Or, 2).unwrap());
        assert!(BooleanFunction::from_mask(7, 0).is_err());
    }
}
