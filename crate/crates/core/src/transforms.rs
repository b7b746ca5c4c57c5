//! Bit conventions, the fast Walsh-Hadamard transform and Hamming-weight
//! combinatorics.
//!
//! Strings in `{0,1}^n` are stored as integers: bit `i` of the integer is the
//! variable `x_{i+1}`, and `s·x` is `popcount(s & x) mod 2`. When a string is
//! printed it is written most significant bit first, so index 1 with `n = 2`
//! prints as `01`.

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Largest number of bits any state-vector routine accepts.
pub const MAX_BITS: u32 = 26;

/// `(-1)^{s·x}` as a sign bit: `true` when the inner product is odd.
#[inline]
pub fn dot_is_odd(s: usize, x: usize) -> bool {
    (s & x).count_ones() & 1 == 1
}

#[inline]
pub fn weight(s: usize) -> u32 {
    s.count_ones()
}

/// Formats `s` as an `n`-character bit string, most significant bit first.
pub fn format_bits(s: usize, n: u32) -> String {
    (0..n)
        .rev()
        .map(|i| if (s >> i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parses an MSB-first bit string into an index.
pub fn parse_bits(text: &str) -> Result<(u32, usize)> {
    let n = text.len();
    if n == 0 || n > MAX_BITS as usize {
        return Err(invalid(format!("bit string length must be in 1..={MAX_BITS}, got {n}")));
    }
    let mut value = 0usize;
    for c in text.chars() {
        value <<= 1;
        match c {
            '0' => {}
            '1' => value |= 1,
            other => return Err(invalid(format!("bit string contains `{other}`"))),
        }
    }
    Ok((n as u32, value))
}

/// Number of bits `n` such that `len == 2^n`.
pub fn log2_len(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros())
}

/// In-place unnormalized Walsh-Hadamard transform: `v <- W v` with
/// `W[s][x] = (-1)^{s·x}`. Applying it twice multiplies by `2^n`.
pub fn fwht_in_place<S: Scalar>(v: &mut [S]) -> Result<()> {
    log2_len(v.len())?;
    let len = v.len();
    let mut half = 1;
    while half < len {
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
    Ok(())
}

/// A vector indexed by `{0,1}^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Amplitudes<S> {
    n: u32,
    data: Vec<S>,
}

impl<S: Scalar> Amplitudes<S> {
    pub fn zeros(n: u32) -> Result<Self> {
        if n > MAX_BITS {
            return Err(invalid(format!("n = {n} exceeds {MAX_BITS}")));
        }
        Ok(Self {
            n,
            data: vec![S::zero(); 1 << n],
        })
    }

    pub fn from_vec(data: Vec<S>) -> Result<Self> {
        let n = log2_len(data.len())?;
        if n > MAX_BITS {
            return Err(invalid(format!("n = {n} exceeds {MAX_BITS}")));
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<S> {
        self.data
    }

    pub fn norm_sqr(&self) -> S {
        self.data.iter().map(|&a| a * a).sum()
    }

    /// Unnormalized transform `W v`.
    pub fn fwht(&mut self) {
        fwht_in_place(&mut self.data).expect("length is a power of two by construction");
    }

    /// Unitary Hadamard `H = 2^{-n/2} W`.
    pub fn hadamard(&mut self) {
        self.fwht();
        let scale = S::one() / S::of(2f64).powi(self.n as i32).sqrt();
        self.data.iter_mut().for_each(|a| *a *= scale);
    }
}

/// `Σ_{i=0}^{t} C(n, i)`, exact for `n ≤ 64`.
pub fn binomial_sum(n: u32, t: u32) -> Result<u128> {
    if n > 64 {
        return Err(invalid(format!("binomial_sum supports n <= 64, got {n}")));
    }
    if t > n {
        return Err(invalid(format!("T = {t} exceeds n = {n}")));
    }
    let mut term: u128 = 1;
    let mut total: u128 = 1;
    for i in 0..t {
        term = term * u128::from(n - i) / u128::from(i + 1);
        total += term;
    }
    Ok(total)
}

/// Binary entropy `H(q) = -q log2 q - (1-q) log2 (1-q)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy<S: Scalar>(q: S) -> Result<S> {
    if !(q >= S::zero() && q <= S::one()) {
        return Err(invalid(format!("entropy argument {q} outside [0, 1]")));
    }
    let term = |p: S| if p > S::zero() { -p * p.log2() } else { S::zero() };
    Ok(term(q) + term(S::one() - q))
}

/// Exponent of the entropy bound `B(n, T) ≤ 2^{n H(T/n)}`.
pub fn entropy_exponent(n: u32, t: u32) -> Result<f64> {
    if n == 0 || t > n {
        return Err(invalid(format!("entropy exponent needs 0 <= T <= n, n >= 1 (n = {n}, T = {t})")));
    }
    Ok(f64::from(n) * binary_entropy(f64::from(t) / f64::from(n))?)
}

/// All strings of Hamming weight at most `t`, ordered by weight and then by
/// integer value.
#[derive(Clone, Debug)]
pub struct WeightIndex {
    n: u32,
    t: u32,
    strings: Vec<usize>,
    // offsets[w] = number of strings with weight < w
    offsets: Vec<usize>,
    binom: Vec<Vec<usize>>,
}

impl WeightIndex {
    pub fn new(n: u32, t: u32) -> Result<Self> {
        if n > MAX_BITS {
            return Err(invalid(format!("n = {n} exceeds {MAX_BITS}")));
        }
        if t > n {
            return Err(invalid(format!("T = {t} exceeds n = {n}")));
        }
        let size = binomial_sum(n, t)? as usize;
        let mut strings = Vec::with_capacity(size);
        let mut offsets = Vec::with_capacity(t as usize + 2);
        let limit = 1usize << n;
        for w in 0..=t {
            offsets.push(strings.len());
            if w == 0 {
                strings.push(0);
                continue;
            }
            // Gosper's hack walks same-weight integers in increasing order.
            let mut s = (1usize << w) - 1;
            while s < limit {
                strings.push(s);
                let c = s & s.wrapping_neg();
                let r = s + c;
                s = (((r ^ s) >> 2) / c) | r;
            }
        }
        offsets.push(strings.len());
        debug_assert_eq!(strings.len(), size);

        let nn = n as usize;
        let mut binom = vec![vec![0usize; nn + 2]; nn + 1];
        for row in binom.iter_mut() {
            row[0] = 1;
        }
        for m in 1..=nn {
            for k in 1..=m {
                binom[m][k] = binom[m - 1][k - 1] + binom[m - 1][k];
            }
        }
        Ok(Self {
            n,
            t,
            strings,
            offsets,
            binom,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    /// `B`, the number of indexed strings.
    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn strings(&self) -> &[usize] {
        &self.strings
    }

    /// Position of `s` in [`strings`](Self::strings), or `None` when `s` is
    /// too heavy or out of range.
    pub fn rank(&self, s: usize) -> Option<usize> {
        if s >> self.n != 0 {
            return None;
        }
        let w = weight(s);
        if w > self.t {
            return None;
        }
        // Combinatorial number system: among weight-w strings, increasing
        // integer order is colexicographic order of the set-bit positions.
        let mut within = 0;
        let mut rest = s;
        let mut j = 1;
        while rest != 0 {
            let p = rest.trailing_zeros() as usize;
            within += self.binom[p][j];
            rest &= rest - 1;
            j += 1;
        }
        Some(self.offsets[w as usize] + within)
    }
}
