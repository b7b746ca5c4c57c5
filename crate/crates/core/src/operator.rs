//! The truncated Fourier operator `F̂_T`.
//!
//! `F̂ = H F H` where `F = diag(f)` has entries `F̂[s][t] = f̂(s ⊕ t)`. It is
//! a symmetric orthogonal involution. `F̂_T` keeps only rows and columns
//! with Hamming weight at most `T`, a `B × B` principal submatrix, so its
//! spectral norm is at most 1 and grows with `T`.
//!
//! Two representations share one type: a dense matrix for `B ≤ 4096`, and a
//! matrix-free form that applies `F̂_T` with two transforms of length `2^n`.

use rand::Rng;

use crate::boolfn::BooleanFunction;
use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;
use crate::transforms::{fwht_in_place, WeightIndex};

/// Largest `B` for which a dense matrix is built.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorMode {
    Dense,
    MatrixFree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMethod {
    DenseEigen,
    PowerIteration,
}

impl NormMethod {
    pub fn name(self) -> &'static str {
        match self {
            NormMethod::DenseEigen => "dense_eigen",
            NormMethod::PowerIteration => "power_iteration",
        }
    }
}

/// Settings for [`TruncatedFourierOperator::spectral_norm`]. Only the
/// matrix-free path reads them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
            seed: 0,
        }
    }
}

/// Spectral norm `‖F̂_T‖∞ = max_i |λ_i|` together with how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate<S> {
    pub value: S,
    pub method: NormMethod,
    /// `‖A²v − ρv‖ / ‖v‖` at the final iterate; zero for the dense path.
    pub residual: S,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct TruncatedFourierOperator<S> {
    t: u32,
    signs: Vec<S>,
    index: WeightIndex,
    dense: Option<Vec<S>>,
}

impl<S: Scalar> TruncatedFourierOperator<S> {
    /// Dense `B × B` matrix with entries `f̂(s_j ⊕ s_l)`.
    pub fn dense(f: &BooleanFunction, t: u32) -> Result<Self> {
        let index = WeightIndex::new(f.n(), t)?;
        let b = index.len();
        if b > DENSE_LIMIT {
            return Err(Error::BudgetExceeded {
                what: "dense truncated operator (use matrix-free)",
                required: b as u128,
                budget: DENSE_LIMIT as u128,
            });
        }
        let spectrum = f.fourier::<S>();
        let coeffs = spectrum.coeffs();
        let strings = index.strings();
        let mut m = vec![S::zero(); b * b];
        for (j, &s) in strings.iter().enumerate() {
            for (l, &u) in strings.iter().enumerate() {
                m[j * b + l] = coeffs[s ^ u];
            }
        }
        Ok(Self {
            t,
            signs: f.sign_values(),
            index,
            dense: Some(m),
        })
    }

    pub fn matrix_free(f: &BooleanFunction, t: u32) -> Result<Self> {
        let index = WeightIndex::new(f.n(), t)?;
        Ok(Self {
            t,
            signs: f.sign_values(),
            index,
            dense: None,
        })
    }

    /// Dense when `B ≤ DENSE_LIMIT`, matrix-free otherwise.
    pub fn auto(f: &BooleanFunction, t: u32) -> Result<Self> {
        let b = crate::transforms::binomial_sum(f.n(), t)?;
        if b <= DENSE_LIMIT as u128 {
            Self::dense(f, t)
        } else {
            Self::matrix_free(f, t)
        }
    }

    pub fn mode(&self) -> OperatorMode {
        if self.dense.is_some() {
            OperatorMode::Dense
        } else {
            OperatorMode::MatrixFree
        }
    }

    pub fn n(&self) -> u32 {
        self.index.n()
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    /// `B`.
    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn index(&self) -> &WeightIndex {
        &self.index
    }

    /// Row-major dense matrix, if built.
    pub fn dense_matrix(&self) -> Option<&[S]> {
        self.dense.as_deref()
    }

    pub fn apply(&self, v: &[S]) -> Result<Vec<S>> {
        let mut out = vec![S::zero(); self.dim()];
        let mut scratch = Vec::new();
        self.apply_into(v, &mut out, &mut scratch)?;
        Ok(out)
    }

    /// `out = F̂_T v`. `scratch` is resized to `2^n` on the matrix-free path
    /// and may be reused across calls.
    pub fn apply_into(&self, v: &[S], out: &mut [S], scratch: &mut Vec<S>) -> Result<()> {
        let b = self.dim();
        for len in [v.len(), out.len()] {
            if len != b {
                return Err(Error::DimensionMismatch { expected: b, got: len });
            }
        }
        match &self.dense {
            Some(m) => {
                for (row, o) in m.chunks_exact(b).zip(out.iter_mut()) {
                    *o = row.iter().zip(v).map(|(&a, &x)| a * x).sum();
                }
            }
            None => self.apply_matrix_free(v, out, scratch),
        }
        Ok(())
    }

    fn apply_matrix_free(&self, v: &[S], out: &mut [S], scratch: &mut Vec<S>) {
        let len = self.signs.len();
        scratch.clear();
        scratch.resize(len, S::zero());
        let strings = self.index.strings();
        for (&s, &x) in strings.iter().zip(v) {
            scratch[s] = x;
        }
        fwht_in_place(scratch).expect("power-of-two buffer");
        for (a, &sign) in scratch.iter_mut().zip(&self.signs) {
            *a *= sign;
        }
        fwht_in_place(scratch).expect("power-of-two buffer");
        let scale = S::one() / S::of(len as f64);
        for (o, &s) in out.iter_mut().zip(strings) {
            *o = scratch[s] * scale;
        }
    }

    /// All eigenvalues, ascending. Dense mode only.
    pub fn eigenvalues(&self) -> Result<Vec<S>> {
        let m = self.dense.as_ref().ok_or_else(|| {
            Error::InvalidParameter("eigenvalues need a dense operator".to_string())
        })?;
        symmetric_eigenvalues(m, self.dim())
    }

    /// `‖F̂_T‖∞`. Dense mode takes the largest `|λ|` of a full
    /// eigendecomposition. Matrix-free mode runs power iteration on `F̂_T²`
    /// from a seeded random start and stops when successive Rayleigh
    /// quotients differ by less than `tol`; its value never exceeds the true
    /// norm in exact arithmetic.
    pub fn spectral_norm(&self, opts: &NormOptions) -> Result<NormEstimate<S>> {
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", opts.tol)));
        }
        if self.dense.is_some() {
            let ev = self.eigenvalues()?;
            let value = ev.iter().fold(S::zero(), |m, &x| m.max(x.abs()));
            return Ok(NormEstimate {
                value,
                method: NormMethod::DenseEigen,
                residual: S::zero(),
                iterations: 0,
                converged: true,
            });
        }
        self.power_iteration(opts)
    }

    /// Power iteration on `F̂_T²`, available in either mode.
    pub fn power_iteration(&self, opts: &NormOptions) -> Result<NormEstimate<S>> {
        let b = self.dim();
        let tol = S::of(opts.tol);
        let mut rng = seed::rng(opts.seed);
        let mut v: Vec<S> = (0..b).map(|_| S::of(rng.gen_range(-1.0..1.0))).collect();
        normalize(&mut v);
        let mut half = vec![S::zero(); b];
        let mut w = vec![S::zero(); b];
        let mut scratch = Vec::new();
        let mut rho_prev = S::neg_infinity();
        let mut rho = S::zero();
        let mut iterations = 0;
        let mut converged = false;
        while iterations < opts.max_iter {
            iterations += 1;
            self.apply_into(&v, &mut half, &mut scratch)?;
            // ρ = vᵀ A² v = ‖A v‖² for unit v
            rho = dot(&half, &half);
            self.apply_into(&half, &mut w, &mut scratch)?;
            if rho == S::zero() {
                converged = true;
                break;
            }
            if (rho - rho_prev).abs() < tol {
                converged = true;
                break;
            }
            rho_prev = rho;
            v.copy_from_slice(&w);
            normalize(&mut v);
        }
        let residual = w
            .iter()
            .zip(&v)
            .map(|(&a, &x)| (a - rho * x) * (a - rho * x))
            .sum::<S>()
            .sqrt();
        Ok(NormEstimate {
            value: rho.max(S::zero()).sqrt(),
            method: NormMethod::PowerIteration,
            residual,
            iterations,
            converged,
        })
    }
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn normalize<S: Scalar>(v: &mut [S]) {
    let norm = dot(v, v).sqrt();
    if norm > S::zero() {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}
