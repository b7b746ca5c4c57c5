//! Dense real symmetric eigenvalue solvers.
//!
//! [`symmetric_eigenvalues`] is the production path: Householder reduction
//! to tridiagonal form followed by implicit QL with Wilkinson-style shifts,
//! `O(n^3)` with a small constant. [`jacobi_eigen`] is the cyclic Jacobi
//! method; it is slower but simple enough to serve as an independent check
//! for small matrices.
//!
//! Matrices are row-major `n × n` slices. Only symmetry is assumed, never
//! checked.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_square<S>(a: &[S], n: usize) -> Result<()> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: a.len(),
        });
    }
    Ok(())
}

/// All eigenvalues of the symmetric matrix `a`, sorted ascending.
pub fn symmetric_eigenvalues<S: Scalar>(a: &[S], n: usize) -> Result<Vec<S>> {
    check_square(a, n)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut work = a.to_vec();
    let (mut d, mut e) = tridiagonalize(&mut work, n);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    Ok(d)
}

/// Householder reduction of the lower triangle of `a` (destroyed). Returns
/// the diagonal and the subdiagonal, with `e[i]` coupling rows `i-1` and `i`
/// and `e[0] = 0`. All inner loops walk rows of the lower triangle.
fn tridiagonalize<S: Scalar>(a: &mut [S], n: usize) -> (Vec<S>, Vec<S>) {
    let mut e = vec![S::zero(); n];
    let mut v = vec![S::zero(); n];
    let mut p = vec![S::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let start = k + 1;
        let m = n - start;
        let v = &mut v[..m];
        let p = &mut p[..m];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = a[(start + i) * n + k];
        }
        let tail: S = v[1..].iter().map(|&x| x * x).sum();
        if tail == S::zero() {
            e[start] = v[0];
            continue;
        }
        let norm = (v[0] * v[0] + tail).sqrt();
        let alpha = if v[0] > S::zero() { -norm } else { norm };
        e[start] = alpha;
        v[0] -= alpha;
        let beta = S::of(2.0) / (v[0] * v[0] + tail);

        // p = beta * A22 v using only the stored lower triangle
        p.iter_mut().for_each(|x| *x = S::zero());
        for i in 0..m {
            let row = &a[(start + i) * n + start..(start + i) * n + start + i + 1];
            let (off, diag) = row.split_at(i);
            let vi = v[i];
            p[i] += dot(off, &v[..i]) + diag[0] * vi;
            axpy(vi, off, &mut p[..i]);
        }
        p.iter_mut().for_each(|x| *x *= beta);
        let kappa = beta * S::of(0.5) * dot(p, v);
        for (pi, &vi) in p.iter_mut().zip(v.iter()) {
            *pi -= kappa * vi;
        }

        // A22 -= v wᵀ + w vᵀ, lower triangle only
        for i in 0..m {
            let row = &mut a[(start + i) * n + start..(start + i) * n + start + i + 1];
            let (vi, wi) = (v[i], p[i]);
            for ((r, &vj), &wj) in row.iter_mut().zip(v.iter()).zip(p.iter()) {
                *r -= vi * wj + wi * vj;
            }
        }
    }
    if n >= 2 {
        e[n - 1] = a[(n - 1) * n + n - 2];
    }
    let d = (0..n).map(|i| a[i * n + i]).collect();
    e[0] = S::zero();
    (d, e)
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = [S::zero(); 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for (lane, slot) in acc.iter_mut().enumerate() {
            *slot += a[4 * c + lane] * b[4 * c + lane];
        }
    }
    let mut total = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        total += a[i] * b[i];
    }
    total
}

fn axpy<S: Scalar>(alpha: S, x: &[S], y: &mut [S]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Implicit QL on a symmetric tridiagonal matrix; `d` receives the
/// eigenvalues (unsorted).
fn tridiagonal_ql<S: Scalar>(d: &mut [S], e: &mut [S]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = S::zero();
    let two = S::of(2.0);
    let eps = S::epsilon();
    const MAX_SWEEPS: usize = 60;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::InvalidParameter(
                    "tridiagonal QL did not converge".to_string(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(S::one());
            let signed_r = if g >= S::zero() { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + signed_r);
            let (mut s, mut c, mut p) = (S::one(), S::one(), S::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == S::zero() {
                    d[i + 1] -= p;
                    e[m] = S::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = S::zero();
        }
    }
    Ok(())
}

/// Cyclic Jacobi eigendecomposition. Returns eigenvalues (ascending) and the
/// matching eigenvectors as the columns of a row-major matrix.
pub fn jacobi_eigen<S: Scalar>(a: &[S], n: usize) -> Result<(Vec<S>, Vec<S>)> {
    check_square(a, n)?;
    let mut m = a.to_vec();
    let mut v = vec![S::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = S::one();
    }
    let total: S = m.iter().map(|&x| x * x).sum();
    let tiny = S::of(64.0) * S::epsilon();
    let threshold = tiny * tiny * total;
    const MAX_SWEEPS: usize = 100;
    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        let off: S = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| m[p * n + q] * m[p * n + q])
            .sum();
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == S::zero() {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (S::of(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + S::one()).sqrt());
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::InvalidParameter("Jacobi sweeps did not converge".to_string()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[i * n + i]
            .partial_cmp(&m[j * n + j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![S::zero(); n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col] = v[row * n + src];
        }
    }
    Ok((values, vectors))
}
