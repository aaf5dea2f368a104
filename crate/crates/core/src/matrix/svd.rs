//! Singular values for diagnostics.
//!
//! Small matrices use one-sided (Hestenes) Jacobi. Large ones only need the
//! leading few values, so they go through randomized subspace iteration and
//! a Jacobi pass on the projected matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{DenseMatrix, Scalar};
use crate::error::{Error, Result};

/// Above this size the randomized route is used.
const DIRECT_LIMIT: usize = 512;
const OVERSAMPLE: usize = 20;
const POWER_ITERS: usize = 8;
const MAX_SWEEPS: usize = 80;

/// The `k` largest singular values of `a`, nonincreasing.
pub fn singular_values<T: Scalar>(a: &DenseMatrix<T>, k: usize) -> Result<Vec<f64>> {
    let p = a.rows().min(a.cols());
    if p == 0 {
        return Err(Error::EmptyMatrix);
    }
    if k > p {
        return Err(Error::InvalidInput(format!("requested {k} singular values of a rank-{p} shape")));
    }
    if p <= DIRECT_LIMIT || k + OVERSAMPLE >= p {
        let mut s = jacobi_singular_values(a);
        s.truncate(k);
        Ok(s)
    } else {
        randomized_singular_values(a, k)
    }
}

/// All singular values by one-sided Jacobi on the columns of `a` (or `a^H` if wide).
pub(crate) fn jacobi_singular_values<T: Scalar>(a: &DenseMatrix<T>) -> Vec<f64> {
    let work = if a.rows() >= a.cols() { a.clone() } else { a.adjoint() };
    let n = work.cols();
    let mut cols: Vec<Vec<T>> = (0..n).map(|j| work.column(j)).collect();
    jacobi_columns(&mut cols);
    let mut s: Vec<f64> =
        cols.iter().map(|c| c.iter().map(|v| v.abs_sqr()).sum::<f64>().sqrt()).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

fn jacobi_columns<T: Scalar>(cols: &mut [Vec<T>]) {
    let n = cols.len();
    let tol = 1e-15;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (left, right) = cols.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                let alpha: f64 = cp.iter().map(|v| v.abs_sqr()).sum();
                let beta: f64 = cq.iter().map(|v| v.abs_sqr()).sum();
                let gamma = cp.iter().zip(cq.iter()).fold(T::zero(), |acc, (&x, &y)| acc + x.conj() * y);
                let g = gamma.abs();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate the phase of column q so that the coupling is real and positive.
                let phase = gamma.conj() / T::from_real(g);
                for v in cq.iter_mut() {
                    *v *= phase;
                }
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (c, s) = (T::from_real(c), T::from_real(s));
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

fn orthonormalize<T: Scalar>(m: &mut DenseMatrix<T>) {
    let cols = m.cols();
    let mut basis: Vec<Vec<T>> = (0..cols).map(|j| m.column(j)).collect();
    for j in 0..cols {
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for i in 0..j {
                let (done, rest) = basis.split_at_mut(j);
                let qi = &done[i];
                let proj = qi.iter().zip(rest[0].iter()).fold(T::zero(), |acc, (&a, &b)| acc + a.conj() * b);
                for (v, &q) in rest[0].iter_mut().zip(qi) {
                    *v -= proj * q;
                }
            }
        }
        let norm = basis[j].iter().map(|v| v.abs_sqr()).sum::<f64>().sqrt();
        let inv = if norm > 0.0 { T::from_real(1.0 / norm) } else { T::zero() };
        for v in &mut basis[j] {
            *v *= inv;
        }
    }
    for (j, col) in basis.iter().enumerate() {
        m.set_column(j, col);
    }
}

fn randomized_singular_values<T: Scalar>(a: &DenseMatrix<T>, k: usize) -> Result<Vec<f64>> {
    let l = (k + OVERSAMPLE).min(a.rows().min(a.cols()));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_5eed);
    let omega = DenseMatrix::<T>::from_fn(a.cols(), l, |_, _| {
        let x: f64 = StandardNormal.sample(&mut rng);
        T::from_real(x)
    });
    let ah = a.adjoint();
    let mut q = a.matmul(&omega)?;
    orthonormalize(&mut q);
    for _ in 0..POWER_ITERS {
        let mut z = ah.matmul(&q)?;
        orthonormalize(&mut z);
        q = a.matmul(&z)?;
        orthonormalize(&mut q);
    }
    // Singular values of Q^H A equal those of A restricted to span(Q).
    let projected = q.adjoint().matmul(a)?;
    let mut s = jacobi_singular_values(&projected);
    s.truncate(k);
    Ok(s)
}
