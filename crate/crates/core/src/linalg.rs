//! Small dense symmetric solvers used by the oracle beamformer.
//!
//! Matrices are row-major `n × n` slices. Sizes here are at most
//! `(MAX_ORDER+1)² = 121`, so simple `O(n³)` routines are adequate.

use crate::scalar::Real;

/// Cholesky factorization `A = L Lᵀ`. Fails when a pivot drops below
/// `rel_tol · max(diag(A))`, which is how rank deficiency is detected.
pub fn cholesky<T: Real>(a: &[T], n: usize, rel_tol: T) -> Option<Vec<T>> {
    let max_diag = (0..n).map(|i| a[i * n + i]).fold(T::zero(), T::max);
    if !(max_diag > T::zero()) {
        return None;
    }
    let floor = rel_tol * max_diag;
    let mut l = vec![T::zero(); n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > floor) {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` given the Cholesky factor.
pub fn cholesky_solve<T: Real>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    y
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors stored as columns.
pub fn symmetric_eigen<T: Real>(a: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    let mut m = a.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let two = T::lit(2.0);
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut total = T::zero();
        for i in 0..n {
            for j in 0..n {
                let x = m[i * n + j] * m[i * n + j];
                total += x;
                if i != j {
                    off += x;
                }
            }
        }
        if off <= T::epsilon() * T::epsilon() * total || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
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
    ((0..n).map(|i| m[i * n + i]).collect(), v)
}

/// Minimum-norm least-squares solution of `A x = b` for symmetric PSD `A`.
/// Eigenvalues below `rel_tol · λ_max` are treated as zero. Returns the
/// solution and the numerical rank.
pub fn pseudo_solve<T: Real>(a: &[T], n: usize, b: &[T], rel_tol: T) -> (Vec<T>, usize) {
    let (vals, vecs) = symmetric_eigen(a, n);
    let lmax = vals.iter().copied().fold(T::zero(), T::max);
    let cutoff = rel_tol * lmax;
    let mut x = vec![T::zero(); n];
    let mut rank = 0;
    for (k, &lam) in vals.iter().enumerate() {
        if !(lam > cutoff) || lmax <= T::zero() {
            continue;
        }
        rank += 1;
        let proj = (0..n).fold(T::zero(), |acc, i| acc + vecs[i * n + k] * b[i]);
        let coef = proj / lam;
        for i in 0..n {
            x[i] += coef * vecs[i * n + k];
        }
    }
    (x, rank)
}
