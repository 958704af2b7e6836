//! Dense factorizations: Householder QR, one-sided Jacobi SVD and cyclic
//! Jacobi for symmetric eigenproblems. Sizes here are tiny (d ≈ 10,
//! M ≈ 50), so the Jacobi methods are accurate and fast enough.

use super::matrix::{axpy, dot, norm, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 80;

/// Householder QR of an `m × n` matrix with `m ≥ n`.
///
/// Stores reflectors in place; `r()` and `apply_qt()` read them back.
pub struct HouseholderQr<T> {
    qr: Matrix<T>,
    /// Scaled reflector heads; `v_k = [1, qr[k+1.., k]]`, `H_k = I − beta_k v vᵀ`.
    betas: Vec<T>,
    diag: Vec<T>,
}

impl<T: Real> HouseholderQr<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        let (m, n) = (a.rows(), a.cols());
        if m < n {
            return Err(Error::DimensionMismatch {
                context: "HouseholderQr (rows >= cols)",
                expected: n,
                found: m,
            });
        }
        let mut qr = a.clone();
        let mut betas = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        for k in 0..n {
            let col = qr.column(k);
            let alpha = norm(&col[k..]);
            if alpha == T::zero() {
                betas.push(T::zero());
                diag.push(T::zero());
                continue;
            }
            let x0 = col[k];
            // Reflect onto −sign(x0)·alpha·e_k to avoid cancellation.
            let r_kk = if x0 >= T::zero() { -alpha } else { alpha };
            let v0 = x0 - r_kk;
            {
                let c = qr.column_mut(k);
                for x in c[k + 1..].iter_mut() {
                    *x /= v0;
                }
                c[k] = r_kk;
            }
            let beta = -v0 / r_kk;
            betas.push(beta);
            diag.push(r_kk);
            for j in k + 1..n {
                let s = {
                    let v = &qr.column(k)[k + 1..];
                    let c = qr.column(j);
                    c[k] + dot(v, &c[k + 1..])
                };
                let f = beta * s;
                let v: Vec<T> = qr.column(k)[k + 1..].to_vec();
                let c = qr.column_mut(j);
                c[k] -= f;
                axpy(-f, &v, &mut c[k + 1..]);
            }
        }
        Ok(Self { qr, betas, diag })
    }

    /// Apply `Qᵀ` to a length-`m` vector in place.
    pub fn apply_qt(&self, y: &mut [T]) {
        let n = self.betas.len();
        for k in 0..n {
            let beta = self.betas[k];
            if beta == T::zero() {
                continue;
            }
            let v = &self.qr.column(k)[k + 1..];
            let s = y[k] + dot(v, &y[k + 1..]);
            let f = beta * s;
            y[k] -= f;
            axpy(-f, v, &mut y[k + 1..]);
        }
    }

    /// Apply `Q` to a length-`m` vector in place.
    pub fn apply_q(&self, y: &mut [T]) {
        for k in (0..self.betas.len()).rev() {
            let beta = self.betas[k];
            if beta == T::zero() {
                continue;
            }
            let v = &self.qr.column(k)[k + 1..];
            let s = y[k] + dot(v, &y[k + 1..]);
            let f = beta * s;
            y[k] -= f;
            axpy(-f, v, &mut y[k + 1..]);
        }
    }

    pub fn r_diagonal(&self) -> &[T] {
        &self.diag
    }

    /// Upper-triangular `n × n` factor.
    pub fn r(&self) -> Matrix<T> {
        let n = self.betas.len();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i < j {
                self.qr[(i, j)]
            } else {
                T::zero()
            }
        })
    }

    /// Full `m × m` orthogonal factor.
    pub fn q_full(&self) -> Matrix<T> {
        let m = self.qr.rows();
        let mut q = Matrix::identity(m);
        for j in 0..m {
            self.apply_q(q.column_mut(j));
        }
        q
    }

    /// Numerical rank test on `|R_ii|` relative to the largest diagonal entry.
    pub fn is_full_rank(&self) -> bool {
        let (m, n) = (self.qr.rows(), self.betas.len());
        let scale = self.diag.iter().fold(T::zero(), |a, d| a.max(d.abs()));
        if scale == T::zero() {
            return n == 0;
        }
        let tol = T::epsilon() * T::of_usize(m.max(n)) * T::of(16.0) * scale;
        self.diag.iter().all(|d| d.abs() > tol)
    }

    /// Least-squares solution of `A x ≈ b`; errors on numerical rank deficiency.
    pub fn solve_least_squares(&self, b: &[T]) -> Result<Vec<T>> {
        if b.len() != self.qr.rows() {
            return Err(Error::DimensionMismatch {
                context: "least squares right-hand side",
                expected: self.qr.rows(),
                found: b.len(),
            });
        }
        if !self.is_full_rank() {
            return Err(Error::SingularDesign);
        }
        let n = self.betas.len();
        let mut y = b.to_vec();
        self.apply_qt(&mut y);
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.qr[(i, j)] * x[j];
            }
            x[i] = s / self.diag[i];
        }
        Ok(x)
    }
}

/// Thin SVD `A = U·diag(s)·Vᵀ` with `r = min(rows, cols)` components,
/// singular values in descending order.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub singular_values: Vec<T>,
    pub v: Matrix<T>,
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn thin_svd<T: Real>(a: &Matrix<T>) -> Svd<T> {
    if a.rows() >= a.cols() {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.transpose());
        Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        }
    }
}

fn jacobi_tall<T: Real>(a: &Matrix<T>) -> Svd<T> {
    let (m, n) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut v = Matrix::<T>::identity(n);
    let tol = T::epsilon() * T::of_usize(m.max(1));
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(w.column(p), w.column(p));
                let beta = dot(w.column(q), w.column(q));
                let gamma = dot(w.column(p), w.column(q));
                if gamma == T::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::of(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut w, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let sigmas: Vec<T> = (0..n).map(|j| norm(w.column(j))).collect();
    order.sort_by(|&i, &j| sigmas[j].partial_cmp(&sigmas[i]).unwrap_or(std::cmp::Ordering::Equal));

    let smax = sigmas.iter().fold(T::zero(), |acc, &s| acc.max(s));
    let cutoff = smax * T::epsilon() * T::of_usize(m.max(n));
    let mut u_cols: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut v_cols = Vec::with_capacity(n);
    let mut svals = Vec::with_capacity(n);
    for &j in &order {
        let s = sigmas[j];
        svals.push(s);
        v_cols.push(v.column(j).to_vec());
        if s > cutoff && s > T::zero() {
            u_cols.push(w.column(j).iter().map(|&x| x / s).collect());
        } else {
            u_cols.push(Vec::new());
        }
    }
    // Null directions: complete the left vectors to an orthonormal set.
    complete_orthonormal(m, &mut u_cols);
    Svd {
        u: Matrix::from_columns(m, &u_cols).expect("consistent column length"),
        singular_values: svals,
        v: Matrix::from_columns(n, &v_cols).expect("consistent column length"),
    }
}

#[inline]
fn rotate_columns<T: Real>(a: &mut Matrix<T>, p: usize, q: usize, c: T, s: T) {
    let rows = a.rows();
    for i in 0..rows {
        let x = a[(i, p)];
        let y = a[(i, q)];
        a[(i, p)] = c * x - s * y;
        a[(i, q)] = s * x + c * y;
    }
}

/// Fill empty entries of `cols` with unit vectors orthogonal to all
/// non-empty ones, drawing candidates from the standard basis.
pub(crate) fn complete_orthonormal<T: Real>(dim: usize, cols: &mut [Vec<T>]) {
    let mut candidate = 0usize;
    for idx in 0..cols.len() {
        if !cols[idx].is_empty() {
            continue;
        }
        loop {
            assert!(candidate < dim, "cannot complete more than dim orthonormal vectors");
            let mut e = vec![T::zero(); dim];
            e[candidate] = T::one();
            candidate += 1;
            // Two passes of Gram-Schmidt.
            for _ in 0..2 {
                for c in cols.iter().filter(|c| !c.is_empty()) {
                    let proj = dot(c, &e);
                    axpy(-proj, c, &mut e);
                }
            }
            let n = norm(&e);
            if n > T::of(0.5) {
                cols[idx] = e.into_iter().map(|x| x / n).collect();
                break;
            }
        }
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Matrix<T>,
}

/// Cyclic Jacobi eigenvalue algorithm for symmetric matrices.
pub fn symmetric_eigen<T: Real>(a: &Matrix<T>) -> Result<SymmetricEigen<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "symmetric_eigen (square)",
            expected: n,
            found: a.cols(),
        });
    }
    let mut s = a.clone();
    let mut v = Matrix::<T>::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        let mut diag = T::zero();
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    off += s[(i, j)] * s[(i, j)];
                } else {
                    diag += s[(i, i)] * s[(i, i)];
                }
            }
        }
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = s[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (s[(q, q)] - s[(p, p)]) / (T::of(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (T::one() + theta * theta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let sn = t * c;
                // S ← Jᵀ S J with J the (p, q) rotation.
                for k in 0..n {
                    let skp = s[(k, p)];
                    let skq = s[(k, q)];
                    s[(k, p)] = c * skp - sn * skq;
                    s[(k, q)] = sn * skp + c * skq;
                }
                for k in 0..n {
                    let spk = s[(p, k)];
                    let sqk = s[(q, k)];
                    s[(p, k)] = c * spk - sn * sqk;
                    s[(q, k)] = sn * spk + c * sqk;
                }
                rotate_columns(&mut v, p, q, c, sn);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[(j, j)].partial_cmp(&s[(i, i)]).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues = order.iter().map(|&i| s[(i, i)]).collect();
    let cols: Vec<Vec<T>> = order.iter().map(|&i| v.column(i).to_vec()).collect();
    Ok(SymmetricEigen {
        eigenvalues,
        eigenvectors: Matrix::from_columns(n, &cols)?,
    })
}
