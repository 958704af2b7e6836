//! Numerical kernels shared by the algorithms: sphere sampling, truncated
//! SVD, projections, least squares, the unit-ball argmax and the
//! sin-theta subspace distance.
//!
//! Everything here is a pure function of its inputs plus an explicitly
//! passed random stream.

mod decomp;
mod matrix;

pub use decomp::{symmetric_eigen, thin_svd, HouseholderQr, Svd, SymmetricEigen};
pub use matrix::{axpy, basis_vector, dot, norm, scaled, sub, Matrix};

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `d × τ` matrix with orthonormal columns. `τ = 0` is legal.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalBasis<T> {
    columns: Matrix<T>,
}

impl<T: Real> OrthonormalBasis<T> {
    pub fn empty(dim: usize) -> Self {
        Self {
            columns: Matrix::zeros(dim, 0),
        }
    }

    /// Checks `max |BᵀB − I| < T::ORTHO_TOL` and `τ ≤ d`.
    pub fn new(columns: Matrix<T>) -> Result<Self> {
        if columns.cols() > columns.rows() {
            return Err(Error::InvalidRank {
                k: columns.cols(),
                max: columns.rows(),
            });
        }
        let deviation = orthonormality_deviation(&columns);
        if !(deviation < T::ORTHO_TOL) {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { columns })
    }

    /// The first `k` standard basis vectors of `R^dim`.
    pub fn standard(dim: usize, k: usize) -> Self {
        assert!(k <= dim);
        Self {
            columns: Matrix::from_fn(dim, k, |i, j| if i == j { T::one() } else { T::zero() }),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.columns.rows()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.columns.cols()
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[T] {
        self.columns.column(j)
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.columns
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.columns
    }

    /// `Bᵀv`, the coordinates of `v` in this basis.
    pub fn coordinates(&self, v: &[T]) -> Result<Vec<T>> {
        self.columns.tr_mul_vec(v)
    }

    /// `B·w`.
    pub fn combine(&self, w: &[T]) -> Result<Vec<T>> {
        self.columns.mul_vec(w)
    }

    /// `B·Bᵀv`, the orthogonal projection onto the span.
    pub fn project(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "OrthonormalBasis::project",
                expected: self.dim(),
                found: v.len(),
            });
        }
        self.combine(&self.coordinates(v)?)
    }

    /// Append a unit column orthogonal to the current span. The caller
    /// guarantees orthogonality; it is re-checked against `ORTHO_TOL`.
    pub(crate) fn push_unit_column(&mut self, column: &[T]) -> Result<()> {
        for j in 0..self.width() {
            let c = dot(self.column(j), column).abs().as_f64();
            if c >= T::ORTHO_TOL {
                return Err(Error::NotOrthonormal { deviation: c });
            }
        }
        self.columns.push_column(column)
    }

    /// Right-multiply by a `τ × τ` orthogonal matrix (re-parameterize the
    /// same subspace).
    pub fn rotated(&self, rotation: &Matrix<T>) -> Result<Self> {
        Self::new(self.columns.matmul(rotation)?)
    }
}

/// `max |AᵀA − I|` over entries.
pub fn orthonormality_deviation<T: Real>(a: &Matrix<T>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.cols() {
        for j in i..a.cols() {
            let g = dot(a.column(i), a.column(j)).as_f64();
            let target = if i == j { 1.0 } else { 0.0 };
            let dev = (g - target).abs();
            if !(dev <= worst) {
                worst = dev;
            }
        }
    }
    worst
}

/// Uniform draw from the unit sphere in `R^dim` (normalized Gaussian).
pub fn sample_unit_sphere<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Vec<T>> {
    if dim == 0 {
        return Err(Error::InvalidDimension {
            what: "unit sphere",
            value: dim,
        });
    }
    loop {
        let g: Vec<T> = (0..dim).map(|_| T::standard_normal(rng)).collect();
        let n = norm(&g);
        // A zero Gaussian vector has probability zero; redraw if it happens.
        if n > T::zero() && n.is_finite() {
            return Ok(g.into_iter().map(|x| x / n).collect());
        }
    }
}

/// Haar-uniform `dim × dim` orthogonal matrix: QR of a Gaussian matrix with
/// the sign convention `diag(R) ≥ 0`.
pub fn random_orthogonal<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Matrix<T>> {
    if dim == 0 {
        return Err(Error::InvalidDimension {
            what: "orthogonal matrix",
            value: dim,
        });
    }
    let g = Matrix::from_fn(dim, dim, |_, _| T::standard_normal(rng));
    let qr = HouseholderQr::new(&g)?;
    let mut q = qr.q_full();
    for (j, &r) in qr.r_diagonal().iter().enumerate() {
        if r < T::zero() {
            for x in q.column_mut(j) {
                *x = -*x;
            }
        }
    }
    Ok(q)
}

/// Left singular vectors of `a` for its `k` largest singular values, in
/// descending order. Sign/rotation of the basis is unspecified.
pub fn top_k_left_singular_vectors<T: Real>(a: &Matrix<T>, k: usize) -> Result<OrthonormalBasis<T>> {
    let max = a.rows().min(a.cols());
    if k == 0 || k > max {
        return Err(Error::InvalidRank { k, max });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("top_k_left_singular_vectors input"));
    }
    let svd = thin_svd(a);
    OrthonormalBasis::new(svd.u.leading_columns(k))
}

/// All singular values, descending.
pub fn singular_values<T: Real>(a: &Matrix<T>) -> Vec<T> {
    thin_svd(a).singular_values
}

/// The `k`-th largest singular value (1-based `k`).
pub fn kth_singular_value<T: Real>(a: &Matrix<T>, k: usize) -> Result<T> {
    let max = a.rows().min(a.cols());
    if k == 0 || k > max {
        return Err(Error::InvalidRank { k, max });
    }
    Ok(singular_values(a)[k - 1])
}

/// Spectral norm of `(I − B̂B̂ᵀ)B`, i.e. `‖B̂⊥ᵀB‖`. Zero iff
/// `span(B) ⊆ span(B̂)`, never above one.
pub fn subspace_distance<T: Real>(b_hat: &OrthonormalBasis<T>, b: &OrthonormalBasis<T>) -> Result<T> {
    if b_hat.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "subspace_distance",
            expected: b_hat.dim(),
            found: b.dim(),
        });
    }
    if b.width() == 0 {
        return Ok(T::zero());
    }
    let residual = Matrix::from_columns(
        b.dim(),
        &(0..b.width())
            .map(|j| project_orthogonal_complement(b_hat, b.column(j)))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let top = singular_values(&residual)[0];
    Ok(top.max(T::zero()).min(T::one()))
}

/// `v − B(Bᵀv)`.
pub fn project_orthogonal_complement<T: Real>(basis: &OrthonormalBasis<T>, v: &[T]) -> Result<Vec<T>> {
    let p = basis.project(v)?;
    Ok(sub(v, &p))
}

/// Ordinary least squares `argmin_x ‖A x − y‖²` via Householder QR.
/// Rank deficiency is an error, never silently regularized.
pub fn least_squares<T: Real>(design: &Matrix<T>, targets: &[T]) -> Result<Vec<T>> {
    if design.rows() < design.cols() {
        return Err(Error::SingularDesign);
    }
    HouseholderQr::new(design)?.solve_least_squares(targets)
}

/// `argmin_w Σ_t (⟨a_t, B̂w⟩ − r_t)²`: regress rewards on the basis
/// coordinates `B̂ᵀa_t`.
pub fn least_squares_on_subspace<T: Real>(
    actions: &[Vec<T>],
    rewards: &[T],
    basis: &OrthonormalBasis<T>,
) -> Result<Vec<T>> {
    if actions.len() != rewards.len() {
        return Err(Error::DimensionMismatch {
            context: "least_squares_on_subspace rewards",
            expected: actions.len(),
            found: rewards.len(),
        });
    }
    let k = basis.width();
    if actions.len() < k || k == 0 {
        return Err(Error::SingularDesign);
    }
    let coords = actions
        .iter()
        .map(|a| basis.coordinates(a))
        .collect::<Result<Vec<_>>>()?;
    let design = Matrix::from_fn(actions.len(), k, |t, j| coords[t][j]);
    least_squares(&design, rewards)
}

/// Maximizer of `⟨a, θ⟩` over the unit ball: `θ/‖θ‖`, or `e₁` when
/// `‖θ‖ ≤ T::TINY`.
pub fn argmax_unit_ball<T: Real>(theta: &[T]) -> Vec<T> {
    let n = norm(theta);
    if n.as_f64() > T::TINY {
        theta.iter().map(|&x| x / n).collect()
    } else {
        basis_vector(theta.len().max(1), 0)
    }
}

/// Top-`k` eigenvectors of a symmetric matrix with all eigenvalues (descending).
pub fn top_k_eigenvectors<T: Real>(sym: &Matrix<T>, k: usize) -> Result<(OrthonormalBasis<T>, Vec<T>)> {
    let n = sym.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidRank { k, max: n });
    }
    let eig = symmetric_eigen(sym)?;
    let basis = OrthonormalBasis::new(eig.eigenvectors.leading_columns(k))?;
    Ok((basis, eig.eigenvalues))
}
