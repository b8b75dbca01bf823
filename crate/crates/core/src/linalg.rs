//! Small dense helpers on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen, LU};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[inline]
pub(crate) fn frob_sq<T: Scalar>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, &v| acc + v * v)
}

/// `a * b^T` without materialising the transpose.
pub(crate) fn mul_tr<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a * b.transpose()
}

/// `a^T * b`.
pub(crate) fn tr_mul<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a.tr_mul(b)
}

/// Sign and natural log of `|det m|`. The log is `-inf` for singular input.
pub fn log_abs_det<T: Scalar>(m: &DMatrix<T>) -> (T, T) {
    assert!(m.is_square(), "determinant of non-square matrix");
    let n = m.nrows();
    let lu = LU::new(m.clone());
    let mut sign = lu.p().determinant::<T>();
    let mut log = T::zero();
    // LU stores U in the upper triangle of its internal matrix.
    let u = lu.u();
    for i in 0..n {
        let d = u[(i, i)];
        if d == T::zero() {
            return (T::zero(), -T::infinity());
        }
        if d < T::zero() {
            sign = -sign;
        }
        log += d.abs().ln();
    }
    (sign, log)
}

/// Cholesky factorisation of a symmetric positive definite matrix.
///
/// On failure, retries once with `jitter * trace / n` added to the diagonal.
pub(crate) fn cholesky_with_jitter<T: Scalar>(
    g: DMatrix<T>,
    jitter: T,
    what: &str,
) -> Result<Cholesky<T, Dyn>> {
    let n = g.nrows();
    let shift = jitter * g.trace() / T::lit(n as f64);
    let retry = g.clone();
    if let Some(c) = Cholesky::new(g) {
        if cholesky_is_sound(&c) {
            return Ok(c);
        }
    }
    if shift > T::zero() {
        let mut g = retry;
        for i in 0..n {
            g[(i, i)] += shift;
        }
        if let Some(c) = Cholesky::new(g) {
            if cholesky_is_sound(&c) {
                return Ok(c);
            }
        }
    }
    Err(Error::Singular(format!("{what} is not positive definite")))
}

fn cholesky_is_sound<T: Scalar>(c: &Cholesky<T, Dyn>) -> bool {
    let l = c.l_dirty();
    (0..l.nrows()).all(|i| {
        let d = l[(i, i)];
        d.is_finite() && d > T::zero()
    })
}

/// Condition number of a symmetric positive semidefinite matrix (`inf` if singular).
pub(crate) fn spd_condition<T: Scalar>(g: &DMatrix<T>) -> T {
    let eig = SymmetricEigen::new(g.clone());
    let max = eig.eigenvalues.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(T::infinity(), |a, b| a.min(b));
    if min <= T::zero() {
        T::infinity()
    } else {
        max / min
    }
}

/// Full singular value decomposition `a = u diag(s) v^T`.
pub(crate) struct Svd<T: Scalar> {
    pub u: DMatrix<T>,
    pub s: DVector<T>,
    pub v: DMatrix<T>,
}

/// SVD computed by `faer` in double precision.
///
/// `nalgebra`'s SVD can return factors that do not reconstruct the input when
/// it is rank-deficient, which is the common case for `L^-1 X Z^T` with few
/// samples or sparse codes.
pub(crate) fn svd<T: Scalar>(a: &DMatrix<T>) -> Result<Svd<T>> {
    let m = faer::Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].as_f64());
    let f = m
        .svd()
        .map_err(|e| Error::Singular(format!("SVD did not converge: {e:?}")))?;
    let (u, s, v) = (f.U(), f.S().column_vector(), f.V());
    Ok(Svd {
        u: DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| T::lit(u[(i, j)])),
        s: DVector::from_fn(s.nrows(), |i, _| T::lit(s[i])),
        v: DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| T::lit(v[(i, j)])),
    })
}

/// Condition number of a general square matrix from its singular values.
pub fn condition_number<T: Scalar>(m: &DMatrix<T>) -> T {
    let Ok(Svd { s, .. }) = svd(m) else {
        return T::infinity();
    };
    let max = s.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let min = s.iter().copied().fold(T::infinity(), |a, b| a.min(b));
    if min <= T::zero() {
        T::infinity()
    } else {
        max / min
    }
}
