//! Small dense linear-algebra helpers shared by the estimators.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Returns `(m + mᵀ) / 2`, which is bit-exactly symmetric.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let p = m.nrows();
    let mut out = m.clone();
    for i in 0..p {
        for j in (i + 1)..p {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

pub fn is_symmetric(m: &DMatrix<f64>) -> bool {
    m.is_square() && (0..m.nrows()).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]))
}

/// Cholesky factor of a symmetric matrix, or `NotComputable` when it is not
/// numerically positive definite.
pub fn cholesky(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotComputable("matrix has non-finite entries".into()));
    }
    let chol = Cholesky::new(m.clone())
        .ok_or_else(|| Error::NotComputable("matrix is not positive definite".into()))?;
    // nalgebra accepts tiny positive pivots; reject factors whose conditioning
    // makes the inverse meaningless.
    let diag = chol.l_dirty().diagonal();
    let max = diag.iter().cloned().fold(0.0_f64, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) || min / max < 1e-6 {
        return Err(Error::NotComputable("matrix is numerically singular".into()));
    }
    Ok(chol)
}

/// `log det` from a Cholesky factor.
pub fn chol_log_det(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// Inverse of a symmetric positive-definite matrix together with its log
/// determinant.
pub fn invert_spd(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let chol = cholesky(m)?;
    let log_det = chol_log_det(&chol);
    Ok((symmetrize(&chol.inverse()), log_det))
}

pub fn log_det_spd(m: &DMatrix<f64>) -> Result<f64> {
    cholesky(m).map(|c| chol_log_det(&c))
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let p = a.nrows();
    let mut acc = 0.0;
    for i in 0..p {
        for j in 0..p {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Quadratic form `vᵀ m v`.
pub fn quad_form(m: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(m * v))
}

/// Median of a slice; even lengths average the two middle order statistics.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
