//! The `Qn` scale estimator of Rousseeuw and Croux.
//!
//! `Qn` is the `k`-th smallest of the `n(n-1)/2` absolute pairwise
//! differences, with `h = ⌊n/2⌋ + 1` and `k = C(h, 2)`, multiplied by the
//! Gaussian consistency constant [`QN_CONSISTENCY`]. Finite-sample correction
//! factors are not applied.
//!
//! The pairwise differences are enumerated explicitly and the order
//! statistic is found by selection, which is `O(n²)` time and memory.

use crate::error::{Error, Result};

/// Makes `Qn` consistent for the standard deviation at the normal model.
pub const QN_CONSISTENCY: f64 = 2.2219;

/// Rank (1-based) of the pairwise-difference order statistic used by `Qn`.
pub fn qn_rank(n: usize) -> usize {
    let h = n / 2 + 1;
    h * (h - 1) / 2
}

/// The raw order statistic `{|x_i - x_j| : i < j}_(k)`, without the
/// consistency constant.
pub fn qn_order_statistic(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData(n));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in scale input".into()));
    }
    let mut diffs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            diffs.push((x[i] - x[j]).abs());
        }
    }
    let k = qn_rank(n);
    let (_, kth, _) = diffs.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
    Ok(*kth)
}

/// Robust scale: `QN_CONSISTENCY · qn_order_statistic(x)`.
pub fn qn_scale(x: &[f64]) -> Result<f64> {
    Ok(QN_CONSISTENCY * qn_order_statistic(x)?)
}
