//! Kendall's rank correlation in `O(n log n)`.
//!
//! The sum `Σ_{l<m} sign((x_l - x_m)(y_l - y_m))` is computed exactly as an
//! integer: sort by `(x, y)`, count tied pairs, then count the discordant
//! pairs as inversions of the `y` sequence during a bottom-up merge sort.
//! Tied pairs contribute zero and the denominator is always `n(n-1)/2`.

use std::cmp::Ordering;

use crate::error::{Error, Result};

fn cmp(a: f64, b: f64) -> Ordering {
    // inputs are validated finite, so `-0.0 == 0.0` is treated as a tie like
    // the pairwise definition does
    a.partial_cmp(&b).expect("finite input")
}

fn tied_pairs(run: u64) -> u64 {
    run * run.saturating_sub(1) / 2
}

/// Counts pairs `i < j` with `v[i] > v[j]` while sorting `v` ascending.
fn merge_count_inversions(v: &mut [f64]) -> u64 {
    let n = v.len();
    let mut buf = v.to_vec();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut out) = (start, mid, start);
            while i < mid && j < end {
                if cmp(v[j], v[i]) == Ordering::Less {
                    swaps += (mid - i) as u64;
                    buf[out] = v[j];
                    j += 1;
                } else {
                    buf[out] = v[i];
                    i += 1;
                }
                out += 1;
            }
            buf[out..out + (mid - i)].copy_from_slice(&v[i..mid]);
            out += mid - i;
            buf[out..out + (end - j)].copy_from_slice(&v[j..end]);
            start = end;
        }
        v.copy_from_slice(&buf);
        width *= 2;
    }
    swaps
}

/// Exact value of `Σ_{l<m} sign(x_l - x_m)·sign(y_l - y_m)`.
pub fn kendall_sign_sum(x: &[f64], y: &[f64]) -> Result<i64> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if n < 2 {
        return Err(Error::InsufficientData(n));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in correlation input".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| cmp(x[a], x[b]).then(cmp(y[a], y[b])));

    let (mut tied_x, mut tied_xy) = (0u64, 0u64);
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for w in order.windows(2) {
        let (a, b) = (w[0], w[1]);
        if cmp(x[a], x[b]) == Ordering::Equal {
            run_x += 1;
            if cmp(y[a], y[b]) == Ordering::Equal {
                run_xy += 1;
            } else {
                tied_xy += tied_pairs(run_xy);
                run_xy = 1;
            }
        } else {
            tied_x += tied_pairs(run_x);
            tied_xy += tied_pairs(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    tied_x += tied_pairs(run_x);
    tied_xy += tied_pairs(run_xy);

    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let discordant = merge_count_inversions(&mut ys);

    let mut tied_y = 0u64;
    let mut run_y = 1u64;
    for w in ys.windows(2) {
        if cmp(w[0], w[1]) == Ordering::Equal {
            run_y += 1;
        } else {
            tied_y += tied_pairs(run_y);
            run_y = 1;
        }
    }
    tied_y += tied_pairs(run_y);

    let total = tied_pairs(n as u64);
    Ok(total as i64 - tied_x as i64 - tied_y as i64 + tied_xy as i64 - 2 * discordant as i64)
}

/// Kendall's tau, `2 / (n(n-1)) · Σ_{l<m} sign((x_l - x_m)(y_l - y_m))`.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    let s = kendall_sign_sum(x, y)?;
    let n = x.len() as f64;
    Ok(2.0 * s as f64 / (n * (n - 1.0)))
}
