//! Proximal operator of the all-pairs fused lasso plus an `ℓ1` term:
//!
//! `argmin_z ½ Σ_k (z_k - v_k)² + λ1 Σ_k |z_k| + λ2 Σ_{k<k'} |z_k - z_k'|`.
//!
//! The fusion part keeps the order of `v`, so on the monotone cone its
//! penalty is linear: with `v` sorted descending, rank `r` (1-based) gets the
//! coefficient `λ2 (K + 1 - 2r)`. Subtracting those coefficients and
//! projecting back onto the non-increasing cone (pool adjacent violators)
//! gives the exact fused solution. The `ℓ1` part is then a soft threshold,
//! since soft-thresholding commutes with fusion.

/// Reusable buffers so the ADMM inner loop does not allocate.
#[derive(Debug, Default, Clone)]
pub struct FusedProxWorkspace {
    order: Vec<usize>,
    block_sum: Vec<f64>,
    block_len: Vec<usize>,
}

#[inline]
pub(crate) fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// In-place version of [`fused_prox`].
pub fn fused_prox_in_place(
    values: &mut [f64],
    lambda2: f64,
    lambda1: f64,
    ws: &mut FusedProxWorkspace,
) {
    let k = values.len();
    if lambda2 > 0.0 && k > 1 {
        if k == 2 {
            let (a, b) = (values[0], values[1]);
            let gap = (a - b).abs();
            if gap <= 2.0 * lambda2 {
                let m = 0.5 * (a + b);
                values[0] = m;
                values[1] = m;
            } else if a > b {
                values[0] = a - lambda2;
                values[1] = b + lambda2;
            } else {
                values[0] = a + lambda2;
                values[1] = b - lambda2;
            }
        } else {
            ws.order.clear();
            ws.order.extend(0..k);
            ws.order.sort_unstable_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
            ws.block_sum.clear();
            ws.block_len.clear();
            for (r, &idx) in ws.order.iter().enumerate() {
                let shift = lambda2 * (k as f64 - 1.0 - 2.0 * r as f64);
                ws.block_sum.push(values[idx] - shift);
                ws.block_len.push(1);
                // merge while the previous block's mean is below the last one's
                while ws.block_sum.len() > 1 {
                    let last = ws.block_sum.len() - 1;
                    let (s1, n1) = (ws.block_sum[last - 1], ws.block_len[last - 1] as f64);
                    let (s2, n2) = (ws.block_sum[last], ws.block_len[last] as f64);
                    if s1 / n1 < s2 / n2 {
                        ws.block_sum[last - 1] += s2;
                        ws.block_len[last - 1] += ws.block_len[last];
                        ws.block_sum.pop();
                        ws.block_len.pop();
                    } else {
                        break;
                    }
                }
            }
            let mut pos = 0;
            for (sum, &len) in ws.block_sum.iter().zip(&ws.block_len) {
                let mean = sum / len as f64;
                for &idx in &ws.order[pos..pos + len] {
                    values[idx] = mean;
                }
                pos += len;
            }
        }
    }
    if lambda1 > 0.0 {
        for v in values.iter_mut() {
            *v = soft_threshold(*v, lambda1);
        }
    }
}

/// Exact proximal operator of the fused-lasso penalty over `K` group values.
pub fn fused_prox(v: &[f64], lambda2: f64, lambda1: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    fused_prox_in_place(&mut out, lambda2, lambda1, &mut FusedProxWorkspace::default());
    out
}
