//! Independent reference implementations used by the integration tests.
//! None of these share code with the library beyond the public types.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sign(v: f64) -> i64 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// `Σ_{i<j} sign(x_i - x_j) sign(y_i - y_j)` by enumerating all pairs.
pub fn kendall_sign_sum_brute(x: &[f64], y: &[f64]) -> i64 {
    let mut s = 0;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            s += sign(x[i] - x[j]) * sign(y[i] - y[j]);
        }
    }
    s
}

/// `k`-th smallest pairwise absolute difference by full sort.
pub fn qn_order_statistic_brute(x: &[f64]) -> f64 {
    let n = x.len();
    let mut d: Vec<f64> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            d.push((x[i] - x[j]).abs());
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = n / 2 + 1;
    d[h * (h - 1) / 2 - 1]
}

pub fn fused_objective(u: &[f64], v: &[f64], lambda2: f64, lambda1: f64) -> f64 {
    let mut f = 0.0;
    for k in 0..u.len() {
        f += 0.5 * (u[k] - v[k]).powi(2) + lambda1 * u[k].abs();
        for l in (k + 1)..u.len() {
            f += lambda2 * (u[k] - u[l]).abs();
        }
    }
    f
}

/// All ordered set partitions of `0..k` (blocks listed from highest value
/// to lowest).
fn ordered_partitions(k: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(rest: Vec<usize>, acc: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if rest.is_empty() {
            out.push(acc.clone());
            return;
        }
        let m = rest.len();
        for mask in 1..(1u32 << m) {
            let block: Vec<usize> = (0..m).filter(|b| mask & (1 << b) != 0).map(|b| rest[b]).collect();
            let remaining: Vec<usize> = (0..m).filter(|b| mask & (1 << b) == 0).map(|b| rest[b]).collect();
            acc.push(block);
            rec(remaining, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec((0..k).collect(), &mut Vec::new(), &mut out);
    out
}

/// Exhaustive search over fusion patterns: for every ordered partition and
/// every sign (or zero) per block, the stationary block values are
/// `mean(v_B) - λ1 s_B - λ2 (n_below - n_above)`. The best feasible
/// candidate is the exact minimizer.
pub fn fused_prox_exhaustive(v: &[f64], lambda2: f64, lambda1: f64) -> Vec<f64> {
    let k = v.len();
    let mut best = (f64::INFINITY, vec![0.0; k]);
    for part in ordered_partitions(k) {
        let nb = part.len();
        let combos = 3usize.pow(nb as u32);
        for code in 0..combos {
            let mut u = vec![0.0; k];
            let mut c = code;
            let mut above = 0usize;
            for block in &part {
                let s = (c % 3) as i64 - 1;
                c /= 3;
                let below = k - above - block.len();
                let mean = block.iter().map(|&i| v[i]).sum::<f64>() / block.len() as f64;
                let value = if s == 0 {
                    0.0
                } else {
                    mean - lambda1 * s as f64 - lambda2 * (below as f64 - above as f64)
                };
                for &i in block {
                    u[i] = value;
                }
                above += block.len();
            }
            let f = fused_objective(&u, v, lambda2, lambda1);
            if f < best.0 {
                best = (f, u);
            }
        }
    }
    best.1
}

/// Random symmetric positive-definite matrix `AᵀA / m + δ I`.
pub fn random_spd<R: Rng>(rng: &mut R, p: usize, delta: f64) -> DMatrix<f64> {
    let m = p + 3;
    let a = DMatrix::from_fn(m, p, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let s = a.transpose() * &a / m as f64 + DMatrix::identity(p, p) * delta;
    (&s + s.transpose()) * 0.5
}

/// Largest violation of the graphical lasso optimality conditions,
/// divided by `n`:
/// off-diagonal non-zeros need `n s_ij - n w_ij + λ sign θ_ij = 0`,
/// zeros need `|n s_ij - n w_ij| ≤ λ`, diagonals need `s_ii = w_ii`.
pub fn gl_kkt_violation(s: &DMatrix<f64>, n: f64, lambda: f64, theta: &DMatrix<f64>) -> f64 {
    let w = theta.clone().try_inverse().expect("invertible");
    let p = s.nrows();
    let mut worst = 0.0_f64;
    for i in 0..p {
        for j in 0..p {
            let g = n * (s[(i, j)] - w[(i, j)]);
            let v = if i == j {
                g.abs()
            } else if theta[(i, j)] != 0.0 {
                (g + lambda * theta[(i, j)].signum()).abs()
            } else {
                (g.abs() - lambda).max(0.0)
            };
            worst = worst.max(v / n);
        }
    }
    worst
}

/// `Γ(df/2)` for positive integer `df`.
fn gamma_half(df: u32) -> f64 {
    if df % 2 == 0 {
        (1..df / 2).map(|i| i as f64).product()
    } else {
        let mut g = std::f64::consts::PI.sqrt();
        let mut a = 0.5;
        while a < 0.5 * df as f64 - 1e-12 {
            g *= a;
            a += 1.0;
        }
        g
    }
}

/// `P(χ²(df) ≤ q)` by composite Simpson on the substitution `x = t²`.
pub fn chi_square_cdf_simpson(q: f64, df: u32) -> f64 {
    let norm = 2f64.powf(0.5 * df as f64) * gamma_half(df);
    let f = |t: f64| 2.0 * t.powi(df as i32 - 1) * (-0.5 * t * t).exp() / norm;
    let b = q.sqrt();
    let m = 20_000;
    let h = b / m as f64;
    let mut acc = f(0.0) + f(b);
    for i in 1..m {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Index of the largest Gaussian log-density, with shared `-p/2 log 2π`
/// dropped.
pub fn bayes_by_density(
    x: &[f64],
    means: &[nalgebra::DVector<f64>],
    precisions: &[DMatrix<f64>],
    priors: &[f64],
) -> usize {
    let xv = nalgebra::DVector::from_column_slice(x);
    let mut best = (f64::NEG_INFINITY, 0);
    for k in 0..means.len() {
        let d = &xv - &means[k];
        let det = precisions[k].determinant();
        let logpdf = 0.5 * det.ln() - 0.5 * (d.transpose() * &precisions[k] * &d)[(0, 0)] + priors[k].ln();
        if logpdf > best.0 {
            best = (logpdf, k);
        }
    }
    best.1
}
