//! ADMM for the (joint) graphical lasso.
//!
//! Minimizes
//!
//! ```text
//! Σ_k n_k [tr(S_k Θ_k) - log det Θ_k]
//!   + λ1 Σ_k Σ_{i≠j} |θ_k,ij| + λ2 Σ_{k<k'} Σ_{i,j} |θ_k,ij - θ_k',ij|
//! ```
//!
//! by splitting `Θ = Z`. The `Θ` step has a closed form through the
//! eigendecomposition of `ρ(Z - U) - n_k S_k`; the `Z` step applies the
//! fused-lasso prox entrywise across groups. Indefinite `S_k` are fine, the
//! `Θ` step always returns a positive-definite matrix.
//!
//! Iterations run on the objective divided by the mean weight `Σ n_k / K`,
//! so the ADMM penalty and the dual residual are on a per-observation scale.

use nalgebra::{DMatrix, SymmetricEigen};

use super::fused::{fused_prox_in_place, FusedProxWorkspace};
use super::SolverOptions;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, symmetrize};

/// Entries of the split variable below this magnitude are reported as zeros.
pub const ZERO_THRESHOLD: f64 = 1e-8;

/// Primal/dual iterate, reusable as a warm start for a neighbouring problem.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub z: Vec<DMatrix<f64>>,
    pub u: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone)]
pub struct AdmmOutcome {
    pub matrices: Vec<DMatrix<f64>>,
    pub converged: bool,
    pub iterations: usize,
    pub state: AdmmState,
}

fn validate(s: &[DMatrix<f64>], n: &[f64], lambda1: f64, lambda2: f64) -> Result<()> {
    if s.is_empty() || s.len() != n.len() {
        return Err(Error::InvalidInput("need one sample weight per covariance".into()));
    }
    if !(lambda1 >= 0.0 && lambda2 >= 0.0) || !lambda1.is_finite() || !lambda2.is_finite() {
        return Err(Error::InvalidInput("regularization must be finite and non-negative".into()));
    }
    let p = s[0].nrows();
    for (k, sk) in s.iter().enumerate() {
        if !sk.is_square() || sk.nrows() != p {
            return Err(Error::DimensionMismatch { expected: p, got: sk.nrows() });
        }
        if sk.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("covariance {k} has non-finite entries")));
        }
        if let Some(i) = (0..p).find(|&i| sk[(i, i)] <= 0.0) {
            return Err(Error::NotComputable(format!(
                "covariance {k} has non-positive variance for variable {i}"
            )));
        }
        if !(n[k] > 0.0) {
            return Err(Error::InvalidInput("sample weights must be positive".into()));
        }
    }
    if lambda1 == 0.0 && lambda2 == 0.0 && s.iter().any(|sk| cholesky(sk).is_err()) {
        return Err(Error::RegularizationRequired);
    }
    Ok(())
}

/// `Z = diag(1/s_ii)` with the dual that makes it a fixed point of the `Θ`
/// step, `U = -n offdiag(S) / ρ`.
fn initial_state(s: &[DMatrix<f64>], n: &[f64], rho: f64) -> AdmmState {
    let z = s
        .iter()
        .map(|sk| DMatrix::from_diagonal(&sk.diagonal().map(|d| 1.0 / d)))
        .collect::<Vec<_>>();
    let u = s
        .iter()
        .zip(n)
        .map(|(sk, &nk)| {
            let mut u = sk * (-nk / rho);
            u.fill_diagonal(0.0);
            u
        })
        .collect();
    AdmmState { z, u }
}

/// Closed-form minimizer of `n [tr(SΘ) - log det Θ] + ρ/2 ‖Θ - A‖²`.
fn theta_step(s: &DMatrix<f64>, n: f64, a: &DMatrix<f64>, rho: f64) -> DMatrix<f64> {
    let m = symmetrize(&(a * rho - s * n));
    let eig = SymmetricEigen::new(m);
    let p = s.nrows();
    let mut scaled = eig.eigenvectors.clone();
    for (j, &d) in eig.eigenvalues.iter().enumerate() {
        let t = (d + (d * d + 4.0 * rho * n).sqrt()) / (2.0 * rho);
        scaled.column_mut(j).scale_mut(t);
    }
    let theta = scaled * eig.eigenvectors.transpose();
    debug_assert_eq!(theta.nrows(), p);
    symmetrize(&theta)
}

/// Runs ADMM from `init` (or `diag(1/s_ii)` when absent).
pub fn solve(
    s: &[DMatrix<f64>],
    n: &[f64],
    lambda1: f64,
    lambda2: f64,
    opts: &SolverOptions,
    init: Option<&AdmmState>,
) -> Result<AdmmOutcome> {
    opts.validate()?;
    validate(s, n, lambda1, lambda2)?;
    let k = s.len();
    let p = s[0].nrows();
    let rho = opts.admm_penalty;
    // The penalty parameter acts on the objective divided by the mean weight.
    let scale = n.iter().sum::<f64>() / k as f64;
    let n: Vec<f64> = n.iter().map(|w| w / scale).collect();
    let mut state = match init {
        Some(st) if st.z.len() == k && st.z[0].nrows() == p => st.clone(),
        _ => initial_state(s, &n, rho),
    };
    let mut theta: Vec<DMatrix<f64>> = state.z.clone();
    let mut ws = FusedProxWorkspace::default();
    let mut buf = vec![0.0; k];
    let (l1, l2) = (lambda1 / (rho * scale), lambda2 / (rho * scale));

    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        for g in 0..k {
            theta[g] = theta_step(&s[g], n[g], &(&state.z[g] - &state.u[g]), rho);
        }
        let mut dual = 0.0_f64;
        let mut primal = 0.0_f64;
        for i in 0..p {
            for j in i..p {
                for g in 0..k {
                    buf[g] = theta[g][(i, j)] + state.u[g][(i, j)];
                }
                fused_prox_in_place(&mut buf, l2, if i == j { 0.0 } else { l1 }, &mut ws);
                for g in 0..k {
                    let z_new = buf[g];
                    dual = dual.max((z_new - state.z[g][(i, j)]).abs());
                    state.z[g][(i, j)] = z_new;
                    state.z[g][(j, i)] = z_new;
                    let r = theta[g][(i, j)] - z_new;
                    primal = primal.max(r.abs());
                    let u_new = state.u[g][(i, j)] + r;
                    state.u[g][(i, j)] = u_new;
                    state.u[g][(j, i)] = u_new;
                }
            }
        }
        if primal <= opts.tol && rho * dual <= opts.tol {
            converged = true;
            break;
        }
    }

    let matrices = state
        .z
        .iter()
        .zip(&theta)
        .map(|(z, th)| {
            let reported = z.map(|v| if v.abs() < ZERO_THRESHOLD { 0.0 } else { v });
            if cholesky(&reported).is_ok() {
                reported
            } else {
                th.clone()
            }
        })
        .collect();
    Ok(AdmmOutcome { matrices, converged, iterations, state })
}

/// Penalized log-likelihood that the solver maximizes (sign flipped back).
pub fn objective(
    s: &[DMatrix<f64>],
    n: &[f64],
    lambda1: f64,
    lambda2: f64,
    theta: &[DMatrix<f64>],
) -> Result<f64> {
    let p = s[0].nrows();
    let mut value = 0.0;
    for g in 0..s.len() {
        let ld = crate::linalg::log_det_spd(&theta[g])?;
        value += n[g] * (ld - crate::linalg::trace_product(&theta[g], &s[g]));
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    value -= lambda1 * theta[g][(i, j)].abs();
                }
            }
        }
    }
    for a in 0..s.len() {
        for b in (a + 1)..s.len() {
            value -= lambda2 * (&theta[a] - &theta[b]).abs().sum();
        }
    }
    Ok(value)
}
