//! Precision-matrix estimation: graphical lasso, joint graphical lasso,
//! RDA shrinkage and plain inversion.

pub mod admm;
mod fused;

pub use admm::{AdmmState, ZERO_THRESHOLD};
pub use fused::{fused_prox, fused_prox_in_place, FusedProxWorkspace};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{invert_spd, is_symmetric};
use crate::method::Method;

/// ADMM stopping rule and step parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Bound on the max-abs primal and dual residuals.
    pub tol: f64,
    pub max_iter: usize,
    pub admm_penalty: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-5, max_iter: 500, admm_penalty: 1.0 }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 || !(self.admm_penalty > 0.0) {
            return Err(Error::InvalidInput(
                "solver options need tol > 0, max_iter >= 1 and a positive penalty".into(),
            ));
        }
        Ok(())
    }
}

/// Regularization values that produced a [`PrecisionSet`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularization {
    None,
    Lasso { lambda1: f64 },
    Fused { lambda1: f64, lambda2: f64 },
    Shrinkage { rho1: f64, rho2: f64 },
}

impl Regularization {
    /// `(first, second)` parameter values, `NaN` where a slot is unused.
    pub fn values(&self) -> (f64, f64) {
        match *self {
            Regularization::None => (f64::NAN, f64::NAN),
            Regularization::Lasso { lambda1 } => (lambda1, f64::NAN),
            Regularization::Fused { lambda1, lambda2 } => (lambda1, lambda2),
            Regularization::Shrinkage { rho1, rho2 } => (rho1, rho2),
        }
    }
}

/// `K` positive-definite precision matrices and how they were obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionSet {
    pub matrices: Vec<DMatrix<f64>>,
    pub method: Method,
    pub regularization: Regularization,
    pub converged: bool,
    pub iterations: usize,
}

impl PrecisionSet {
    /// Wraps matrices that need no iterative solve (truth, plain inverses).
    pub fn exact(matrices: Vec<DMatrix<f64>>, method: Method) -> Self {
        Self { matrices, method, regularization: Regularization::None, converged: true, iterations: 0 }
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }
}

/// Inverse via Cholesky, plus `log det m`. Fails with `NotComputable` when
/// `m` is not positive definite.
pub fn invert_pd(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if !is_symmetric(m) {
        return Err(Error::InvalidInput("matrix to invert is not symmetric".into()));
    }
    invert_spd(m)
}

/// Sparse precision matrix of one covariance input with sample weight `n`.
pub fn graphical_lasso(
    s: &DMatrix<f64>,
    n: f64,
    lambda1: f64,
    opts: &SolverOptions,
) -> Result<PrecisionSet> {
    graphical_lasso_warm(s, n, lambda1, opts, None).map(|(set, _)| set)
}

/// [`graphical_lasso`] starting from a previous ADMM state.
pub fn graphical_lasso_warm(
    s: &DMatrix<f64>,
    n: f64,
    lambda1: f64,
    opts: &SolverOptions,
    init: Option<&AdmmState>,
) -> Result<(PrecisionSet, AdmmState)> {
    let out = admm::solve(std::slice::from_ref(s), &[n], lambda1, 0.0, opts, init)?;
    let set = PrecisionSet {
        matrices: out.matrices,
        method: Method::GlQda,
        regularization: Regularization::Lasso { lambda1 },
        converged: out.converged,
        iterations: out.iterations,
    };
    Ok((set, out.state))
}

/// Jointly estimated precision matrices with sparsity (`lambda1`) and
/// cross-group fusion (`lambda2`) penalties.
pub fn joint_graphical_lasso(
    s: &[DMatrix<f64>],
    n: &[f64],
    lambda1: f64,
    lambda2: f64,
    opts: &SolverOptions,
) -> Result<PrecisionSet> {
    joint_graphical_lasso_warm(s, n, lambda1, lambda2, opts, None).map(|(set, _)| set)
}

pub fn joint_graphical_lasso_warm(
    s: &[DMatrix<f64>],
    n: &[f64],
    lambda1: f64,
    lambda2: f64,
    opts: &SolverOptions,
    init: Option<&AdmmState>,
) -> Result<(PrecisionSet, AdmmState)> {
    if s.len() < 2 {
        return Err(Error::InvalidInput("joint estimation needs at least two groups".into()));
    }
    let out = admm::solve(s, n, lambda1, lambda2, opts, init)?;
    let set = PrecisionSet {
        matrices: out.matrices,
        method: Method::Jgl,
        regularization: Regularization::Fused { lambda1, lambda2 },
        converged: out.converged,
        iterations: out.iterations,
    };
    Ok((set, out.state))
}

/// Friedman's shrinkage: blend each group covariance with the pooled one,
/// then shrink towards `tr/p · I`.
pub fn rda_covariances(
    covariances: &[DMatrix<f64>],
    pooled: &DMatrix<f64>,
    rho1: f64,
    rho2: f64,
) -> Result<Vec<DMatrix<f64>>> {
    if !(0.0..=1.0).contains(&rho1) || !(0.0..=1.0).contains(&rho2) {
        return Err(Error::InvalidInput(format!("shrinkage weights ({rho1}, {rho2}) outside [0, 1]")));
    }
    let p = pooled.nrows();
    Ok(covariances
        .iter()
        .map(|cov| {
            let blended = cov * (1.0 - rho1) + pooled * rho1;
            let target = blended.trace() / p as f64 * rho2;
            let mut out = blended * (1.0 - rho2);
            for i in 0..p {
                out[(i, i)] += target;
            }
            out
        })
        .collect())
}
