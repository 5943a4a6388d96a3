//! Classical and cellwise-robust location/scatter summaries.
//!
//! The robust covariance of a group is assembled one pair of variables at a
//! time: `s_ij = Qn(X^i) · Qn(X^j) · τ(X^i, X^j)`, with Kendall's `τ` as the
//! correlation. Because every entry depends on two columns only, a single
//! contaminated cell influences one row and one column of the estimate
//! instead of the whole matrix. The result is exactly symmetric but need not
//! be positive semidefinite.

mod dataset;
mod kendall;
mod qn;

pub use dataset::LabeledDataset;
pub use kendall::{kendall_sign_sum, kendall_tau};
pub use qn::{qn_order_statistic, qn_rank, qn_scale, QN_CONSISTENCY};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::median;

/// Which location/scatter estimators feed the precision solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Arithmetic means and sample covariances.
    Classical,
    /// Marginal medians and Qn/Kendall pairwise covariances.
    CellwiseRobust,
}

/// Per-group centers and covariances plus the pooled covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummaries {
    pub centers: Vec<DVector<f64>>,
    /// Marginal medians, kept for cellwise outlier detection regardless of
    /// `kind`.
    pub medians: Vec<DVector<f64>>,
    pub covariances: Vec<DMatrix<f64>>,
    pub pooled: DMatrix<f64>,
    pub group_sizes: Vec<usize>,
    pub kind: EstimatorKind,
}

impl GroupSummaries {
    pub fn n_groups(&self) -> usize {
        self.covariances.len()
    }

    pub fn n_vars(&self) -> usize {
        self.pooled.nrows()
    }

    pub fn total_size(&self) -> usize {
        self.group_sizes.iter().sum()
    }
}

fn columns(data: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..data.ncols()).map(|j| data.column(j).iter().copied().collect()).collect()
}

/// Cellwise-robust covariance matrix of an `n × p` sample.
pub fn pairwise_cov_matrix(data: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = data.nrows();
    if n < 2 {
        return Err(Error::InsufficientData(n));
    }
    let cols = columns(data);
    let scales = cols.iter().map(|c| qn_scale(c)).collect::<Result<Vec<_>>>()?;
    let p = cols.len();
    let mut s = DMatrix::zeros(p, p);
    for i in 0..p {
        s[(i, i)] = scales[i] * scales[i];
        for j in (i + 1)..p {
            let v = if scales[i] == 0.0 || scales[j] == 0.0 {
                0.0
            } else {
                scales[i] * scales[j] * kendall_tau(&cols[i], &cols[j])?
            };
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    Ok(s)
}

/// Unbiased sample covariance (divisor `n - 1`).
pub fn sample_covariance(data: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = data.nrows();
    if n < 2 {
        return Err(Error::InsufficientData(n));
    }
    let mean = column_means(data);
    let p = data.ncols();
    let mut centered = data.clone();
    for j in 0..p {
        centered.column_mut(j).add_scalar_mut(-mean[j]);
    }
    let raw = centered.transpose() * &centered / (n as f64 - 1.0);
    let mut s = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            s[(i, j)] = raw[(i, j)];
            s[(j, i)] = raw[(i, j)];
        }
    }
    Ok(s)
}

pub fn column_means(data: &DMatrix<f64>) -> DVector<f64> {
    let n = data.nrows() as f64;
    DVector::from_iterator(data.ncols(), data.column_iter().map(|c| c.sum() / n))
}

pub fn column_medians(data: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(
        data.ncols(),
        data.column_iter().map(|c| median(&c.iter().copied().collect::<Vec<_>>())),
    )
}

/// `Σ_k n_k / (N - K) · cov_k`.
pub fn pooled_covariance(covariances: &[DMatrix<f64>], group_sizes: &[usize]) -> DMatrix<f64> {
    let total: usize = group_sizes.iter().sum();
    let denom = (total - group_sizes.len()) as f64;
    let p = covariances[0].nrows();
    let mut pooled = DMatrix::zeros(p, p);
    for (cov, &n) in covariances.iter().zip(group_sizes) {
        pooled += cov * (n as f64 / denom);
    }
    pooled
}

/// Centers and covariances of every group in `data`.
pub fn group_summaries(data: &LabeledDataset, kind: EstimatorKind) -> Result<GroupSummaries> {
    let sizes = data.group_sizes();
    if let Some(k) = sizes.iter().position(|&n| n < 2) {
        return Err(Error::GroupTooSmall { group: data.group_names()[k].clone(), size: sizes[k] });
    }
    let mut centers = Vec::with_capacity(sizes.len());
    let mut medians = Vec::with_capacity(sizes.len());
    let mut covariances = Vec::with_capacity(sizes.len());
    for k in 0..data.n_groups() {
        let rows = data.group_rows(k);
        let med = column_medians(&rows);
        match kind {
            EstimatorKind::Classical => {
                centers.push(column_means(&rows));
                covariances.push(sample_covariance(&rows)?);
            }
            EstimatorKind::CellwiseRobust => {
                centers.push(med.clone());
                covariances.push(pairwise_cov_matrix(&rows)?);
            }
        }
        medians.push(med);
    }
    let pooled = pooled_covariance(&covariances, &sizes);
    Ok(GroupSummaries { centers, medians, covariances, pooled, group_sizes: sizes, kind })
}
