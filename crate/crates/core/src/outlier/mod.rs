//! Rowwise and cellwise outlier detection from a fitted model.
//!
//! Rows are flagged when their robust Mahalanobis distance exceeds
//! `√χ²_{0.99}(p)`. Cells are standardized as `(x_ij - m_kj) / t_kj`, with
//! `m_kj` the group median and `t_kj = √(Θ_k⁻¹)_jj`, and flagged against
//! `√χ²_{q_k}(1)` where `q_k = 0.99^{1/(n_k p)}`, so that a clean group has
//! about a 1% chance of any false cell flag.

mod chi2;
mod svg;

pub use chi2::{chi_square_cdf, chi_square_quantile};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::discriminant::DiscriminantModel;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, invert_spd};
use crate::robust_cov::{EstimatorKind, LabeledDataset};

/// Quantile level for the rowwise threshold.
pub const ROW_LEVEL: f64 = 0.99;

/// `√((x_i - μ)ᵀ Θ (x_i - μ))` for every row of `data`.
pub fn mahalanobis_distances(data: &DMatrix<f64>, center: &DVector<f64>, precision: &DMatrix<f64>) -> Result<Vec<f64>> {
    let p = center.len();
    if data.ncols() != p || precision.nrows() != p {
        return Err(Error::DimensionMismatch { expected: p, got: data.ncols() });
    }
    let l = cholesky(precision)?.l();
    Ok((0..data.nrows())
        .map(|i| {
            let d = data.row(i).transpose() - center;
            (l.transpose() * d).norm()
        })
        .collect())
}

/// Per-variable scales `√(Θ⁻¹)_jj`.
pub fn cell_scales(precision: &DMatrix<f64>) -> Result<DVector<f64>> {
    let (cov, _) = invert_spd(precision)?;
    Ok(cov.diagonal().map(f64::sqrt))
}

/// Standardized cell distances `(x_ij - m_j) / √(Θ⁻¹)_jj`.
pub fn cellwise_distances(data: &DMatrix<f64>, medians: &DVector<f64>, precision: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = medians.len();
    if data.ncols() != p || precision.nrows() != p {
        return Err(Error::DimensionMismatch { expected: p, got: data.ncols() });
    }
    let t = cell_scales(precision)?;
    Ok(DMatrix::from_fn(data.nrows(), p, |i, j| (data[(i, j)] - medians[j]) / t[j]))
}

/// Familywise-calibrated quantile level for cells: `0.99^{1/(n_k p)}`.
pub fn cell_level(group_size: usize, p: usize) -> f64 {
    ROW_LEVEL.powf(1.0 / (group_size * p) as f64)
}

/// Distances, thresholds and flags for every row and cell of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierReport {
    pub groups: Vec<usize>,
    pub group_names: Vec<String>,
    pub variable_names: Vec<String>,
    pub row_distances: Vec<f64>,
    pub row_flags: Vec<bool>,
    pub row_threshold: f64,
    /// `N × p`, rows in dataset order.
    pub cell_distances: Vec<Vec<f64>>,
    pub cell_flags: Vec<Vec<bool>>,
    /// One threshold per group.
    pub cell_thresholds: Vec<f64>,
    /// False when the model's centers are not robust.
    pub robust: bool,
    pub warning: Option<String>,
}

impl OutlierReport {
    /// Heatmap code per cell: 0 clean, 1 cellwise outlier, 2 inside a
    /// rowwise-outlying row, 3 both.
    pub fn cell_code(&self, row: usize, col: usize) -> u8 {
        u8::from(self.cell_flags[row][col]) + 2 * u8::from(self.row_flags[row])
    }

    pub fn n_rows(&self) -> usize {
        self.row_distances.len()
    }

    /// Row indices grouped by group, keeping dataset order within a group.
    pub fn rows_by_group(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n_rows()).collect();
        idx.sort_by_key(|&i| (self.groups[i], i));
        idx
    }

    /// CSV: row id, group, `D_i`, row flag, `p` cell distances, `p` cell flags.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,group,distance,row_flag");
        for v in &self.variable_names {
            out.push_str(&format!(",d_{v}"));
        }
        for v in &self.variable_names {
            out.push_str(&format!(",flag_{v}"));
        }
        out.push('\n');
        for i in 0..self.n_rows() {
            out.push_str(&format!(
                "{},{},{},{}",
                i + 1,
                self.group_names[self.groups[i]],
                self.row_distances[i],
                u8::from(self.row_flags[i])
            ));
            for d in &self.cell_distances[i] {
                out.push_str(&format!(",{d}"));
            }
            for &f in &self.cell_flags[i] {
                out.push_str(&format!(",{}", u8::from(f)));
            }
            out.push('\n');
        }
        out
    }

    /// Outlier map: observations along x (ordered by group, separated by
    /// vertical lines), variables along y, colored by [`Self::cell_code`].
    pub fn heatmap_svg(&self) -> String {
        svg::heatmap(self)
    }

    /// `D_i` against the row index with the rowwise threshold line.
    pub fn distance_plot_svg(&self) -> String {
        svg::distance_plot(self)
    }
}

/// Flags rowwise and cellwise outliers of `data` under `model`.
pub fn detect(data: &LabeledDataset, model: &DiscriminantModel) -> Result<OutlierReport> {
    let p = data.n_vars();
    if p != model.n_vars() {
        return Err(Error::DimensionMismatch { expected: model.n_vars(), got: p });
    }
    if data.n_groups() != model.n_groups() {
        return Err(Error::DimensionMismatch { expected: model.n_groups(), got: data.n_groups() });
    }
    let n = data.n_obs();
    let row_threshold = chi_square_quantile(ROW_LEVEL, p as f64)?.sqrt();
    let mut row_distances = vec![0.0; n];
    let mut cell_distances = vec![vec![0.0; p]; n];
    let sizes = data.group_sizes();
    let mut cell_thresholds = Vec::with_capacity(sizes.len());
    for (k, &size) in sizes.iter().enumerate() {
        let theta = &model.precisions().matrices[k];
        let idx = data.group_indices(k);
        let rows = data.values().select_rows(&idx);
        let dist = mahalanobis_distances(&rows, &model.centers()[k], theta)?;
        let cells = cellwise_distances(&rows, &model.medians()[k], theta)?;
        for (r, &i) in idx.iter().enumerate() {
            row_distances[i] = dist[r];
            for j in 0..p {
                cell_distances[i][j] = cells[(r, j)];
            }
        }
        cell_thresholds.push(chi_square_quantile(cell_level(size, p), 1.0)?.sqrt());
    }
    let groups = data.labels().to_vec();
    let row_flags = row_distances.iter().map(|&d| d > row_threshold).collect();
    let cell_flags = cell_distances
        .iter()
        .zip(&groups)
        .map(|(row, &g)| row.iter().map(|d| d.abs() > cell_thresholds[g]).collect())
        .collect();
    let robust = model.spec().kind == EstimatorKind::CellwiseRobust;
    let warning = (!robust).then(|| {
        "classical model: row distances use non-robust centers and precisions; detection may suffer from masking".to_string()
    });
    Ok(OutlierReport {
        groups,
        group_names: data.group_names().to_vec(),
        variable_names: data.variable_names().to_vec(),
        row_distances,
        row_flags,
        row_threshold,
        cell_distances,
        cell_flags,
        cell_thresholds,
        robust,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let x = DMatrix::from_row_slice(2, 2, &[3.0, 4.0, 0.0, 0.0]);
        let d = mahalanobis_distances(&x, &DVector::zeros(2), &DMatrix::identity(2, 2)).unwrap();
        assert!((d[0] - 5.0).abs() < 1e-12);
        assert_eq!(d[1], 0.0);

        let theta = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]));
        let d = mahalanobis_distances(&DMatrix::from_row_slice(1, 2, &[1.0, 0.0]), &DVector::zeros(2), &theta).unwrap();
        assert!((d[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cell_examples() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 4.0, -1.0]);
        let m = DVector::from_vec(vec![1.0, 0.5]);
        let d = cellwise_distances(&x, &m, &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(d[(0, 0)], 0.0);
        assert_eq!(d[(1, 0)], 3.0);
        assert_eq!(d[(1, 1)], -1.5);

        let d = cellwise_distances(
            &DMatrix::from_element(1, 1, 3.0),
            &DVector::zeros(1),
            &DMatrix::from_element(1, 1, 0.25),
        )
        .unwrap();
        assert!((d[(0, 0)] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn non_pd_precision_is_rejected() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(mahalanobis_distances(&DMatrix::zeros(1, 2), &DVector::zeros(2), &bad).is_err());
        assert!(cellwise_distances(&DMatrix::zeros(1, 2), &DVector::zeros(2), &bad).is_err());
    }

    #[test]
    fn cell_level_is_between_row_level_and_one() {
        for np in 2..500 {
            let q = cell_level(np, 1);
            assert!(q > ROW_LEVEL && q < 1.0);
        }
        let base = chi_square_quantile(ROW_LEVEL, 1.0).unwrap();
        assert!(chi_square_quantile(cell_level(20, 3), 1.0).unwrap() > base);
    }
}
