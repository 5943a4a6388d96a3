use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `N × p` observation matrix where every row belongs to one of `K`
/// groups.
///
/// Labels are stored zero-based (`0..K`); `group_names` carries the
/// user-facing name of each group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    values: DMatrix<f64>,
    labels: Vec<usize>,
    group_names: Vec<String>,
    variable_names: Vec<String>,
}

impl LabeledDataset {
    /// Builds a dataset from zero-based labels in `0..n_groups`.
    pub fn new(values: DMatrix<f64>, labels: Vec<usize>, n_groups: usize) -> Result<Self> {
        if values.nrows() != labels.len() {
            return Err(Error::DimensionMismatch { expected: values.nrows(), got: labels.len() });
        }
        if values.ncols() == 0 {
            return Err(Error::InvalidInput("dataset has no variables".into()));
        }
        if let Some((idx, _)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let (r, c) = (idx % values.nrows(), idx / values.nrows());
            return Err(Error::InvalidInput(format!("non-finite value at row {r}, column {c}")));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_groups) {
            return Err(Error::InvalidInput(format!("label {bad} outside 0..{n_groups}")));
        }
        let mut sizes = vec![0usize; n_groups];
        for &l in &labels {
            sizes[l] += 1;
        }
        if let Some(k) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidInput(format!("group `{}` is empty", k + 1)));
        }
        let p = values.ncols();
        Ok(Self {
            values,
            labels,
            group_names: (1..=n_groups).map(|k| k.to_string()).collect(),
            variable_names: (1..=p).map(|j| format!("x{j}")).collect(),
        })
    }

    /// Builds a dataset from arbitrary string labels. Groups are ordered
    /// numerically when every label parses as an integer, lexicographically
    /// otherwise.
    pub fn from_named_labels<S: AsRef<str>>(values: DMatrix<f64>, labels: &[S]) -> Result<Self> {
        let mut names: Vec<String> = labels.iter().map(|s| s.as_ref().trim().to_string()).collect();
        names.sort();
        names.dedup();
        if names.iter().all(|n| n.parse::<i64>().is_ok()) {
            names.sort_by_key(|n| n.parse::<i64>().unwrap());
        }
        let index: Vec<usize> = labels
            .iter()
            .map(|s| names.iter().position(|n| n == s.as_ref().trim()).unwrap())
            .collect();
        let k = names.len();
        Ok(Self::new(values, index, k)?.with_group_names(names))
    }

    pub fn with_group_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.group_names.len(), "one name per group");
        self.group_names = names;
        self
    }

    pub fn with_variable_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.n_vars(), "one name per variable");
        self.variable_names = names;
        self
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn n_obs(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_vars(&self) -> usize {
        self.values.ncols()
    }

    pub fn n_groups(&self) -> usize {
        self.group_names.len()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_groups()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Row indices belonging to group `k`, in dataset order.
    pub fn group_indices(&self, k: usize) -> Vec<usize> {
        self.labels.iter().enumerate().filter(|(_, &l)| l == k).map(|(i, _)| i).collect()
    }

    /// The `n_k × p` block of observations in group `k`.
    pub fn group_rows(&self, k: usize) -> DMatrix<f64> {
        self.values.select_rows(&self.group_indices(k))
    }

    /// Replaces the observation matrix, keeping labels and names.
    pub(crate) fn with_values(mut self, values: DMatrix<f64>) -> Self {
        assert_eq!(values.shape(), self.values.shape());
        self.values = values;
        self
    }
}
