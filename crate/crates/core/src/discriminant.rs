//! The Gaussian Bayes rule
//! `argmin_k (x - μ_k)ᵀ Θ_k (x - μ_k) - log det Θ_k - 2 log π_k`,
//! correct-classification rates, and the KL distance between precision sets.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{chol_log_det, cholesky, invert_spd, log_det_spd, trace_product};
use crate::method::{Method, MethodSpec};
use crate::model_select::{GridRow, SelectionResult};
use crate::precision::{PrecisionSet, Regularization};
use crate::robust_cov::{EstimatorKind, GroupSummaries};

/// Version tag written into persisted models.
pub const MODEL_VERSION: &str = "cellshield-model/1";

/// Outcome of the grid search kept alongside a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionInfo {
    pub bic: f64,
    pub df: usize,
    pub table: Vec<GridRow>,
}

/// A fitted classifier: centers, precisions, priors and selection metadata.
#[derive(Debug, Clone)]
pub struct DiscriminantModel {
    spec: MethodSpec,
    centers: Vec<DVector<f64>>,
    medians: Vec<DVector<f64>>,
    precisions: PrecisionSet,
    priors: Vec<f64>,
    group_sizes: Vec<usize>,
    group_names: Vec<String>,
    variable_names: Vec<String>,
    selection: Option<SelectionInfo>,
    // Cholesky factors `L` with `Θ = L Lᵀ`, and `log det Θ`
    factors: Vec<DMatrix<f64>>,
    log_dets: Vec<f64>,
}

impl DiscriminantModel {
    /// Assembles a model, validating shapes and caching Cholesky factors.
    /// `priors` are renormalized to sum to one.
    pub fn new(
        spec: MethodSpec,
        centers: Vec<DVector<f64>>,
        precisions: PrecisionSet,
        priors: Vec<f64>,
    ) -> Result<Self> {
        let k = centers.len();
        if k == 0 {
            return Err(Error::InvalidInput("model needs at least one group".into()));
        }
        if precisions.len() != k || priors.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: precisions.len().min(priors.len()) });
        }
        let p = centers[0].len();
        for (c, m) in centers.iter().zip(&precisions.matrices) {
            if c.len() != p || m.nrows() != p || m.ncols() != p {
                return Err(Error::DimensionMismatch { expected: p, got: c.len().max(m.nrows()) });
            }
        }
        if priors.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput("priors must be positive".into()));
        }
        let total: f64 = priors.iter().sum();
        let priors = priors.iter().map(|w| w / total).collect();
        let mut factors = Vec::with_capacity(k);
        let mut log_dets = Vec::with_capacity(k);
        for m in &precisions.matrices {
            let chol = cholesky(m)?;
            log_dets.push(chol_log_det(&chol));
            factors.push(chol.l());
        }
        Ok(Self {
            spec,
            medians: centers.clone(),
            centers,
            precisions,
            priors,
            group_sizes: vec![0; k],
            group_names: (1..=k).map(|g| g.to_string()).collect(),
            variable_names: (1..=p).map(|j| format!("x{j}")).collect(),
            selection: None,
            factors,
            log_dets,
        })
    }

    /// Builds the classifier from summaries and a finished grid search, with
    /// priors `n_k / N`.
    pub fn from_selection(spec: MethodSpec, summaries: &GroupSummaries, selection: SelectionResult) -> Result<Self> {
        let priors = summaries.group_sizes.iter().map(|&n| n as f64).collect();
        let mut model = Self::new(spec, summaries.centers.clone(), selection.precisions, priors)?;
        model.medians = summaries.medians.clone();
        model.group_sizes = summaries.group_sizes.clone();
        model.selection = Some(SelectionInfo { bic: selection.bic, df: selection.df, table: selection.table });
        Ok(model)
    }

    pub fn with_names(mut self, groups: Vec<String>, variables: Vec<String>) -> Self {
        assert_eq!(groups.len(), self.n_groups());
        assert_eq!(variables.len(), self.n_vars());
        self.group_names = groups;
        self.variable_names = variables;
        self
    }

    pub fn with_medians(mut self, medians: Vec<DVector<f64>>) -> Self {
        assert_eq!(medians.len(), self.n_groups());
        self.medians = medians;
        self
    }

    pub fn spec(&self) -> MethodSpec {
        self.spec
    }

    pub fn centers(&self) -> &[DVector<f64>] {
        &self.centers
    }

    /// Training-group marginal medians (equal to `centers` for robust fits).
    pub fn medians(&self) -> &[DVector<f64>] {
        &self.medians
    }

    pub fn precisions(&self) -> &PrecisionSet {
        &self.precisions
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn log_dets(&self) -> &[f64] {
        &self.log_dets
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn selection(&self) -> Option<&SelectionInfo> {
        self.selection.as_ref()
    }

    pub fn n_groups(&self) -> usize {
        self.centers.len()
    }

    pub fn n_vars(&self) -> usize {
        self.centers[0].len()
    }

    /// `(x - μ_k)ᵀ Θ_k (x - μ_k)` through the cached factor.
    pub fn squared_distance(&self, x: &[f64], k: usize) -> f64 {
        let l = &self.factors[k];
        let c = &self.centers[k];
        let p = c.len();
        let mut acc = 0.0;
        // (Lᵀ d)_j = Σ_{i ≥ j} L_ij d_i
        for j in 0..p {
            let mut t = 0.0;
            for i in j..p {
                t += l[(i, j)] * (x[i] - c[i]);
            }
            acc += t * t;
        }
        acc
    }

    fn to_document(&self) -> ModelDocument {
        let rows = |m: &DMatrix<f64>| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
        ModelDocument {
            version: MODEL_VERSION.into(),
            method: self.spec.cli_name().into(),
            method_name: self.spec.display_name().into(),
            estimator: self.spec.kind,
            regularization: self.precisions.regularization,
            converged: self.precisions.converged,
            iterations: self.precisions.iterations,
            group_names: self.group_names.clone(),
            variable_names: self.variable_names.clone(),
            group_sizes: self.group_sizes.clone(),
            priors: self.priors.clone(),
            centers: self.centers.iter().map(|c| c.iter().copied().collect()).collect(),
            medians: self.medians.iter().map(|c| c.iter().copied().collect()).collect(),
            precisions: self.precisions.matrices.iter().map(rows).collect(),
            selection: self.selection.clone(),
        }
    }

    /// Serializes to the `cellshield-model/1` JSON document.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.to_document()).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        match value.get("version").and_then(|v| v.as_str()) {
            Some(MODEL_VERSION) => {}
            Some(other) => return Err(Error::UnknownVersion(other.into())),
            None => return Err(Error::UnknownVersion("<missing>".into())),
        }
        let doc: ModelDocument = serde_json::from_value(value).map_err(|e| Error::Serialization(e.to_string()))?;
        let spec: MethodSpec = doc.method.parse()?;
        let to_matrix = |rows: &Vec<Vec<f64>>| -> Result<DMatrix<f64>> {
            let p = rows.len();
            if rows.iter().any(|r| r.len() != p) {
                return Err(Error::Serialization("precision matrix is not square".into()));
            }
            Ok(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
        };
        let matrices = doc.precisions.iter().map(to_matrix).collect::<Result<Vec<_>>>()?;
        let precisions = PrecisionSet {
            matrices,
            method: spec.method,
            regularization: doc.regularization,
            converged: doc.converged,
            iterations: doc.iterations,
        };
        let centers = doc.centers.iter().map(|c| DVector::from_vec(c.clone())).collect();
        let medians = doc.medians.iter().map(|c| DVector::from_vec(c.clone())).collect();
        let mut model = Self::new(spec, centers, precisions, doc.priors.clone())?
            .with_medians(medians)
            .with_names(doc.group_names, doc.variable_names);
        // keep the stored priors bit-exact
        model.priors = doc.priors;
        model.group_sizes = doc.group_sizes;
        model.selection = doc.selection;
        Ok(model)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelDocument {
    version: String,
    method: String,
    method_name: String,
    estimator: EstimatorKind,
    regularization: Regularization,
    converged: bool,
    iterations: usize,
    group_names: Vec<String>,
    variable_names: Vec<String>,
    group_sizes: Vec<usize>,
    priors: Vec<f64>,
    centers: Vec<Vec<f64>>,
    medians: Vec<Vec<f64>>,
    precisions: Vec<Vec<Vec<f64>>>,
    selection: Option<SelectionInfo>,
}

/// Discriminant scores of one observation; smaller is better.
pub fn discriminant_scores(x: &[f64], model: &DiscriminantModel) -> Result<Vec<f64>> {
    if x.len() != model.n_vars() {
        return Err(Error::DimensionMismatch { expected: model.n_vars(), got: x.len() });
    }
    Ok((0..model.n_groups())
        .map(|k| model.squared_distance(x, k) - model.log_dets[k] - 2.0 * model.priors[k].ln())
        .collect())
}

/// Index of the smallest score; ties go to the lowest index.
pub fn argmin(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s < scores[best] {
            best = k;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    /// Zero-based predicted group per row.
    pub predicted: Vec<usize>,
    pub scores: Vec<Vec<f64>>,
    /// Percentage of correct classification, when the truth is known.
    pub correct_pct: Option<f64>,
}

impl ClassificationReport {
    pub fn with_truth(mut self, truth: &[usize]) -> Result<Self> {
        self.correct_pct = Some(correct_classification(&self.predicted, truth)?);
        Ok(self)
    }
}

pub fn correct_classification(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() || truth.is_empty() {
        return Err(Error::DimensionMismatch { expected: predicted.len(), got: truth.len() });
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(100.0 * hits as f64 / truth.len() as f64)
}

/// Classifies every row of `x`.
pub fn classify(x: &DMatrix<f64>, model: &DiscriminantModel) -> Result<ClassificationReport> {
    if x.ncols() != model.n_vars() {
        return Err(Error::DimensionMismatch { expected: model.n_vars(), got: x.ncols() });
    }
    let mut row = vec![0.0; x.ncols()];
    let mut predicted = Vec::with_capacity(x.nrows());
    let mut scores = Vec::with_capacity(x.nrows());
    for i in 0..x.nrows() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = x[(i, j)];
        }
        let s = discriminant_scores(&row, model)?;
        predicted.push(argmin(&s));
        scores.push(s);
    }
    Ok(ClassificationReport { predicted, scores, correct_pct: None })
}

/// `Σ_k [-log det(Θ̂_k Θ_k⁻¹) + tr(Θ̂_k Θ_k⁻¹)] - K p`.
pub fn kl_distance(estimates: &[DMatrix<f64>], truth: &[DMatrix<f64>]) -> Result<f64> {
    if estimates.len() != truth.len() || estimates.is_empty() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: estimates.len() });
    }
    let p = truth[0].nrows();
    let mut total = 0.0;
    for (est, tru) in estimates.iter().zip(truth) {
        if est.shape() != tru.shape() {
            return Err(Error::DimensionMismatch { expected: tru.nrows(), got: est.nrows() });
        }
        let (tru_inv, tru_ld) = invert_spd(tru)?;
        let est_ld = log_det_spd(est)?;
        total += -(est_ld - tru_ld) + trace_product(est, &tru_inv);
    }
    Ok(total - (estimates.len() * p) as f64)
}

/// Model built straight from known parameters (`Method::Qda` semantics).
pub fn oracle_model(means: &[DVector<f64>], precisions: &[DMatrix<f64>], priors: Vec<f64>) -> Result<DiscriminantModel> {
    DiscriminantModel::new(
        MethodSpec::new(Method::Qda, EstimatorKind::Classical),
        means.to_vec(),
        PrecisionSet::exact(precisions.to_vec(), Method::Qda),
        priors,
    )
}
