//! Regularization grids, BIC with distinct-nonzero degrees of freedom, and
//! the grid search that picks each method's penalty.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::discriminant::DiscriminantModel;
use crate::error::{Error, Result};
use crate::linalg::{log_det_spd, trace_product};
use crate::method::{Method, MethodSpec};
use crate::precision::{
    graphical_lasso_warm, invert_pd, joint_graphical_lasso_warm, rda_covariances, AdmmState,
    PrecisionSet, Regularization, SolverOptions, ZERO_THRESHOLD,
};
use crate::robust_cov::{group_summaries, GroupSummaries, LabeledDataset};

/// Tolerance under which two precision entries count as the same value.
pub const DF_TOLERANCE: f64 = ZERO_THRESHOLD;

/// One log-spaced regularization axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub values: Vec<f64>,
}

/// Grid for one method; unregularized methods have no axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub method: Method,
    pub axes: Vec<GridAxis>,
}

/// `points` values from `upper / 10` to `upper`, equally spaced in log.
pub fn log_grid(upper: f64, points: usize) -> Vec<f64> {
    let lower = upper / 10.0;
    if points <= 1 {
        return vec![upper];
    }
    let (ll, lu) = (lower.ln(), upper.ln());
    (0..points)
        .map(|m| {
            if m == 0 {
                lower
            } else if m + 1 == points {
                upper
            } else {
                (ll + (m as f64 / (points - 1) as f64) * (lu - ll)).exp()
            }
        })
        .collect()
}

fn axis(name: &str, upper: f64, points: usize) -> Result<GridAxis> {
    if !(upper > 0.0) || !upper.is_finite() {
        return Err(Error::DegenerateGrid(format!("upper bound for {name} is {upper}")));
    }
    Ok(GridAxis { name: name.into(), lower: upper / 10.0, upper, values: log_grid(upper, points) })
}

fn max_weighted(mats: &[&DMatrix<f64>], sizes: &[usize], f: impl Fn(usize, usize, f64) -> Option<f64>) -> f64 {
    let mut best = 0.0_f64;
    for (m, &n) in mats.iter().zip(sizes) {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if let Some(v) = f(i, j, m[(i, j)]) {
                    best = best.max(n as f64 * v.abs());
                }
            }
        }
    }
    best
}

/// Builds the regularization grid for `method` from the data summaries.
pub fn grid_bounds(method: Method, summaries: &GroupSummaries, points: usize) -> Result<GridSpec> {
    let sizes = &summaries.group_sizes;
    let covs: Vec<&DMatrix<f64>> = summaries.covariances.iter().collect();
    let minus_identity = |i: usize, j: usize, v: f64| Some(if i == j { v - 1.0 } else { v });
    let axes = match method {
        Method::Lda | Method::Qda => vec![],
        Method::GlQda => vec![axis("lambda1", max_weighted(&covs, sizes, minus_identity), points)?],
        Method::GlLda => {
            let pooled = vec![&summaries.pooled; sizes.len()];
            vec![axis("lambda1", max_weighted(&pooled, sizes, minus_identity), points)?]
        }
        Method::Jgl => {
            let l1 = max_weighted(&covs, sizes, |i, j, v| (i != j).then_some(v));
            let diffs: Vec<DMatrix<f64>> =
                summaries.covariances.iter().map(|s| &summaries.pooled - s).collect();
            let diff_refs: Vec<&DMatrix<f64>> = diffs.iter().collect();
            let l2 = max_weighted(&diff_refs, sizes, |_, _, v| Some(v));
            vec![axis("lambda1", l1, points)?, axis("lambda2", l2, points)?]
        }
        Method::Rda => vec![axis("rho1", 1.0, points)?, axis("rho2", 1.0, points)?],
    };
    Ok(GridSpec { method, axes })
}

/// Number of distinct non-zero values per upper-triangle position, summed.
pub fn count_df(set: &PrecisionSet, tau: f64) -> usize {
    let Some(first) = set.matrices.first() else { return 0 };
    let p = first.nrows();
    let mut vals = Vec::with_capacity(set.matrices.len());
    let mut df = 0;
    for i in 0..p {
        for j in i..p {
            vals.clear();
            vals.extend(set.matrices.iter().map(|m| m[(i, j)]).filter(|v| v.abs() > tau));
            if vals.is_empty() {
                continue;
            }
            vals.sort_by(|a, b| a.total_cmp(b));
            df += 1 + vals.windows(2).filter(|w| w[1] - w[0] > tau).count();
        }
    }
    df
}

/// `Σ_k n_k [tr(S_k Θ_k) - log det Θ_k] + log(N) · df`.
pub fn bic_value(
    covariances: &[&DMatrix<f64>],
    precisions: &[DMatrix<f64>],
    group_sizes: &[usize],
    n_total: usize,
    df: usize,
) -> Result<f64> {
    if covariances.len() != precisions.len() || precisions.len() != group_sizes.len() {
        return Err(Error::DimensionMismatch { expected: covariances.len(), got: precisions.len() });
    }
    let mut fit = 0.0;
    for ((s, theta), &n) in covariances.iter().zip(precisions).zip(group_sizes) {
        if s.shape() != theta.shape() {
            return Err(Error::DimensionMismatch { expected: s.nrows(), got: theta.nrows() });
        }
        fit += n as f64 * (trace_product(s, theta) - log_det_spd(theta)?);
    }
    Ok(fit + (n_total as f64).ln() * df as f64)
}

/// BIC of a fitted precision set; pooled methods are scored against the
/// pooled covariance.
pub fn bic(summaries: &GroupSummaries, set: &PrecisionSet, df: usize) -> Result<f64> {
    let covs: Vec<&DMatrix<f64>> = if set.method.is_pooled() {
        vec![&summaries.pooled; summaries.n_groups()]
    } else {
        summaries.covariances.iter().collect()
    };
    bic_value(&covs, &set.matrices, &summaries.group_sizes, summaries.total_size(), df)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectOptions {
    pub solver: SolverOptions,
    pub grid_points: usize,
    /// Reuse the previous grid point's ADMM iterate as the starting point.
    pub warm_start: bool,
}

impl Default for SelectOptions {
    fn default() -> Self {
        Self { solver: SolverOptions::default(), grid_points: 5, warm_start: true }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub regularization: Regularization,
    pub df: usize,
    /// `None` when the fit at this point was not computable.
    pub bic: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub precisions: PrecisionSet,
    pub bic: f64,
    pub df: usize,
    pub table: Vec<GridRow>,
}

fn replicate(m: DMatrix<f64>, k: usize) -> Vec<DMatrix<f64>> {
    vec![m; k]
}

fn fit_point(
    method: Method,
    summaries: &GroupSummaries,
    reg: Regularization,
    opts: &SolverOptions,
    warm: Option<&AdmmState>,
) -> Result<(PrecisionSet, Option<AdmmState>)> {
    let k = summaries.n_groups();
    let n_total = summaries.total_size() as f64;
    let weights: Vec<f64> = summaries.group_sizes.iter().map(|&n| n as f64).collect();
    match (method, reg) {
        (Method::Lda, _) => {
            let (inv, _) = invert_pd(&summaries.pooled)?;
            Ok((PrecisionSet::exact(replicate(inv, k), Method::Lda), None))
        }
        (Method::Qda, _) => {
            let mats = summaries
                .covariances
                .iter()
                .map(|s| invert_pd(s).map(|(inv, _)| inv))
                .collect::<Result<Vec<_>>>()?;
            Ok((PrecisionSet::exact(mats, Method::Qda), None))
        }
        (Method::GlLda, Regularization::Lasso { lambda1 }) => {
            let (mut set, st) = graphical_lasso_warm(&summaries.pooled, n_total, lambda1, opts, warm)?;
            set.method = Method::GlLda;
            set.matrices = replicate(set.matrices.remove(0), k);
            Ok((set, Some(st)))
        }
        (Method::GlQda, Regularization::Lasso { lambda1 }) => {
            // groups are independent; warm states are kept per group
            let mut mats = Vec::with_capacity(k);
            let mut z = Vec::with_capacity(k);
            let mut u = Vec::with_capacity(k);
            let (mut converged, mut iterations) = (true, 0);
            for g in 0..k {
                let init = warm.map(|w| AdmmState { z: vec![w.z[g].clone()], u: vec![w.u[g].clone()] });
                let (set, st) = graphical_lasso_warm(
                    &summaries.covariances[g],
                    weights[g],
                    lambda1,
                    opts,
                    init.as_ref(),
                )?;
                converged &= set.converged;
                iterations = iterations.max(set.iterations);
                mats.extend(set.matrices);
                z.extend(st.z);
                u.extend(st.u);
            }
            let set = PrecisionSet { matrices: mats, method: Method::GlQda, regularization: reg, converged, iterations };
            Ok((set, Some(AdmmState { z, u })))
        }
        (Method::Jgl, Regularization::Fused { lambda1, lambda2 }) => {
            let (set, st) = joint_graphical_lasso_warm(
                &summaries.covariances,
                &weights,
                lambda1,
                lambda2,
                opts,
                warm,
            )?;
            Ok((set, Some(st)))
        }
        (Method::Rda, Regularization::Shrinkage { rho1, rho2 }) => {
            let covs = rda_covariances(&summaries.covariances, &summaries.pooled, rho1, rho2)?;
            let mats = covs
                .iter()
                .map(|s| invert_pd(&crate::linalg::symmetrize(s)).map(|(inv, _)| inv))
                .collect::<Result<Vec<_>>>()?;
            let set = PrecisionSet { matrices: mats, method: Method::Rda, regularization: reg, converged: true, iterations: 0 };
            Ok((set, None))
        }
        _ => Err(Error::InvalidInput(format!("regularization {reg:?} does not fit {method:?}"))),
    }
}

/// Grid points in evaluation order: penalties from strongest to weakest, so
/// warm starts move along a path of increasingly dense solutions.
fn grid_points(grid: &GridSpec) -> Vec<Regularization> {
    let desc = |a: &GridAxis| a.values.iter().rev().copied().collect::<Vec<_>>();
    match grid.method {
        Method::Lda | Method::Qda => vec![Regularization::None],
        Method::GlLda | Method::GlQda => {
            desc(&grid.axes[0]).into_iter().map(|lambda1| Regularization::Lasso { lambda1 }).collect()
        }
        Method::Jgl => {
            let (l1s, l2s) = (desc(&grid.axes[0]), desc(&grid.axes[1]));
            l2s.iter()
                .flat_map(|&lambda2| l1s.iter().map(move |&lambda1| Regularization::Fused { lambda1, lambda2 }))
                .collect()
        }
        Method::Rda => {
            let (r1s, r2s) = (desc(&grid.axes[0]), desc(&grid.axes[1]));
            r2s.iter()
                .flat_map(|&rho2| r1s.iter().map(move |&rho1| Regularization::Shrinkage { rho1, rho2 }))
                .collect()
        }
    }
}

/// Ordering key for tie-breaks: larger means stronger regularization.
fn strength(reg: &Regularization) -> (f64, f64) {
    match *reg {
        Regularization::None => (0.0, 0.0),
        Regularization::Lasso { lambda1 } => (lambda1, 0.0),
        Regularization::Fused { lambda1, lambda2 } => (lambda1, lambda2),
        Regularization::Shrinkage { rho1, rho2 } => (rho2, rho1),
    }
}

/// Fits every grid point and keeps the minimum-BIC model.
pub fn select_from_summaries(
    method: Method,
    summaries: &GroupSummaries,
    opts: &SelectOptions,
) -> Result<SelectionResult> {
    let grid = grid_bounds(method, summaries, opts.grid_points)?;
    let mut table = Vec::new();
    let mut best: Option<(PrecisionSet, f64, usize)> = None;
    let mut last_err = None;
    let mut warm: Option<AdmmState> = None;
    // a row of a two-axis grid restarts from the previous row's first point
    let row_len = if grid.axes.len() > 1 { grid.axes[0].values.len() } else { usize::MAX };
    let mut row_warm: Option<AdmmState> = None;
    for (idx, reg) in grid_points(&grid).into_iter().enumerate() {
        let row_start = idx > 0 && idx % row_len == 0;
        let init = match (opts.warm_start, row_start) {
            (false, _) => None,
            (true, true) => row_warm.as_ref(),
            (true, false) => warm.as_ref(),
        };
        let (set, state) = match fit_point(method, summaries, reg, &opts.solver, init) {
            Ok(v) => v,
            Err(e @ (Error::NotComputable(_) | Error::RegularizationRequired)) => {
                table.push(GridRow { regularization: reg, df: 0, bic: None, converged: false, iterations: 0 });
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        if state.is_some() {
            if idx % row_len == 0 {
                row_warm = state.clone();
            }
            warm = state;
        }
        let df = count_df(&set, DF_TOLERANCE);
        let score = bic(summaries, &set, df)?;
        table.push(GridRow { regularization: reg, df, bic: Some(score), converged: set.converged, iterations: set.iterations });
        let better = match &best {
            None => true,
            Some((b, b_score, _)) => {
                score < *b_score
                    || (score == *b_score && strength(&reg) > strength(&b.regularization))
            }
        };
        if better {
            best = Some((set, score, df));
        }
    }
    match best {
        Some((precisions, bic, df)) => Ok(SelectionResult { precisions, bic, df, table }),
        None => Err(last_err.unwrap_or_else(|| Error::NotComputable("no grid point fitted".into()))),
    }
}

/// Computes summaries, searches the grid and assembles the classifier.
pub fn select_model(spec: MethodSpec, data: &LabeledDataset, opts: &SelectOptions) -> Result<DiscriminantModel> {
    let summaries = group_summaries(data, spec.kind)?;
    let selection = select_from_summaries(spec.method, &summaries, opts)?;
    DiscriminantModel::from_selection(spec, &summaries, selection)
        .map(|m| m.with_names(data.group_names().to_vec(), data.variable_names().to_vec()))
}
