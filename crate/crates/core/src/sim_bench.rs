//! Monte Carlo comparison of the discriminant methods on the two synthetic
//! scenarios, with optional cellwise contamination of the training data.
//!
//! Randomness comes from ChaCha8 streams keyed by `(seed, replicate, group,
//! purpose)`: every draw has its own counter-based substream, so results do
//! not depend on thread scheduling or on which methods are evaluated.
//! Gaussian variates use the cosine branch of Box–Muller.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discriminant::{classify, correct_classification, kl_distance, DiscriminantModel};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, invert_spd};
use crate::method::MethodSpec;
use crate::model_select::{select_from_summaries, SelectOptions};
use crate::robust_cov::{group_summaries, EstimatorKind, GroupSummaries, LabeledDataset};

/// Description of the random number scheme, echoed in bench output.
pub const RNG_DESCRIPTION: &str =
    "ChaCha8 (rand_chacha 0.9), stream = replicate<<20 | group<<4 | purpose; normals by Box-Muller (cosine branch)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// Ten groups sharing sparse precisions with a 0.9 block in one of two
    /// corners; means are ±3 spikes.
    One,
    /// Six diagonal groups with complementary variance ramps; means are
    /// `log p` spikes in the low-variance directions.
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub p: usize,
    pub k: usize,
    pub n_per_group: usize,
    pub epsilon: f64,
    pub n_test: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    /// Scenario 1 defaults: `K = 10`, `n_k = 30`, 1000 test rows, 100
    /// replicates.
    pub fn scenario1(p: usize) -> Self {
        Self { scenario: Scenario::One, p, k: 10, n_per_group: 30, epsilon: 0.0, n_test: 1000, replicates: 100, seed: 1 }
    }

    /// Scenario 2 defaults: `K = 6`, `n_k = 30`; `p` is 50 in the original
    /// design but may be reduced.
    pub fn scenario2(p: usize) -> Self {
        Self { scenario: Scenario::Two, p, k: 6, n_per_group: 30, epsilon: 0.0, n_test: 1000, replicates: 100, seed: 1 }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InvalidInput("scenarios need p >= 2".into()));
        }
        if self.k < 2 || self.k % 2 != 0 {
            return Err(Error::InvalidInput("scenarios need an even number of groups".into()));
        }
        if self.scenario == Scenario::Two && (self.k != 6 || self.p < 4) {
            return Err(Error::InvalidInput("scenario 2 needs K = 6 and p >= 4".into()));
        }
        if self.n_per_group < 2 || self.n_test == 0 || self.replicates == 0 {
            return Err(Error::InvalidInput("group size >= 2, test size >= 1 and replicates >= 1 required".into()));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::InvalidInput(format!("contamination fraction {} outside [0, 1)", self.epsilon)));
        }
        Ok(())
    }
}

/// True parameters of a scenario.
#[derive(Debug, Clone)]
pub struct ScenarioModel {
    pub means: Vec<DVector<f64>>,
    pub covariances: Vec<DMatrix<f64>>,
    pub precisions: Vec<DMatrix<f64>>,
    factors: Vec<DMatrix<f64>>,
}

impl ScenarioModel {
    fn from_precisions(means: Vec<DVector<f64>>, precisions: Vec<DMatrix<f64>>) -> Result<Self> {
        let covariances = precisions.iter().map(|t| invert_spd(t).map(|(c, _)| c)).collect::<Result<Vec<_>>>()?;
        Self::assemble(means, covariances, precisions)
    }

    fn from_covariances(means: Vec<DVector<f64>>, covariances: Vec<DMatrix<f64>>) -> Result<Self> {
        let precisions = covariances.iter().map(|c| invert_spd(c).map(|(t, _)| t)).collect::<Result<Vec<_>>>()?;
        Self::assemble(means, covariances, precisions)
    }

    fn assemble(means: Vec<DVector<f64>>, covariances: Vec<DMatrix<f64>>, precisions: Vec<DMatrix<f64>>) -> Result<Self> {
        let factors = covariances.iter().map(|c| cholesky(c).map(|ch| ch.l())).collect::<Result<Vec<_>>>()?;
        Ok(Self { means, covariances, precisions, factors })
    }

    pub fn n_groups(&self) -> usize {
        self.means.len()
    }
}

/// Scenario 1 parameters: groups `1..K/2` have `θ_12 = 0.9`, the rest
/// `θ_{p-1,p} = 0.9`; means `±3 e_k` with the spike index wrapped modulo `p`.
pub fn scenario1_params(p: usize, k: usize) -> Result<ScenarioModel> {
    if p < 2 || k < 2 || k % 2 != 0 {
        return Err(Error::InvalidInput("scenario 1 needs p >= 2 and an even K".into()));
    }
    let half = k / 2;
    let mut means = vec![DVector::zeros(p); k];
    let mut precisions = Vec::with_capacity(k);
    for g in 0..k {
        let mut theta = DMatrix::identity(p, p);
        let (a, b) = if g < half { (0, 1) } else { (p - 2, p - 1) };
        theta[(a, b)] = 0.9;
        theta[(b, a)] = 0.9;
        precisions.push(theta);
        let spike = (g % half) % p;
        means[g][spike] = if g < half { 3.0 } else { -3.0 };
    }
    ScenarioModel::from_precisions(means, precisions)
}

/// Scenario 2 parameters: diagonal covariances with entries
/// `(9(i-1)/(p-1) + 1)²` (groups 1–3) or the reversed ramp (groups 4–6);
/// means `log(p)` at index `k` (groups 1–3) or `p - (k - 3)` (groups 4–6).
pub fn scenario2_params(p: usize, k: usize) -> Result<ScenarioModel> {
    if p < 4 || k != 6 {
        return Err(Error::InvalidInput("scenario 2 needs p >= 4 and K = 6".into()));
    }
    let scale = (p - 1) as f64;
    let rising = DVector::from_fn(p, |i, _| (9.0 * i as f64 / scale + 1.0).powi(2));
    let falling = DVector::from_fn(p, |i, _| (9.0 * (p - 1 - i) as f64 / scale + 1.0).powi(2));
    let lp = (p as f64).ln();
    let mut means = Vec::with_capacity(6);
    let mut covariances = Vec::with_capacity(6);
    for g in 0..6 {
        let mut mu = DVector::zeros(p);
        if g < 3 {
            mu[g] = lp;
            covariances.push(DMatrix::from_diagonal(&rising));
        } else {
            // 1-based position p - (k - 3) with k = g + 1
            mu[p - (g + 1 - 3) - 1] = lp;
            covariances.push(DMatrix::from_diagonal(&falling));
        }
        means.push(mu);
    }
    ScenarioModel::from_covariances(means, covariances)
}

pub fn scenario_params(spec: &ScenarioSpec) -> Result<ScenarioModel> {
    match spec.scenario {
        Scenario::One => scenario1_params(spec.p, spec.k),
        Scenario::Two => scenario2_params(spec.p, spec.k),
    }
}

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Purpose {
    Train = 1,
    TestLabels = 2,
    TestDraws = 3,
    ContaminationCells = 4,
    ContaminationValues = 5,
}

fn stream(seed: u64, replicate: usize, group: usize, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((replicate as u64) << 20) | ((group as u64) << 4) | purpose as u64);
    rng
}

/// Standard normal variate (Box–Muller, cosine branch).
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn draw_row<R: Rng>(rng: &mut R, model: &ScenarioModel, g: usize, out: &mut [f64]) {
    let p = out.len();
    let z: Vec<f64> = (0..p).map(|_| standard_normal(rng)).collect();
    let l = &model.factors[g];
    for i in 0..p {
        let mut v = model.means[g][i];
        for j in 0..=i {
            v += l[(i, j)] * z[j];
        }
        out[i] = v;
    }
}

/// Clean training set (`n_k` rows per group, grouped in order) and test set
/// (`N_test` rows with uniformly drawn groups) for one replicate.
pub fn generate(spec: &ScenarioSpec, model: &ScenarioModel, replicate: usize) -> Result<(LabeledDataset, LabeledDataset)> {
    spec.validate()?;
    let (p, k, n) = (spec.p, spec.k, spec.n_per_group);
    let mut train = DMatrix::zeros(k * n, p);
    let mut labels = Vec::with_capacity(k * n);
    let mut row = vec![0.0; p];
    for g in 0..k {
        let mut rng = stream(spec.seed, replicate, g, Purpose::Train);
        for r in 0..n {
            draw_row(&mut rng, model, g, &mut row);
            for j in 0..p {
                train[(g * n + r, j)] = row[j];
            }
            labels.push(g);
        }
    }
    let mut label_rng = stream(spec.seed, replicate, 0, Purpose::TestLabels);
    let mut draw_rng = stream(spec.seed, replicate, 0, Purpose::TestDraws);
    let mut test = DMatrix::zeros(spec.n_test, p);
    let mut test_labels = Vec::with_capacity(spec.n_test);
    for i in 0..spec.n_test {
        let g = label_rng.random_range(0..k);
        draw_row(&mut draw_rng, model, g, &mut row);
        for j in 0..p {
            test[(i, j)] = row[j];
        }
        test_labels.push(g);
    }
    // a tiny test set might miss a group entirely
    let test_groups = test_labels.iter().copied().max().unwrap_or(0) + 1;
    let test = LabeledDataset::new(test, test_labels, test_groups.max(1))
        .or_else(|_| Err(Error::InvalidInput("test set does not cover every group".into())))?;
    Ok((LabeledDataset::new(train, labels, k)?, test))
}

/// Number of contaminated cells in a group of `n` rows and `p` columns.
pub fn contaminated_cell_count(epsilon: f64, n: usize, p: usize) -> usize {
    (epsilon * (n * p) as f64).round() as usize
}

/// Replaces `round(ε n_k p)` distinct cells per group with draws from the
/// scenario's contamination law. Returns the new dataset and the
/// contaminated `(row, col)` positions.
pub fn contaminate(
    train: &LabeledDataset,
    spec: &ScenarioSpec,
    replicate: usize,
) -> Result<(LabeledDataset, Vec<(usize, usize)>)> {
    if !(0.0..1.0).contains(&spec.epsilon) {
        return Err(Error::InvalidInput(format!("contamination fraction {} outside [0, 1)", spec.epsilon)));
    }
    if spec.epsilon == 0.0 {
        return Ok((train.clone(), Vec::new()));
    }
    let p = train.n_vars();
    let half = train.n_groups() / 2;
    let mut values = train.values().clone();
    let mut cells = Vec::new();
    for g in 0..train.n_groups() {
        let rows = train.group_indices(g);
        let m = contaminated_cell_count(spec.epsilon, rows.len(), p);
        let mut pos_rng = stream(spec.seed, replicate, g, Purpose::ContaminationCells);
        let mut val_rng = stream(spec.seed, replicate, g, Purpose::ContaminationValues);
        let (mean, sd) = match spec.scenario {
            Scenario::One if g < half => (-10.0, 0.2f64.sqrt()),
            Scenario::One => (10.0, 0.2f64.sqrt()),
            Scenario::Two => (0.0, 50f64.sqrt()),
        };
        let mut picked: Vec<usize> = sample(&mut pos_rng, rows.len() * p, m).into_vec();
        picked.sort_unstable();
        for flat in picked {
            let (r, c) = (rows[flat / p], flat % p);
            values[(r, c)] = mean + sd * standard_normal(&mut val_rng);
            cells.push((r, c));
        }
    }
    Ok((train.clone().with_values(values), cells))
}

/// One method's outcome on one replicate; `None` marks a non-computable fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub method: String,
    pub cc: Option<f64>,
    pub kl: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub display_name: String,
    pub mean_cc: Option<f64>,
    pub mean_kl: Option<f64>,
    pub na_count: usize,
    pub fitted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub spec: ScenarioSpec,
    pub rng: String,
    pub summaries: Vec<MethodSummary>,
    pub records: Vec<ReplicateRecord>,
}

impl BenchResult {
    pub fn summary(&self, method: MethodSpec) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method.cli_name())
    }

    pub fn records_for(&self, method: MethodSpec) -> impl Iterator<Item = &ReplicateRecord> {
        let name = method.cli_name();
        self.records.iter().filter(move |r| r.method == name)
    }

    /// Per-replicate CSV: `replicate,method,cc,kl,na`.
    pub fn records_csv(&self) -> String {
        let mut out = String::from("replicate,method,cc,kl,na\n");
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.replicate,
                r.method,
                fmt(r.cc),
                fmt(r.kl),
                u8::from(r.cc.is_none())
            ));
        }
        out
    }

    pub fn summary_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            spec: &'a ScenarioSpec,
            rng: &'a str,
            methods: &'a [MethodSummary],
        }
        serde_json::to_string_pretty(&Summary { spec: &self.spec, rng: &self.rng, methods: &self.summaries })
            .map_err(|e| Error::Serialization(e.to_string()))
    }
}

fn is_na(e: &Error) -> bool {
    matches!(e, Error::NotComputable(_) | Error::RegularizationRequired | Error::DegenerateGrid(_))
}

fn evaluate(
    method: MethodSpec,
    summaries: &std::result::Result<GroupSummaries, Error>,
    test: &LabeledDataset,
    truth: &ScenarioModel,
    opts: &SelectOptions,
) -> Result<Option<(f64, f64)>> {
    let summaries = match summaries {
        Ok(s) => s,
        Err(e) if is_na(e) => return Ok(None),
        Err(e) => return Err(e.clone()),
    };
    let fitted = select_from_summaries(method.method, summaries, opts)
        .and_then(|sel| DiscriminantModel::from_selection(method, summaries, sel));
    let model = match fitted {
        Ok(m) => m,
        Err(e) if is_na(&e) => return Ok(None),
        Err(e) => return Err(e),
    };
    let report = classify(test.values(), &model)?;
    let cc = correct_classification(&report.predicted, test.labels())?;
    let kl = kl_distance(&model.precisions().matrices, &truth.precisions)?;
    Ok(Some((cc, kl)))
}

/// Runs one replicate for every method.
pub fn run_replicate(
    spec: &ScenarioSpec,
    truth: &ScenarioModel,
    methods: &[MethodSpec],
    opts: &SelectOptions,
    replicate: usize,
) -> Result<Vec<ReplicateRecord>> {
    let (train, test) = generate(spec, truth, replicate)?;
    let (train, _) = contaminate(&train, spec, replicate)?;
    let need = |kind| methods.iter().any(|m| m.kind == kind);
    let classical = need(EstimatorKind::Classical).then(|| group_summaries(&train, EstimatorKind::Classical));
    let robust = need(EstimatorKind::CellwiseRobust).then(|| group_summaries(&train, EstimatorKind::CellwiseRobust));
    methods
        .iter()
        .map(|&m| {
            let summaries = match m.kind {
                EstimatorKind::Classical => classical.as_ref().unwrap(),
                EstimatorKind::CellwiseRobust => robust.as_ref().unwrap(),
            };
            let outcome = evaluate(m, summaries, &test, truth, opts)?;
            Ok(ReplicateRecord {
                replicate,
                method: m.cli_name().to_string(),
                cc: outcome.map(|o| o.0),
                kl: outcome.map(|o| o.1),
            })
        })
        .collect()
}

/// Runs all replicates (in parallel) and aggregates per method.
pub fn run_bench(spec: &ScenarioSpec, methods: &[MethodSpec], opts: &SelectOptions) -> Result<BenchResult> {
    spec.validate()?;
    let truth = scenario_params(spec)?;
    let per_rep: Vec<Vec<ReplicateRecord>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| run_replicate(spec, &truth, methods, opts, r))
        .collect::<Result<_>>()?;
    let records: Vec<ReplicateRecord> = per_rep.into_iter().flatten().collect();
    let summaries = methods
        .iter()
        .map(|m| {
            let name = m.cli_name();
            let rows: Vec<&ReplicateRecord> = records.iter().filter(|r| r.method == name).collect();
            let ok: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.cc.zip(r.kl)).collect();
            let mean = |f: fn(&(f64, f64)) -> f64| {
                (!ok.is_empty()).then(|| ok.iter().map(f).sum::<f64>() / ok.len() as f64)
            };
            MethodSummary {
                method: name.to_string(),
                display_name: m.display_name().to_string(),
                mean_cc: mean(|o| o.0),
                mean_kl: mean(|o| o.1),
                na_count: rows.len() - ok.len(),
                fitted: ok.len(),
            }
        })
        .collect();
    Ok(BenchResult { spec: *spec, rng: RNG_DESCRIPTION.to_string(), summaries, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario1_layout() {
        let m = scenario1_params(5, 10).unwrap();
        let t = &m.precisions[0];
        assert_eq!(t[(0, 1)], 0.9);
        assert_eq!(t[(1, 0)], 0.9);
        assert_eq!(t[(2, 3)], 0.0);
        assert_eq!(t.diagonal(), DVector::from_element(5, 1.0));
        assert_eq!(m.precisions[7][(3, 4)], 0.9);
        assert_eq!(m.means[2].as_slice(), &[0.0, 0.0, 3.0, 0.0, 0.0]);
        assert_eq!(m.means[7].as_slice(), &[0.0, 0.0, -3.0, 0.0, 0.0]);
        // spikes wrap when p < K/2
        let m = scenario1_params(3, 10).unwrap();
        assert_eq!(m.means[3].as_slice(), &[3.0, 0.0, 0.0]);
        assert!(scenario1_params(1, 10).is_err());
    }

    #[test]
    fn scenario2_layout() {
        let p = 50;
        let m = scenario2_params(p, 6).unwrap();
        assert!((m.covariances[0][(0, 0)] - 1.0).abs() < 1e-12);
        assert!((m.covariances[0][(p - 1, p - 1)] - 100.0).abs() < 1e-12);
        assert!((m.covariances[3][(0, 0)] - 100.0).abs() < 1e-12);
        assert!((m.covariances[3][(p - 1, p - 1)] - 1.0).abs() < 1e-12);
        for c in &m.covariances {
            let d = c.diagonal();
            assert!((d.max() / d.min() - 100.0).abs() < 1e-9);
        }
        assert_eq!(m.means[0][0], (p as f64).ln());
        assert_eq!(m.means[3][p - 2], (p as f64).ln());
        assert_eq!(m.means[5][p - 4], (p as f64).ln());
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = ScenarioSpec::scenario1(5).with_seed(7);
        let truth = scenario_params(&spec).unwrap();
        let (a, ta) = generate(&spec, &truth, 3).unwrap();
        let (b, tb) = generate(&spec, &truth, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        assert_eq!(a.group_sizes(), vec![30; 10]);
        let (c, _) = generate(&spec, &truth, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn contamination_counts_and_positions() {
        let spec = ScenarioSpec::scenario1(5).with_epsilon(0.05);
        let truth = scenario_params(&spec).unwrap();
        let (train, _) = generate(&spec, &truth, 0).unwrap();
        let (dirty, cells) = contaminate(&train, &spec, 0).unwrap();
        assert_eq!(cells.len(), 10 * contaminated_cell_count(0.05, 30, 5));
        let mut uniq = cells.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), cells.len());
        for &(r, c) in &cells {
            let g = train.labels()[r];
            let v = dirty.values()[(r, c)];
            if g < 5 {
                assert!(v < -7.0);
            } else {
                assert!(v > 7.0);
            }
        }
        let clean = contaminate(&train, &spec.with_epsilon(0.0), 0).unwrap();
        assert_eq!(clean.0, train);
        assert!(clean.1.is_empty());
    }

    #[test]
    fn normal_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.01);
    }
}
