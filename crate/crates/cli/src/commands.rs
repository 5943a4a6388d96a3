use std::path::{Path, PathBuf};
use std::time::Instant;

use cellshield::discriminant::DiscriminantModel;
use cellshield::sim_bench::{run_bench, ScenarioSpec};
use cellshield::{classify, detect, MethodSpec, Scenario, SelectOptions};

use crate::error::CliError;
use crate::io::{csv_bytes, group_indices, read_table, write_atomic};

fn output(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn fmt_opt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

fn load_model(path: &Path) -> Result<DiscriminantModel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read model {}: {e}", path.display())))?;
    Ok(DiscriminantModel::from_json(&text)?)
}

pub fn fit(method: MethodSpec, input: &Path, prefix: &Path, opts: &SelectOptions) -> Result<(), CliError> {
    let data = read_table(input)?.into_dataset()?;
    let model = cellshield::select_model(method, &data, opts)?;
    let model_path = output(prefix, "_model.json");
    write_atomic(&model_path, model.to_json()?.as_bytes())?;

    let header = ["method", "lambda1_rho1", "lambda2_rho2", "df", "bic", "converged"].map(String::from);
    let rows = model.selection().map(|s| s.table.clone()).unwrap_or_default().into_iter().map(|row| {
        let (a, b) = row.regularization.values();
        vec![
            method.cli_name().to_string(),
            fmt_opt(a),
            fmt_opt(b),
            row.df.to_string(),
            row.bic.map(|v| v.to_string()).unwrap_or_default(),
            row.converged.to_string(),
        ]
    });
    let grid_path = output(prefix, "_grid.csv");
    write_atomic(&grid_path, &csv_bytes(&header, rows)?)?;

    let (a, b) = model.precisions().regularization.values();
    println!("method: {} ({})", method.display_name(), method.cli_name());
    if !a.is_nan() {
        println!("parameters: {}{}", a, if b.is_nan() { String::new() } else { format!(", {b}") });
    }
    if let Some(sel) = model.selection() {
        println!("BIC: {:.4}  df: {}", sel.bic, sel.df);
    }
    if !model.precisions().converged {
        eprintln!("warning: the solver hit its iteration cap at the selected grid point");
    }
    println!("wrote {} and {}", model_path.display(), grid_path.display());
    Ok(())
}

pub fn predict(model_path: &Path, input: &Path, prefix: &Path) -> Result<(), CliError> {
    let model = load_model(model_path)?;
    let table = read_table(input)?;
    if table.values.ncols() != model.n_vars() {
        return Err(cellshield::Error::DimensionMismatch { expected: model.n_vars(), got: table.values.ncols() }.into());
    }
    let mut report = classify(&table.values, &model)?;
    if let Some(groups) = &table.groups {
        let truth = group_indices(groups, model.group_names())?;
        report = report.with_truth(&truth)?;
    }
    let mut header = vec!["row".to_string(), "predicted".to_string()];
    header.extend(model.group_names().iter().map(|g| format!("score_{g}")));
    let names = model.group_names();
    let rows = report.predicted.iter().zip(&report.scores).enumerate().map(|(i, (&k, scores))| {
        let mut row = vec![(i + 1).to_string(), names[k].clone()];
        row.extend(scores.iter().map(|s| s.to_string()));
        row
    });
    let path = output(prefix, "_predictions.csv");
    write_atomic(&path, &csv_bytes(&header, rows)?)?;
    if let Some(cc) = report.correct_pct {
        println!("correct classification: {cc:.2}%");
    }
    println!("wrote {}", path.display());
    Ok(())
}

pub fn outliers(model_path: &Path, input: &Path, prefix: &Path) -> Result<(), CliError> {
    let model = load_model(model_path)?;
    let table = read_table(input)?;
    if table.values.ncols() != model.n_vars() {
        return Err(cellshield::Error::DimensionMismatch { expected: model.n_vars(), got: table.values.ncols() }.into());
    }
    let data = table.into_dataset_with_groups(model.group_names())?;
    let report = detect(&data, &model)?;
    if let Some(w) = &report.warning {
        eprintln!("warning: {w}");
    }
    let csv_path = output(prefix, "_outliers.csv");
    let map_path = output(prefix, "_heatmap.svg");
    let dist_path = output(prefix, "_distances.svg");
    write_atomic(&csv_path, report.to_csv().as_bytes())?;
    write_atomic(&map_path, report.heatmap_svg().as_bytes())?;
    write_atomic(&dist_path, report.distance_plot_svg().as_bytes())?;
    let rows = report.row_flags.iter().filter(|&&f| f).count();
    let cells: usize = report.cell_flags.iter().map(|r| r.iter().filter(|&&f| f).count()).sum();
    println!("flagged rows: {rows} of {}  flagged cells: {cells}", report.n_rows());
    println!("wrote {}, {} and {}", csv_path.display(), map_path.display(), dist_path.display());
    Ok(())
}

pub struct SimulateArgs {
    pub scenario: u8,
    pub dim: Option<usize>,
    pub epsilon: f64,
    pub replicates: usize,
    pub seed: u64,
    pub methods: Vec<MethodSpec>,
}

pub fn simulate(args: &SimulateArgs, prefix: &Path, opts: &SelectOptions) -> Result<(), CliError> {
    let base = match args.scenario {
        1 => ScenarioSpec::scenario1(args.dim.unwrap_or(10)),
        2 => ScenarioSpec::scenario2(args.dim.unwrap_or(50)),
        other => return Err(CliError::Input(format!("unknown scenario {other}; expected 1 or 2"))),
    };
    let spec = base.with_epsilon(args.epsilon).with_replicates(args.replicates).with_seed(args.seed);
    let started = Instant::now();
    let result = run_bench(&spec, &args.methods, opts)?;
    let elapsed = started.elapsed();

    let rep_path = output(prefix, "_replicates.csv");
    let sum_path = output(prefix, "_summary.json");
    write_atomic(&rep_path, result.records_csv().as_bytes())?;
    write_atomic(&sum_path, result.summary_json()?.as_bytes())?;

    let label = match spec.scenario {
        Scenario::One => "1",
        Scenario::Two => "2",
    };
    println!("scenario {label}, p = {}, K = {}, epsilon = {}, R = {}", spec.p, spec.k, spec.epsilon, spec.replicates);
    println!("{:<10} {:>8} {:>10} {:>4}", "method", "CC", "KL", "NA");
    for s in &result.summaries {
        let cc = s.mean_cc.map(|v| format!("{v:.2}")).unwrap_or_else(|| "NA".into());
        let kl = s.mean_kl.map(|v| format!("{v:.2}")).unwrap_or_else(|| "NA".into());
        println!("{:<10} {cc:>8} {kl:>10} {:>4}", s.display_name, s.na_count);
    }
    println!("runtime: {:.1}s", elapsed.as_secs_f64());
    println!("wrote {} and {}", rep_path.display(), sum_path.display());
    Ok(())
}
