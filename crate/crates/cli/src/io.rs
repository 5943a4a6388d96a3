use std::io::Write;
use std::path::Path;

use cellshield::LabeledDataset;
use nalgebra::DMatrix;

use crate::error::CliError;

/// A parsed CSV table: numeric feature columns plus an optional `group`
/// column kept as raw strings.
pub struct Table {
    pub variables: Vec<String>,
    pub values: DMatrix<f64>,
    pub groups: Option<Vec<String>>,
}

impl Table {
    /// Dataset with groups named and ordered as found in the file.
    pub fn into_dataset(self) -> Result<LabeledDataset, CliError> {
        let groups = self.groups.ok_or_else(|| CliError::Input("input has no `group` column".into()))?;
        let data = LabeledDataset::from_named_labels(self.values, &groups)?;
        Ok(data.with_variable_names(self.variables))
    }

    /// Dataset whose groups follow `names` (a fitted model's group order).
    /// Every named group must be present; unknown labels are rejected.
    pub fn into_dataset_with_groups(self, names: &[String]) -> Result<LabeledDataset, CliError> {
        let groups = self.groups.ok_or_else(|| CliError::Input("input has no `group` column".into()))?;
        let labels = group_indices(&groups, names)?;
        let mut counts = vec![0usize; names.len()];
        for &l in &labels {
            counts[l] += 1;
        }
        if let Some(k) = counts.iter().position(|&c| c == 0) {
            return Err(CliError::Input(format!("group `{}` has no rows in the input", names[k])));
        }
        let data = LabeledDataset::new(self.values, labels, names.len())?;
        Ok(data.with_group_names(names.to_vec()).with_variable_names(self.variables))
    }
}

/// Maps raw labels onto positions in `names`.
pub fn group_indices(labels: &[String], names: &[String]) -> Result<Vec<usize>, CliError> {
    labels
        .iter()
        .map(|g| {
            names
                .iter()
                .position(|n| n == g)
                .ok_or_else(|| CliError::Input(format!("group `{g}` is not known to the model")))
        })
        .collect()
}

/// Reads a comma-separated file with a mandatory header. The `group` column
/// is matched case-insensitively; every other column must be numeric.
pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Input(format!("cannot read header of {}: {e}", path.display())))?
        .clone();
    let group_col = headers.iter().position(|h| h.eq_ignore_ascii_case("group"));
    let variables: Vec<String> =
        headers.iter().enumerate().filter(|(i, _)| Some(*i) != group_col).map(|(_, h)| h.to_string()).collect();
    if variables.is_empty() {
        return Err(CliError::Input("input has no numeric columns".into()));
    }
    let mut flat = Vec::new();
    let mut groups = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        for (i, field) in record.iter().enumerate() {
            if Some(i) == group_col {
                groups.push(field.to_string());
                continue;
            }
            let v: f64 = field.parse().map_err(|_| {
                CliError::Input(format!(
                    "non-numeric value `{field}` in column `{}` at data row {}",
                    &headers[i],
                    line + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::Input(format!("non-finite value in column `{}` at data row {}", &headers[i], line + 1)));
            }
            flat.push(v);
        }
    }
    let n = flat.len() / variables.len();
    if n == 0 {
        return Err(CliError::Input(format!("{} has no data rows", path.display())));
    }
    Ok(Table {
        values: DMatrix::from_row_slice(n, variables.len(), &flat),
        variables,
        groups: group_col.map(|_| groups),
    })
}

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::Io(format!("cannot create a temporary file in {}: {e}", dir.display())))?;
    tmp.write_all(contents).map_err(|e| CliError::Io(e.to_string()))?;
    tmp.persist(path).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Serializes rows through the csv writer into a byte buffer.
pub fn csv_bytes<I, R>(header: &[String], rows: I) -> Result<Vec<u8>, CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for row in rows {
        w.write_record(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}
