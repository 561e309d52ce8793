//! Tabular input: CSV parsing, column selection and the seeded train/test split.
//!
//! Parsing is deliberately strict about shape and lenient about content. A row
//! with the wrong number of fields rejects the whole file, while a row holding an
//! empty or non-numeric cell is dropped and counted. Columns in which no cell
//! parses as a number at all (dates, free text) are set aside by name before the
//! row filter runs, so one such column does not wipe out every row.
//!
//! Quoting is not interpreted: a quoted field containing a comma splits into two
//! fields and the row is reported as ragged.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed used when the caller does not pick one.
pub const DEFAULT_SEED: u64 = 42;

/// Test share, in percent, used when the caller does not pick one.
pub const DEFAULT_TEST_PERCENT: f64 = 10.0;

/// A validated numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    column_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    dropped_row_count: usize,
    skipped_columns: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from already-numeric rows.
    pub fn new(column_names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        validate_header(&column_names)?;
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != column_names.len() {
                return Err(Error::RaggedRow {
                    line: i + 2,
                    expected: column_names.len(),
                    found: row.len(),
                });
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::MalformedCsv(format!(
                    "row {} holds non-finite value {v}",
                    i + 1
                )));
            }
        }
        Ok(Self {
            column_names,
            rows,
            dropped_row_count: 0,
            skipped_columns: Vec::new(),
        })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    /// Data rows discarded because a cell was empty or not a finite number.
    pub fn dropped_row_count(&self) -> usize {
        self.dropped_row_count
    }

    /// Header names of columns that held no numeric cell and were left out.
    pub fn skipped_columns(&self) -> &[String] {
        &self.skipped_columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn column(&self, index: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r[index])
    }
}

fn validate_header(names: &[String]) -> Result<()> {
    if names.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut seen = HashSet::new();
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::EmptyHeader { column: i + 1 });
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateHeader(name.clone()));
        }
    }
    Ok(())
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parses UTF-8 CSV bytes whose first record is the header.
pub fn parse_csv(bytes: &[u8]) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(Error::EmptyInput),
        Some(rec) => rec.map_err(csv_error)?,
    };
    let names: Vec<String> = header.iter().map(str::to_owned).collect();
    validate_header(&names)?;
    let width = names.len();

    let mut cells: Vec<Vec<Option<f64>>> = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        if rec.len() != width {
            let line = rec.position().map_or(0, |p| p.line() as usize);
            return Err(Error::RaggedRow {
                line,
                expected: width,
                found: rec.len(),
            });
        }
        cells.push(rec.iter().map(parse_cell).collect());
    }
    if cells.is_empty() {
        return Err(Error::EmptyInput);
    }

    let keep: Vec<usize> = (0..width)
        .filter(|&j| cells.iter().any(|row| row[j].is_some()))
        .collect();
    let skipped_columns = (0..width)
        .filter(|j| !keep.contains(j))
        .map(|j| names[j].clone())
        .collect();

    let raw_count = cells.len();
    let rows: Vec<Vec<f64>> = cells
        .into_iter()
        .filter_map(|row| keep.iter().map(|&j| row[j]).collect::<Option<Vec<f64>>>())
        .collect();
    if keep.is_empty() || rows.is_empty() {
        return Err(Error::EmptyInput);
    }

    Ok(Dataset {
        column_names: keep.iter().map(|&j| names[j].clone()).collect(),
        dropped_row_count: raw_count - rows.len(),
        rows,
        skipped_columns,
    })
}

fn csv_error(err: csv::Error) -> Error {
    Error::MalformedCsv(err.to_string())
}

/// Index-resolved feature and label columns of one dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSelection {
    features: Vec<usize>,
    label: usize,
}

impl ColumnSelection {
    /// Validates raw indices against `ds`.
    pub fn new(ds: &Dataset, features: Vec<usize>, label: usize) -> Result<Self> {
        let name_of = |i: usize| {
            ds.column_names
                .get(i)
                .cloned()
                .ok_or_else(|| Error::UnknownColumn(format!("#{i}")))
        };
        let label_name = name_of(label)?;
        if features.is_empty() {
            return Err(Error::NoFeatures);
        }
        let mut seen = HashSet::new();
        for &f in &features {
            let name = name_of(f)?;
            if f == label {
                return Err(Error::LabelInFeatures(label_name));
            }
            if !seen.insert(f) {
                return Err(Error::DuplicateFeature(name));
            }
        }
        Ok(Self { features, label })
    }

    pub fn features(&self) -> &[usize] {
        &self.features
    }

    pub fn label(&self) -> usize {
        self.label
    }
}

/// Resolves feature and label names, preserving the caller's feature order.
pub fn select_columns<S: AsRef<str>>(
    ds: &Dataset,
    features: &[S],
    label: &str,
) -> Result<ColumnSelection> {
    let lookup = |name: &str| {
        ds.column_index(name)
            .ok_or_else(|| Error::UnknownColumn(name.to_owned()))
    };
    let label = lookup(label)?;
    let features = features
        .iter()
        .map(|f| lookup(f.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    ColumnSelection::new(ds, features, label)
}

/// The selected columns of a subset of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitView {
    pub feature_names: Vec<String>,
    pub label_name: String,
    /// One entry per row, in selection order.
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    /// Source row of each entry in the parent dataset.
    pub row_indices: Vec<usize>,
}

impl SplitView {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn gather(ds: &Dataset, sel: &ColumnSelection, rows: &[usize]) -> Self {
        Self {
            feature_names: sel
                .features
                .iter()
                .map(|&j| ds.column_names[j].clone())
                .collect(),
            label_name: ds.column_names[sel.label].clone(),
            features: rows
                .iter()
                .map(|&i| sel.features.iter().map(|&j| ds.rows[i][j]).collect())
                .collect(),
            labels: rows.iter().map(|&i| ds.rows[i][sel.label]).collect(),
            row_indices: rows.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSplit {
    pub train: SplitView,
    pub test: SplitView,
    pub test_percent: f64,
    pub seed: u64,
}

/// Number of test rows for `n` rows at `test_percent`, rounding halves up.
pub fn test_row_count(n: usize, test_percent: f64) -> usize {
    (n as f64 * test_percent / 100.0 + 0.5).floor() as usize
}

/// Shuffles rows with a seeded generator and carves off the test share.
pub fn split_dataset(
    ds: &Dataset,
    sel: &ColumnSelection,
    test_percent: f64,
    seed: u64,
) -> Result<DataSplit> {
    if !(0.0..100.0).contains(&test_percent) {
        return Err(Error::InvalidTestPercent(test_percent));
    }
    if let Some(&bad) = sel
        .features
        .iter()
        .chain(std::iter::once(&sel.label))
        .find(|&&j| j >= ds.n_cols())
    {
        return Err(Error::UnknownColumn(format!("#{bad}")));
    }
    let n = ds.n_rows();
    let n_test = test_row_count(n, test_percent);
    if n_test >= n {
        return Err(Error::EmptyTrain);
    }

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let (test_rows, train_rows) = order.split_at(n_test);

    Ok(DataSplit {
        train: SplitView::gather(ds, sel, train_rows),
        test: SplitView::gather(ds, sel, test_rows),
        test_percent,
        seed,
    })
}
