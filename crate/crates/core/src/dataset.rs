//! MOOT-style tables.
//!
//! The first CSV record names the columns and encodes their roles:
//!
//! | header      | meaning                            |
//! |-------------|------------------------------------|
//! | `Kloc`      | leading uppercase: numeric         |
//! | `lang`      | otherwise: symbolic                |
//! | `Effort-`   | goal to minimize                   |
//! | `Acc+`      | goal to maximize                   |
//! | `HpX`       | ignored                            |
//!
//! `?` marks a missing cell. Goal values stay hidden from learners until a
//! row is labeled through a [`LabelState`], which is also where the
//! evaluation budget is enforced.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Marker used for missing cells in CSV input and output.
pub const MISSING: &str = "?";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Numeric,
    Symbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Independent,
    Goal,
    Ignored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
    None,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Numeric => "numeric",
            Kind::Symbolic => "symbolic",
        }
    }
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Minimize => "minimize",
            Direction::Maximize => "maximize",
            Direction::None => "none",
        }
    }
}

/// Role and type of one column, derived from its header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub index: usize,
    pub kind: Kind,
    pub role: Role,
    pub direction: Direction,
}

/// Dimensionality stratum of a dataset, by independent-column count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dims {
    Low,
    Medium,
    High,
}

impl Dims {
    pub const ALL: [Dims; 3] = [Dims::Low, Dims::Medium, Dims::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Dims::Low => "low",
            Dims::Medium => "medium",
            Dims::High => "high",
        }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// low below 6 independent columns, medium for 6..=11, high above 11.
pub fn classify_dims(n_independent: usize) -> Dims {
    match n_independent {
        0..=5 => Dims::Low,
        6..=11 => Dims::Medium,
        _ => Dims::High,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Sym(String),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Sym(s) => f.write_str(s),
            Cell::Missing => f.write_str(MISSING),
        }
    }
}

/// Summary of one column over the whole file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnStats {
    Numeric {
        n: usize,
        lo: f64,
        hi: f64,
        mean: f64,
        median: f64,
        sd: f64,
    },
    Symbolic {
        n: usize,
        mode: Option<String>,
        freq: BTreeMap<String, usize>,
    },
}

impl ColumnStats {
    fn numeric(values: &mut [f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return ColumnStats::Numeric {
                n,
                lo: 0.0,
                hi: 0.0,
                mean: 0.0,
                median: 0.0,
                sd: 0.0,
            };
        }
        values.sort_by(f64::total_cmp);
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        ColumnStats::Numeric {
            n,
            lo: values[0],
            hi: values[n - 1],
            // summation rounding can push the mean a hair outside [lo, hi]
            mean: mean.clamp(values[0], values[n - 1]),
            median: median_sorted(values),
            sd,
        }
    }

    fn symbolic<'a>(values: impl Iterator<Item = &'a str>) -> Self {
        let mut freq = BTreeMap::new();
        let mut n = 0;
        for v in values {
            *freq.entry(v.to_string()).or_insert(0) += 1;
            n += 1;
        }
        ColumnStats::Symbolic {
            n,
            mode: mode_of(&freq),
            freq,
        }
    }

    /// `(lo, hi)` for numeric columns.
    pub fn range(&self) -> Option<(f64, f64)> {
        match self {
            ColumnStats::Numeric { lo, hi, .. } => Some((*lo, *hi)),
            ColumnStats::Symbolic { .. } => None,
        }
    }
}

/// Most frequent key; ties go to the lexicographically smallest.
pub(crate) fn mode_of(freq: &BTreeMap<String, usize>) -> Option<String> {
    let mut best: Option<(&String, usize)> = None;
    for (k, &c) in freq {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((k, c));
        }
    }
    best.map(|(k, _)| k.clone())
}

pub(crate) fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// One example. `y` is what labeling reveals; learners must go through
/// [`LabelState`] to read it.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub id: usize,
    pub x: Vec<Cell>,
    /// Goal values, `NaN` where the file has `?`.
    pub y: Vec<f64>,
    /// Cells of ignored columns, kept so the table can be written back.
    pub ignored: Vec<Cell>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("empty header")]
    EmptyHeader,
    #[error("column {index} has an empty name")]
    EmptyName { index: usize },
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("no goal columns (names ending in + or -) among `{0}`")]
    NoGoals(String),
    #[error("no independent columns among `{0}`")]
    NoIndependent(String),
    #[error("record {record}: expected {expected} cells, found {found}")]
    Ragged {
        record: usize,
        expected: usize,
        found: usize,
    },
    #[error("record {record}, column `{column}`: `{value}` is not a number")]
    NotNumeric {
        record: usize,
        column: String,
        value: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Derive column roles from header names.
pub fn parse_header<S: AsRef<str>>(names: &[S]) -> Result<Vec<ColumnSpec>, DatasetError> {
    if names.is_empty() {
        return Err(DatasetError::EmptyHeader);
    }
    let mut seen = HashSet::new();
    let mut specs = Vec::with_capacity(names.len());
    for (index, name) in names.iter().enumerate() {
        let name = name.as_ref().trim();
        let Some(first) = name.chars().next() else {
            return Err(DatasetError::EmptyName { index });
        };
        if !seen.insert(name.to_string()) {
            return Err(DatasetError::DuplicateColumn(name.to_string()));
        }
        let (role, direction) = match name.chars().last() {
            Some('+') => (Role::Goal, Direction::Maximize),
            Some('-') => (Role::Goal, Direction::Minimize),
            Some('X') => (Role::Ignored, Direction::None),
            _ => (Role::Independent, Direction::None),
        };
        // goals are always numeric, whatever their case
        let kind = if first.is_uppercase() || role == Role::Goal {
            Kind::Numeric
        } else {
            Kind::Symbolic
        };
        specs.push(ColumnSpec {
            name: name.to_string(),
            index,
            kind,
            role,
            direction,
        });
    }
    let joined = || {
        specs
            .iter()
            .map(|c| c.name.as_str())
            .collect::<Vec<_>>()
            .join(",")
    };
    if !specs.iter().any(|c| c.role == Role::Goal) {
        return Err(DatasetError::NoGoals(joined()));
    }
    if !specs.iter().any(|c| c.role == Role::Independent) {
        return Err(DatasetError::NoIndependent(joined()));
    }
    Ok(specs)
}

/// Min-max normalization clamped to `[0, 1]`; a degenerate range maps to 0.5.
pub fn norm(lo: f64, hi: f64, v: f64) -> f64 {
    if hi <= lo {
        return 0.5;
    }
    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
}

/// A loaded table. Immutable after load; per-run label state lives in
/// [`LabelState`].
#[derive(Debug, Clone)]
pub struct Dataset {
    name: String,
    columns: Vec<ColumnSpec>,
    rows: Vec<Row>,
    stats: Vec<ColumnStats>,
    x_cols: Vec<usize>,
    y_cols: Vec<usize>,
    ignored_cols: Vec<usize>,
    dims: Dims,
}

impl Dataset {
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "data".to_string());
        Self::from_reader(name, file)
    }

    pub fn from_reader(name: impl Into<String>, reader: impl Read) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(None)
            .from_reader(reader);
        let mut records = rdr.records();
        let header = match records.next() {
            Some(r) => r?,
            None => return Err(DatasetError::EmptyHeader),
        };
        let names: Vec<&str> = header.iter().collect();
        let columns = parse_header(&names)?;

        let mut raw: Vec<Vec<Cell>> = Vec::new();
        for (i, rec) in records.enumerate() {
            let rec = rec?;
            let record = i + 2;
            if rec.len() == 1 && rec.get(0) == Some("") {
                continue;
            }
            if rec.len() != columns.len() {
                return Err(DatasetError::Ragged {
                    record,
                    expected: columns.len(),
                    found: rec.len(),
                });
            }
            let cells = rec
                .iter()
                .zip(&columns)
                .map(|(v, col)| parse_cell(v, col, record))
                .collect::<Result<Vec<_>, _>>()?;
            raw.push(cells);
        }
        Ok(Self::from_cells(name.into(), columns, raw))
    }

    /// Build from already-typed cells. Cells must agree with the column kinds.
    pub fn from_cells(name: String, columns: Vec<ColumnSpec>, raw: Vec<Vec<Cell>>) -> Self {
        let pick = |role: Role| -> Vec<usize> {
            columns
                .iter()
                .filter(|c| c.role == role)
                .map(|c| c.index)
                .collect()
        };
        let x_cols = pick(Role::Independent);
        let y_cols = pick(Role::Goal);
        let ignored_cols = pick(Role::Ignored);

        let stats = columns
            .iter()
            .map(|col| match col.kind {
                Kind::Numeric => {
                    let mut vals: Vec<f64> = raw
                        .iter()
                        .filter_map(|r| r[col.index].as_num())
                        .filter(|v| v.is_finite())
                        .collect();
                    ColumnStats::numeric(&mut vals)
                }
                Kind::Symbolic => ColumnStats::symbolic(raw.iter().filter_map(|r| match &r[col.index] {
                    Cell::Sym(s) => Some(s.as_str()),
                    _ => None,
                })),
            })
            .collect();

        let rows = raw
            .into_iter()
            .enumerate()
            .map(|(id, cells)| Row {
                id,
                x: x_cols.iter().map(|&c| cells[c].clone()).collect(),
                y: y_cols
                    .iter()
                    .map(|&c| cells[c].as_num().unwrap_or(f64::NAN))
                    .collect(),
                ignored: ignored_cols.iter().map(|&c| cells[c].clone()).collect(),
            })
            .collect();

        let dims = classify_dims(x_cols.len());
        Dataset {
            name,
            columns,
            rows,
            stats,
            x_cols,
            y_cols,
            ignored_cols,
            dims,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row(&self, id: usize) -> &Row {
        &self.rows[id]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn stats(&self, column: usize) -> &ColumnStats {
        &self.stats[column]
    }

    /// Column indices of the independent columns, in `Row::x` order.
    pub fn x_cols(&self) -> &[usize] {
        &self.x_cols
    }

    /// Column indices of the goal columns, in `Row::y` order.
    pub fn y_cols(&self) -> &[usize] {
        &self.y_cols
    }

    /// Spec of the `i`-th independent column.
    pub fn x_spec(&self, i: usize) -> &ColumnSpec {
        &self.columns[self.x_cols[i]]
    }

    /// Spec of the `i`-th goal column.
    pub fn y_spec(&self, i: usize) -> &ColumnSpec {
        &self.columns[self.y_cols[i]]
    }

    /// Normalize `v` with the full-file range of `column`.
    pub fn norm(&self, column: usize, v: f64) -> f64 {
        match self.stats[column].range() {
            Some((lo, hi)) => norm(lo, hi, v),
            None => 0.5,
        }
    }

    /// Euclidean distance over independent cells. Numeric cells are compared
    /// normalized, symbolic cells count 0 or 1, and a missing cell is at
    /// distance 1 from anything.
    pub fn x_distance(&self, a: &[Cell], b: &[Cell]) -> f64 {
        let mut sum = 0.0;
        for (i, (ca, cb)) in a.iter().zip(b).enumerate() {
            let d = match (ca, cb) {
                (Cell::Num(va), Cell::Num(vb)) => {
                    let col = self.x_cols[i];
                    (self.norm(col, *va) - self.norm(col, *vb)).abs()
                }
                (Cell::Sym(sa), Cell::Sym(sb))
                    if sa == sb => {
                        0.0
                    }
                _ => 1.0,
            };
            sum += d * d;
        }
        sum.sqrt()
    }

    /// Reassemble a row's cells in header order.
    pub fn cells(&self, row: &Row) -> Vec<Cell> {
        let mut out = vec![Cell::Missing; self.columns.len()];
        for (i, &c) in self.x_cols.iter().enumerate() {
            out[c] = row.x[i].clone();
        }
        for (i, &c) in self.y_cols.iter().enumerate() {
            out[c] = if row.y[i].is_nan() {
                Cell::Missing
            } else {
                Cell::Num(row.y[i])
            };
        }
        for (i, &c) in self.ignored_cols.iter().enumerate() {
            out[c] = row.ignored[i].clone();
        }
        out
    }

    pub fn write_csv(&self, out: impl Write) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            w.write_record(self.cells(row).iter().map(|c| c.to_string()))?;
        }
        w.flush().map_err(|source| DatasetError::Io {
            path: self.name.clone(),
            source,
        })?;
        Ok(())
    }
}

fn parse_cell(v: &str, col: &ColumnSpec, record: usize) -> Result<Cell, DatasetError> {
    if v == MISSING {
        return Ok(Cell::Missing);
    }
    match col.kind {
        Kind::Symbolic => Ok(Cell::Sym(v.to_string())),
        Kind::Numeric => match v.parse::<f64>() {
            Ok(n) if n.is_finite() => Ok(Cell::Num(n)),
            _ => Err(DatasetError::NotNumeric {
                record,
                column: col.name.clone(),
                value: v.to_string(),
            }),
        },
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelError {
    #[error("row {0} is already labeled")]
    AlreadyLabeled(usize),
    #[error("row {0} is not labeled")]
    NotLabeled(usize),
    #[error("row {0} does not exist")]
    UnknownRow(usize),
    #[error("evaluation budget of {0} exhausted")]
    BudgetExhausted(usize),
}

/// Per-run record of which rows have been labeled. Every successful
/// [`label`](LabelState::label) call costs one evaluation; the budget is a
/// hard ceiling.
#[derive(Debug, Clone)]
pub struct LabelState<'a> {
    ds: &'a Dataset,
    labeled: Vec<bool>,
    order: Vec<usize>,
    budget: usize,
}

impl<'a> LabelState<'a> {
    pub fn new(ds: &'a Dataset, budget: usize) -> Self {
        LabelState {
            ds,
            labeled: vec![false; ds.len()],
            order: Vec::new(),
            budget,
        }
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.ds
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Reveal a row's goals, spending one evaluation.
    pub fn label(&mut self, id: usize) -> Result<&'a [f64], LabelError> {
        if id >= self.labeled.len() {
            return Err(LabelError::UnknownRow(id));
        }
        if self.labeled[id] {
            return Err(LabelError::AlreadyLabeled(id));
        }
        if self.order.len() >= self.budget {
            return Err(LabelError::BudgetExhausted(self.budget));
        }
        self.labeled[id] = true;
        self.order.push(id);
        Ok(&self.ds.rows[id].y)
    }

    pub fn is_labeled(&self, id: usize) -> bool {
        self.labeled.get(id).copied().unwrap_or(false)
    }

    /// Goals of a labeled row.
    pub fn goals(&self, id: usize) -> Result<&'a [f64], LabelError> {
        if id >= self.labeled.len() {
            return Err(LabelError::UnknownRow(id));
        }
        if !self.labeled[id] {
            return Err(LabelError::NotLabeled(id));
        }
        Ok(&self.ds.rows[id].y)
    }

    pub fn evaluations(&self) -> usize {
        self.order.len()
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.order.len()
    }

    /// Labeled row ids in labeling order.
    pub fn labeled_ids(&self) -> &[usize] {
        &self.order
    }

    /// Unlabeled row ids, ascending.
    pub fn unlabeled_ids(&self) -> Vec<usize> {
        (0..self.labeled.len()).filter(|&i| !self.labeled[i]).collect()
    }

    /// Number of rows whose flag is set; always equals `evaluations()`.
    pub fn labeled_count(&self) -> usize {
        self.labeled.iter().filter(|&&b| b).count()
    }
}
