//! Two-class best/rest surrogate.
//!
//! Each class gets a naive-Bayes likelihood: a Gaussian per numeric column
//! (fitted on normalized values) and an add-one smoothed frequency table per
//! symbolic column. `B` and `R` are the class likelihoods of a row; the
//! acquisitions trade them off:
//!
//! * exploit: `B / (R + eps)`, high where both models agree on "best";
//! * explore: `|B + R| / (|B - R| + eps)`, high where the classes tie.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Cell, ColumnStats, Dataset, Kind};
use crate::objective::BestRestSplit;

/// Added to denominators.
pub const EPS_DIV: f64 = 1e-30;
/// Floor on per-class standard deviations, in normalized units.
pub const EPS_SD: f64 = 1e-9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LikelihoodError {
    #[error("the {0} class is empty")]
    EmptyClass(&'static str),
    #[error("cannot acquire from an empty pool")]
    EmptyPool,
}

#[derive(Debug, Clone, PartialEq)]
enum ColumnModel {
    Gaussian { mean: f64, sd: f64 },
    Frequencies {
        counts: BTreeMap<String, usize>,
        n: usize,
        alphabet: usize,
    },
    /// No known values in this class; contributes a factor of 1.
    Uninformative,
}

impl ColumnModel {
    fn log_like(&self, cell: &Cell, ds: &Dataset, column: usize) -> f64 {
        match (self, cell) {
            (ColumnModel::Gaussian { mean, sd }, Cell::Num(v)) => {
                let z = (ds.norm(column, *v) - mean) / sd;
                -0.5 * z * z - (sd * (2.0 * PI).sqrt()).ln()
            }
            (ColumnModel::Frequencies { counts, n, alphabet }, Cell::Sym(s)) => {
                let c = counts.get(s).copied().unwrap_or(0);
                ((c + 1) as f64 / (n + alphabet) as f64).ln()
            }
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ClassModel {
    prior: f64,
    n: usize,
    columns: Vec<ColumnModel>,
}

impl ClassModel {
    fn fit(ids: &[usize], total: usize, ds: &Dataset) -> Self {
        let columns = ds
            .x_cols()
            .iter()
            .enumerate()
            .map(|(i, &col)| match ds.columns()[col].kind {
                Kind::Numeric => {
                    let vals: Vec<f64> = ids
                        .iter()
                        .filter_map(|&id| ds.row(id).x[i].as_num())
                        .map(|v| ds.norm(col, v))
                        .collect();
                    if vals.is_empty() {
                        return ColumnModel::Uninformative;
                    }
                    let n = vals.len() as f64;
                    let mean = vals.iter().sum::<f64>() / n;
                    let sd = if vals.len() > 1 {
                        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
                    } else {
                        0.0
                    };
                    ColumnModel::Gaussian {
                        mean,
                        sd: sd.max(EPS_SD),
                    }
                }
                Kind::Symbolic => {
                    let mut counts = BTreeMap::new();
                    let mut n = 0;
                    for &id in ids {
                        if let Cell::Sym(s) = &ds.row(id).x[i] {
                            *counts.entry(s.clone()).or_insert(0) += 1;
                            n += 1;
                        }
                    }
                    let alphabet = match ds.stats(col) {
                        ColumnStats::Symbolic { freq, .. } => freq.len(),
                        ColumnStats::Numeric { .. } => 0,
                    };
                    ColumnModel::Frequencies {
                        counts,
                        n,
                        alphabet: alphabet.max(1),
                    }
                }
            })
            .collect();
        ClassModel {
            prior: ids.len() as f64 / total as f64,
            n: ids.len(),
            columns,
        }
    }

    fn log_like(&self, x: &[Cell], ds: &Dataset) -> f64 {
        self.prior.ln()
            + self
                .columns
                .iter()
                .zip(x)
                .zip(ds.x_cols())
                .map(|((m, cell), &col)| m.log_like(cell, ds, col))
                .sum::<f64>()
    }
}

/// Class-conditional likelihood models for the best and rest sets.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoClassModel {
    best: ClassModel,
    rest: ClassModel,
}

impl TwoClassModel {
    pub fn fit(split: &BestRestSplit, ds: &Dataset) -> Result<Self, LikelihoodError> {
        if split.best.is_empty() {
            return Err(LikelihoodError::EmptyClass("best"));
        }
        if split.rest.is_empty() {
            return Err(LikelihoodError::EmptyClass("rest"));
        }
        let total = split.len();
        let best: Vec<usize> = split.best.iter().map(|s| s.id).collect();
        let rest: Vec<usize> = split.rest.iter().map(|s| s.id).collect();
        Ok(TwoClassModel {
            best: ClassModel::fit(&best, total, ds),
            rest: ClassModel::fit(&rest, total, ds),
        })
    }

    pub fn prior_best(&self) -> f64 {
        self.best.prior
    }

    pub fn prior_rest(&self) -> f64 {
        self.rest.prior
    }

    pub fn class_sizes(&self) -> (usize, usize) {
        (self.best.n, self.rest.n)
    }

    /// Unscaled log-likelihoods `(ln B, ln R)`.
    pub fn log_likes(&self, x: &[Cell], ds: &Dataset) -> (f64, f64) {
        (self.best.log_like(x, ds), self.rest.log_like(x, ds))
    }

    /// `(B, R)` scaled so the larger is 1. The ratio is exact; both
    /// acquisitions only depend on it (up to `EPS_DIV`).
    pub fn likes(&self, x: &[Cell], ds: &Dataset) -> (f64, f64) {
        let (lb, lr) = self.log_likes(x, ds);
        let top = lb.max(lr);
        ((lb - top).exp(), (lr - top).exp())
    }
}

pub fn exploit(b: f64, r: f64) -> f64 {
    b / (r + EPS_DIV)
}

/// Explore with the absolute-difference denominator (the default reading).
pub fn explore(b: f64, r: f64) -> f64 {
    (b + r).abs() / ((b - r).abs() + EPS_DIV)
}

/// Explore with the signed denominator `(B - R) + eps`, kept for comparison.
/// Negative wherever `R > B`.
pub fn explore_signed(b: f64, r: f64) -> f64 {
    (b + r).abs() / ((b - r) + EPS_DIV)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExploreForm {
    #[default]
    Absolute,
    Signed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TpeAcquisition {
    Exploit,
    Explore,
}

impl TpeAcquisition {
    pub fn score(self, form: ExploreForm, b: f64, r: f64) -> f64 {
        match (self, form) {
            (TpeAcquisition::Exploit, _) => exploit(b, r),
            (TpeAcquisition::Explore, ExploreForm::Absolute) => explore(b, r),
            (TpeAcquisition::Explore, ExploreForm::Signed) => explore_signed(b, r),
        }
    }
}

/// Index of the maximum score, ties to the lowest id. `scored` is
/// `(id, score)`.
pub(crate) fn argmax_lowest_id(scored: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (id, s) in scored {
        best = match best {
            None => Some((id, s)),
            Some((bid, bs)) => {
                if s > bs || (s == bs && id < bid) || (bs.is_nan() && !s.is_nan()) {
                    Some((id, s))
                } else {
                    Some((bid, bs))
                }
            }
        };
    }
    best.map(|(id, _)| id)
}

/// Pick the pool row with the highest acquisition score.
pub fn acquire_tpe(
    model: &TwoClassModel,
    ds: &Dataset,
    pool: &[usize],
    acquisition: TpeAcquisition,
    form: ExploreForm,
) -> Result<usize, LikelihoodError> {
    argmax_lowest_id(pool.iter().map(|&id| {
        let (b, r) = model.likes(&ds.row(id).x, ds);
        (id, acquisition.score(form, b, r))
    }))
    .ok_or(LikelihoodError::EmptyPool)
}
