//! Chebyshev scalarization of goal vectors and the best/rest partition.
//!
//! Goals are normalized with the full-file range, so the ideal point is 0 for
//! minimized goals and 1 for maximized ones and every score lies in `[0, 1]`.
//! Lower scores are better.

use thiserror::Error;

use crate::dataset::{Dataset, Direction, LabelError, LabelState};

/// Target value of each goal in normalized space.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealPoint(pub Vec<f64>);

impl IdealPoint {
    pub fn of(ds: &Dataset) -> Self {
        IdealPoint(
            (0..ds.y_cols().len())
                .map(|i| match ds.y_spec(i).direction {
                    Direction::Maximize => 1.0,
                    _ => 0.0,
                })
                .collect(),
        )
    }
}

/// Chebyshev distance of a goal vector to the ideal point. A missing goal
/// (`NaN`) counts as the worst possible gap.
pub fn chebyshev_of(ds: &Dataset, y: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, &v) in y.iter().enumerate() {
        let spec = ds.y_spec(i);
        let gap = if v.is_nan() {
            1.0
        } else {
            let n = ds.norm(spec.index, v);
            match spec.direction {
                Direction::Maximize => 1.0 - n,
                _ => n,
            }
        };
        worst = worst.max(gap);
    }
    worst
}

/// Score of a labeled row. Asking for an unlabeled row is a contract
/// violation and fails.
pub fn chebyshev(labels: &LabelState<'_>, id: usize) -> Result<f64, LabelError> {
    let y = labels.goals(id)?;
    Ok(chebyshev_of(labels.dataset(), y))
}

/// Scores of every row in the file. Simulator-side only; learners never see
/// this.
pub fn all_scores(ds: &Dataset) -> Vec<f64> {
    ds.rows().iter().map(|r| chebyshev_of(ds, &r.y)).collect()
}

/// A labeled row id with its score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub id: usize,
    pub score: f64,
}

/// Labeled rows divided into the top `round(sqrt(N))` and the rest, both
/// ascending by score.
#[derive(Debug, Clone, PartialEq)]
pub struct BestRestSplit {
    pub best: Vec<Scored>,
    pub rest: Vec<Scored>,
}

impl BestRestSplit {
    pub fn len(&self) -> usize {
        self.best.len() + self.rest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All rows, best first.
    pub fn ranked(&self) -> impl Iterator<Item = &Scored> {
        self.best.iter().chain(&self.rest)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SplitError {
    #[error("need at least 2 labeled rows to split, got {0}")]
    TooFew(usize),
    #[error(transparent)]
    Label(#[from] LabelError),
}

/// Size of the best set for `n` labeled rows.
pub fn best_size(n: usize) -> usize {
    ((n as f64).sqrt().round() as usize).max(1)
}

/// Sort by score (ties by lower id) and cut after `round(sqrt(N))`.
pub fn split_scored(mut rows: Vec<Scored>) -> Result<BestRestSplit, SplitError> {
    if rows.len() < 2 {
        return Err(SplitError::TooFew(rows.len()));
    }
    rows.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.id.cmp(&b.id)));
    let rest = rows.split_off(best_size(rows.len()));
    Ok(BestRestSplit { best: rows, rest })
}

/// Split the currently labeled rows.
pub fn split(labels: &LabelState<'_>) -> Result<BestRestSplit, SplitError> {
    let scored = labels
        .labeled_ids()
        .iter()
        .map(|&id| Ok(Scored { id, score: chebyshev(labels, id)? }))
        .collect::<Result<Vec<_>, LabelError>>()?;
    split_scored(scored)
}
