//! Scott-Knott ranking gated by Cliff's delta and a bootstrap test, plus
//! rank-frequency summaries across datasets.

pub mod bootstrap;
pub mod cliffs;
pub mod frequency;
pub mod render;
pub mod scott_knott;

use serde::{Deserialize, Serialize};

pub use bootstrap::bootstrap_same;
pub use cliffs::cliffs_delta;
pub use frequency::{evals_needed, rank_frequencies, EvalsNeeded, FrequencyTable};
pub use render::{rank_table_csv, rank_table_text, sparkline};
pub use scott_knott::{scott_knott, sk_split, Group, RankTable, Ranked};

/// Results of one treatment on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Full treatment label, e.g. `llm/exploit/20`.
    pub label: String,
    /// Start and acquisition without the budget, e.g. `llm/exploit`.
    pub arm: String,
    pub budget: usize,
    pub values: Vec<f64>,
}

impl Sample {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        let label = label.into();
        Sample {
            arm: label.clone(),
            label,
            budget: 0,
            values,
        }
    }

    pub fn with_arm(arm: impl Into<String>, budget: usize, label: impl Into<String>, values: Vec<f64>) -> Self {
        Sample {
            label: label.into(),
            arm: arm.into(),
            budget,
            values,
        }
    }

    pub fn median(&self) -> f64 {
        percentile(&sorted(&self.values), 0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkConfig {
    /// Cliff's delta at or below this is a negligible effect.
    pub delta_small: f64,
    pub n_boot: usize,
    pub conf: f64,
    pub seed: u64,
}

impl Default for SkConfig {
    fn default() -> Self {
        SkConfig {
            delta_small: 0.147,
            n_boot: 512,
            conf: 0.95,
            seed: 1,
        }
    }
}

pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation; 0 for fewer than two values.
pub fn sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Percentile of sorted values; the median of an even count is the mean of
/// the middle pair, other quantiles use the nearest lower rank.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if q == 0.5 {
        return crate::dataset::median_sorted(sorted);
    }
    sorted[((q * n as f64) as usize).min(n - 1)]
}
