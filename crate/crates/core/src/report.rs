//! Rank tables, frequency tables and improvement curves from a results
//! directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::dataset::Dims;
use crate::engine::{improvement_ratio, Acquire};
use crate::runner::{read_jsonl, DatasetRecord, ResultRecord, DATASETS_FILE, RESULTS_FILE};
use crate::stats::{
    evals_needed, rank_frequencies, rank_table_csv, rank_table_text, scott_knott, EvalsNeeded, FrequencyTable,
    RankTable, Sample, SkConfig,
};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no results in {0}")]
    Empty(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Mean normalized improvement of one (arm, budget) over the datasets where
/// it is defined.
#[derive(Debug, Clone, PartialEq)]
pub struct ImprovementPoint {
    pub arm: String,
    pub budget: usize,
    pub datasets: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub tables: BTreeMap<String, RankTable>,
    pub dims: BTreeMap<String, Dims>,
    pub frequencies: Vec<(Dims, FrequencyTable)>,
    pub evals: EvalsNeeded,
    /// Per dataset, `(arm, budget, value)`.
    pub improvement_by_dataset: Vec<(String, String, usize, f64)>,
    pub improvement: Vec<ImprovementPoint>,
}

impl Report {
    /// Improvement curve of one arm, ascending by budget.
    pub fn curve(&self, arm: &str) -> Vec<(usize, f64)> {
        self.improvement
            .iter()
            .filter(|p| p.arm == arm)
            .map(|p| (p.budget, p.value))
            .collect()
    }
}

/// Samples of one dataset, keyed by (arm, budget).
fn samples_of(records: &[&ResultRecord]) -> Vec<Sample> {
    let mut by: BTreeMap<(String, usize), Vec<(usize, f64)>> = BTreeMap::new();
    for r in records {
        by.entry((r.arm(), r.budget)).or_default().push((r.repeat, r.best));
    }
    by.into_iter()
        .map(|((arm, budget), mut v)| {
            v.sort_by_key(|p| p.0);
            let label = format!("{arm}/{budget}");
            Sample::with_arm(arm, budget, label, v.into_iter().map(|p| p.1).collect())
        })
        .collect()
}

pub fn build_report(results: &[ResultRecord], datasets: &[DatasetRecord], sk: &SkConfig) -> Report {
    let mut by_ds: BTreeMap<&str, Vec<&ResultRecord>> = BTreeMap::new();
    for r in results {
        by_ds.entry(r.dataset.as_str()).or_default().push(r);
    }
    let meta: BTreeMap<&str, &DatasetRecord> = datasets.iter().map(|d| (d.name.as_str(), d)).collect();

    let mut tables = BTreeMap::new();
    let mut improvement_by_dataset = Vec::new();
    for (name, recs) in &by_ds {
        let samples = samples_of(recs);
        if let Some(m) = meta.get(name) {
            for s in &samples {
                if s.arm == Acquire::Baseline.as_str() {
                    continue;
                }
                if let Some(v) = improvement_ratio(&s.values, m.mean, m.lo) {
                    improvement_by_dataset.push((name.to_string(), s.arm.clone(), s.budget, v));
                }
            }
        }
        tables.insert(name.to_string(), scott_knott(samples, sk));
    }

    let dims: BTreeMap<String, Dims> = tables
        .keys()
        .filter_map(|n| meta.get(n.as_str()).map(|m| (n.clone(), m.dims)))
        .collect();
    let frequencies = Dims::ALL
        .iter()
        .map(|&d| {
            let ts: Vec<&RankTable> = tables
                .iter()
                .filter(|(n, _)| dims.get(*n) == Some(&d))
                .map(|(_, t)| t)
                .collect();
            (d, rank_frequencies(&ts))
        })
        .collect();
    let all: Vec<&RankTable> = tables.values().collect();
    let evals = evals_needed(&all);

    let mut acc: BTreeMap<(String, usize), (f64, usize)> = BTreeMap::new();
    for (_, arm, budget, v) in &improvement_by_dataset {
        let e = acc.entry((arm.clone(), *budget)).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    let improvement = acc
        .into_iter()
        .map(|((arm, budget), (s, k))| ImprovementPoint {
            arm,
            budget,
            datasets: k,
            value: s / k as f64,
        })
        .collect();

    Report {
        tables,
        dims,
        frequencies,
        evals,
        improvement_by_dataset,
        improvement,
    }
}

pub fn load_report(dir: &Path, sk: &SkConfig) -> Result<Report, ReportError> {
    let io = |p: &Path| {
        let path = p.display().to_string();
        move |source| ReportError::Io { path, source }
    };
    let rp = dir.join(RESULTS_FILE);
    let results: Vec<ResultRecord> = read_jsonl(&rp).map_err(io(&rp))?;
    if results.is_empty() {
        return Err(ReportError::Empty(dir.display().to_string()));
    }
    let dp = dir.join(DATASETS_FILE);
    let datasets: Vec<DatasetRecord> = if dp.exists() { read_jsonl(&dp).map_err(io(&dp))? } else { Vec::new() };
    Ok(build_report(&results, &datasets, sk))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.1}"))
}

pub fn frequency_csv(t: &FrequencyTable) -> String {
    let ranks = t.ranks.max(1);
    let mut out = String::from("arm");
    for r in 0..ranks {
        let _ = write!(out, ",{r}");
    }
    out.push('\n');
    for (arm, pct) in &t.rows {
        out.push_str(arm);
        for r in 0..ranks {
            let _ = write!(out, ",{:.0}", pct.get(r).copied().unwrap_or(0.0));
        }
        out.push('\n');
    }
    out
}

pub fn evals_csv(e: &EvalsNeeded) -> String {
    let ranks = e.ranks.max(1);
    let mut out = String::from("arm");
    for r in 0..ranks {
        let _ = write!(out, ",{r}");
    }
    out.push('\n');
    for (arm, v) in &e.rows {
        out.push_str(arm);
        for r in 0..ranks {
            let _ = write!(out, ",{}", fmt_opt(v.get(r).copied().flatten()));
        }
        out.push('\n');
    }
    out
}

pub fn improvement_csv(report: &Report) -> String {
    let mut out = String::from("arm,budget,datasets,normalized_improvement\n");
    for p in &report.improvement {
        let _ = writeln!(out, "{},{},{},{}", p.arm, p.budget, p.datasets, p.value);
    }
    out
}

pub fn improvement_by_dataset_csv(report: &Report) -> String {
    let mut out = String::from("dataset,arm,budget,normalized_improvement\n");
    for (d, arm, b, v) in &report.improvement_by_dataset {
        let _ = writeln!(out, "{d},{arm},{b},{v}");
    }
    out
}

/// Write all report files into `dir`.
pub fn write_report(dir: &Path, report: &Report) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, t) in &report.tables {
        let title = match report.dims.get(name) {
            Some(d) => format!("{name} ({d})"),
            None => name.clone(),
        };
        std::fs::write(dir.join(format!("rank_{name}.txt")), rank_table_text(t, &title))?;
        std::fs::write(dir.join(format!("rank_{name}.csv")), rank_table_csv(t))?;
    }
    for (d, f) in &report.frequencies {
        std::fs::write(dir.join(format!("freq_{d}.csv")), frequency_csv(f))?;
    }
    std::fs::write(dir.join("evals_needed.csv"), evals_csv(&report.evals))?;
    std::fs::write(dir.join("improvement.csv"), improvement_csv(report))?;
    std::fs::write(dir.join("improvement_by_dataset.csv"), improvement_by_dataset_csv(report))
}
