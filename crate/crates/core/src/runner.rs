//! Experiment grids: every dataset × treatment × budget × repeat, run in
//! parallel, with results written as line-delimited JSON.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, Dims};
use crate::engine::{run_baseline, run_seed, run_treatment, Acquire, EngineConfig, RunResult, Start, Treatment};
use crate::warmstart::Synthesizer;

/// Start and acquisition of one treatment family; `start` is `None` for
/// random selection and the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arm {
    pub start: Option<Start>,
    pub acquire: Acquire,
}

impl Arm {
    pub fn name(&self) -> String {
        match self.start {
            Some(s) => format!("{}/{}", s.as_str(), self.acquire.as_str()),
            None => self.acquire.as_str().to_string(),
        }
    }
}

/// LLM/{exploit, explore}, random/{exploit, explore, ucb, pi, ei}, random
/// selection and the baseline.
pub fn default_arms() -> Vec<Arm> {
    let mut arms = vec![
        Arm { start: Some(Start::Llm), acquire: Acquire::Exploit },
        Arm { start: Some(Start::Llm), acquire: Acquire::Explore },
    ];
    for a in Acquire::ACTIVE {
        arms.push(Arm { start: Some(Start::Random), acquire: a });
    }
    arms.push(Arm { start: None, acquire: Acquire::Random });
    arms.push(Arm { start: None, acquire: Acquire::Baseline });
    arms
}

pub const DEFAULT_BUDGETS: [usize; 5] = [10, 15, 20, 25, 30];
pub const DEFAULT_REPEATS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub arms: Vec<Arm>,
    pub budgets: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
    pub engine: EngineConfig,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            arms: default_arms(),
            budgets: DEFAULT_BUDGETS.to_vec(),
            repeats: DEFAULT_REPEATS,
            seed: 1,
            engine: EngineConfig::default(),
            jobs: 0,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("repeats must be at least 1")]
    NoRepeats,
    #[error("no budgets given")]
    NoBudgets,
    #[error("no treatments given")]
    NoArms,
    #[error("budget {budget} must exceed the warm-start size {b0}")]
    BudgetTooSmall { budget: usize, b0: usize },
    #[error("warm-start size must be at least 2, got {0}")]
    WarmTooSmall(usize),
}

impl GridConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let b0 = self.engine.warm.b0;
        if self.repeats == 0 {
            return Err(ConfigError::NoRepeats);
        }
        if self.arms.is_empty() {
            return Err(ConfigError::NoArms);
        }
        if self.arms.iter().any(|a| a.acquire != Acquire::Baseline) && self.budgets.is_empty() {
            return Err(ConfigError::NoBudgets);
        }
        if b0 < 2 {
            return Err(ConfigError::WarmTooSmall(b0));
        }
        if let Some(&budget) = self.budgets.iter().find(|&&b| b <= b0) {
            return Err(ConfigError::BudgetTooSmall { budget, b0 });
        }
        Ok(())
    }

    /// Treatments that are actual runs (everything but the baseline).
    pub fn treatments(&self) -> Vec<Treatment> {
        let mut out = Vec::new();
        for arm in &self.arms {
            if arm.acquire == Acquire::Baseline {
                continue;
            }
            for &budget in &self.budgets {
                out.push(Treatment {
                    start: arm.start,
                    acquire: arm.acquire,
                    budget,
                });
            }
        }
        out
    }

    pub fn has_baseline(&self) -> bool {
        self.arms.iter().any(|a| a.acquire == Acquire::Baseline)
    }
}

/// One line of `results.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub dataset: String,
    /// `random`, `llm`, or `none`.
    pub start: String,
    pub acquire: Acquire,
    pub budget: usize,
    pub repeat: usize,
    pub seed: u64,
    pub best: f64,
    pub evals: usize,
    pub fallback: bool,
}

impl ResultRecord {
    pub fn from_run(r: &RunResult) -> Self {
        ResultRecord {
            dataset: r.dataset.clone(),
            start: r.treatment.start.map_or("none", Start::as_str).to_string(),
            acquire: r.treatment.acquire,
            budget: r.treatment.budget,
            repeat: r.repeat,
            seed: r.seed,
            best: r.best_chebyshev,
            evals: r.evaluations_used,
            fallback: r.warm_fallback,
        }
    }

    pub fn arm(&self) -> String {
        if self.start == "none" {
            self.acquire.as_str().to_string()
        } else {
            format!("{}/{}", self.start, self.acquire.as_str())
        }
    }
}

/// One line of `datasets.jsonl`: shape and whole-file score summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub name: String,
    pub rows: usize,
    pub n_x: usize,
    pub n_y: usize,
    pub dims: Dims,
    pub mean: f64,
    pub lo: f64,
    pub median: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub dataset: String,
    pub treatment: String,
    pub repeat: usize,
    pub attempt: usize,
    pub synthesizer: String,
    pub request: Option<String>,
    pub response: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub dataset: String,
    pub treatment: String,
    pub repeat: usize,
    /// `(evaluation, best so far)` pairs.
    pub trace: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridOutput {
    pub results: Vec<ResultRecord>,
    pub datasets: Vec<DatasetRecord>,
    pub transcripts: Vec<TranscriptRecord>,
    pub traces: Vec<TraceRecord>,
    /// Full run results, in grid order.
    pub runs: Vec<RunResult>,
    pub failures: Vec<String>,
}

pub fn dataset_record(ds: &Dataset) -> DatasetRecord {
    let b = run_baseline(ds);
    DatasetRecord {
        name: ds.name().to_string(),
        rows: ds.len(),
        n_x: ds.x_cols().len(),
        n_y: ds.y_cols().len(),
        dims: ds.dims(),
        mean: b.mean,
        lo: b.lo,
        median: b.median,
        sd: b.sd,
    }
}

/// `repeats` records standing for the whole-file distribution: the score
/// quantiles at `(i + 0.5) / repeats`, each charged the full row count.
pub fn baseline_records(ds: &Dataset, repeats: usize, base_seed: u64) -> Vec<ResultRecord> {
    let b = run_baseline(ds);
    (0..repeats)
        .map(|i| ResultRecord {
            dataset: ds.name().to_string(),
            start: "none".to_string(),
            acquire: Acquire::Baseline,
            budget: b.rows,
            repeat: i,
            seed: run_seed(base_seed, ds.name(), i),
            best: b.quantile((i as f64 + 0.5) / repeats as f64),
            evals: b.rows,
            fallback: false,
        })
        .collect()
}

/// Run the grid. Output order is fixed by (dataset, treatment, repeat)
/// regardless of thread count.
pub fn run_grid(datasets: &[Dataset], cfg: &GridConfig, synth: &dyn Synthesizer) -> GridOutput {
    let treatments = cfg.treatments();
    let jobs: Vec<(usize, Treatment, usize)> = (0..datasets.len())
        .flat_map(|d| {
            treatments
                .iter()
                .flat_map(move |&t| (0..cfg.repeats).map(move |r| (d, t, r)))
        })
        .collect();
    let work = || {
        jobs.par_iter()
            .map(|&(d, t, r)| {
                let ds = &datasets[d];
                let seed = run_seed(cfg.seed, ds.name(), r);
                run_treatment(ds, t, &cfg.engine, synth, r, seed)
                    .map_err(|e| format!("{} {t} repeat {r}: {e}", ds.name()))
            })
            .collect::<Vec<_>>()
    };
    let outcomes = match rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    };

    let mut out = GridOutput::default();
    for ds in datasets {
        out.datasets.push(dataset_record(ds));
    }
    for outcome in outcomes {
        match outcome {
            Ok(run) => {
                let label = run.treatment.to_string();
                for t in &run.transcripts {
                    out.transcripts.push(TranscriptRecord {
                        dataset: run.dataset.clone(),
                        treatment: label.clone(),
                        repeat: run.repeat,
                        attempt: t.attempt,
                        synthesizer: t.synthesizer.clone(),
                        request: t.exchange.as_ref().map(|e| e.request.clone()),
                        response: t.exchange.as_ref().map(|e| e.response.clone()),
                        error: t.error.clone(),
                    });
                }
                out.traces.push(TraceRecord {
                    dataset: run.dataset.clone(),
                    treatment: label,
                    repeat: run.repeat,
                    trace: run.trace.iter().map(|p| (p.eval, p.best)).collect(),
                });
                out.results.push(ResultRecord::from_run(&run));
                out.runs.push(run);
            }
            Err(e) => {
                log::error!("{e}");
                out.failures.push(e);
            }
        }
    }
    if cfg.has_baseline() {
        for ds in datasets {
            out.results.extend(baseline_records(ds, cfg.repeats, cfg.seed));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestDataset {
    pub name: String,
    pub path: Option<PathBuf>,
    pub rows: usize,
    /// Seed of each repeat.
    pub seeds: Vec<u64>,
}

/// Everything needed to replay any single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub synthesizer: String,
    pub config: GridConfig,
    pub datasets: Vec<ManifestDataset>,
}

impl Manifest {
    pub fn new(cfg: &GridConfig, datasets: &[(Dataset, Option<PathBuf>)], synthesizer: &str) -> Self {
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            synthesizer: synthesizer.to_string(),
            config: cfg.clone(),
            datasets: datasets
                .iter()
                .map(|(ds, path)| ManifestDataset {
                    name: ds.name().to_string(),
                    path: path.clone(),
                    rows: ds.len(),
                    seeds: (0..cfg.repeats).map(|r| run_seed(cfg.seed, ds.name(), r)).collect(),
                })
                .collect(),
        }
    }
}

/// Re-run one (dataset, treatment, repeat) cell from a manifest.
pub fn replay(
    manifest: &Manifest,
    ds: &Dataset,
    treatment: Treatment,
    repeat: usize,
    synth: &dyn Synthesizer,
) -> Result<RunResult, crate::engine::EngineError> {
    let seed = manifest
        .datasets
        .iter()
        .find(|d| d.name == ds.name())
        .and_then(|d| d.seeds.get(repeat).copied())
        .unwrap_or_else(|| run_seed(manifest.config.seed, ds.name(), repeat));
    run_treatment(ds, treatment, &manifest.config.engine, synth, repeat, seed)
}

pub const RESULTS_FILE: &str = "results.jsonl";
pub const DATASETS_FILE: &str = "datasets.jsonl";
pub const TRANSCRIPTS_FILE: &str = "transcripts.jsonl";
pub const TRACES_FILE: &str = "traces.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for it in items {
        serde_json::to_writer(&mut w, it)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> std::io::Result<Vec<T>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(std::io::Error::from))
        .collect()
}

/// Write every artifact of a grid into `dir`.
pub fn write_outputs(dir: &Path, out: &GridOutput, manifest: &Manifest) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    write_jsonl(&dir.join(RESULTS_FILE), &out.results)?;
    write_jsonl(&dir.join(DATASETS_FILE), &out.datasets)?;
    write_jsonl(&dir.join(TRANSCRIPTS_FILE), &out.transcripts)?;
    write_jsonl(&dir.join(TRACES_FILE), &out.traces)?;
    let mut m = serde_json::to_string_pretty(manifest)?;
    m.push('\n');
    std::fs::write(dir.join(MANIFEST_FILE), m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warmstart::MockSynthesizer;

    fn toy() -> Dataset {
        let mut text = String::from("A,B,C-,D+\n");
        for i in 0..60 {
            let (a, b) = (i % 11, (i * 3) % 7);
            text.push_str(&format!("{a},{b},{},{}\n", (a as i64 - 3).abs() + b as i64, (a * b) % 5));
        }
        Dataset::from_reader("toy", text.as_bytes()).unwrap()
    }

    fn small_cfg() -> GridConfig {
        GridConfig {
            budgets: vec![6, 8],
            repeats: 3,
            ..GridConfig::default()
        }
    }

    #[test]
    fn grid_counts_and_order() {
        let ds = [toy()];
        let cfg = small_cfg();
        let out = run_grid(&ds, &cfg, &MockSynthesizer);
        assert!(out.failures.is_empty());
        // 8 run arms x 2 budgets x 3 repeats, plus 3 baseline lines
        assert_eq!(out.results.len(), 8 * 2 * 3 + 3);
        assert!(out.results.iter().all(|r| r.acquire == Acquire::Baseline || r.evals <= r.budget));
        let serial = run_grid(&ds, &GridConfig { jobs: 1, ..cfg.clone() }, &MockSynthesizer);
        assert_eq!(serial.results, out.results);
        assert!(out.transcripts.iter().all(|t| t.synthesizer == "mock"));
        assert_eq!(out.transcripts.len(), 2 * 2 * 3);
    }

    #[test]
    fn baseline_quantiles_track_the_file() {
        let ds = toy();
        let recs = baseline_records(&ds, 20, 1);
        assert_eq!(recs.len(), 20);
        assert!(recs.windows(2).all(|w| w[0].best <= w[1].best));
        assert!(recs.iter().all(|r| r.evals == 60 && r.budget == 60 && r.start == "none"));
    }

    #[test]
    fn config_validation() {
        assert_eq!(small_cfg().validate(), Ok(()));
        let bad = GridConfig { budgets: vec![4, 10], ..small_cfg() };
        assert_eq!(bad.validate(), Err(ConfigError::BudgetTooSmall { budget: 4, b0: 4 }));
        assert_eq!(GridConfig { repeats: 0, ..small_cfg() }.validate(), Err(ConfigError::NoRepeats));
    }

    #[test]
    fn replay_from_manifest() {
        let ds = toy();
        let cfg = small_cfg();
        let out = run_grid(std::slice::from_ref(&ds), &cfg, &MockSynthesizer);
        let m = Manifest::new(&cfg, &[(ds.clone(), None)], "mock");
        let run = out.runs.iter().find(|r| r.treatment.start == Some(Start::Llm) && r.repeat == 2).unwrap();
        assert_eq!(&replay(&m, &ds, run.treatment, 2, &MockSynthesizer).unwrap(), run);
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = toy();
        let out = run_grid(std::slice::from_ref(&ds), &small_cfg(), &MockSynthesizer);
        let path = dir.path().join("r.jsonl");
        write_jsonl(&path, &out.results).unwrap();
        let back: Vec<ResultRecord> = read_jsonl(&path).unwrap();
        assert_eq!(back, out.results);
        let line = std::fs::read_to_string(&path).unwrap();
        let first: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
        let keys: Vec<&str> = first.as_object().unwrap().keys().map(String::as_str).collect();
        for k in ["dataset", "start", "acquire", "budget", "repeat", "seed", "best", "evals", "fallback"] {
            assert!(keys.contains(&k), "{k}");
        }
    }
}
