//! Active-learning runs under a strict label budget, plus the random
//! selection and whole-file baseline treatments.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{median_sorted, Dataset, LabelError, LabelState};
use crate::gp::{acquire_gp, fit_gp, AcquisitionParams, Encoding, GpAcquisition};
use crate::likelihood::{acquire_tpe, ExploreForm, TpeAcquisition, TwoClassModel};
use crate::objective::{all_scores, chebyshev, split};
use crate::warmstart::{cold_start, warm_start, StartError, Synthesizer, Transcript, WarmConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    Random,
    Llm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Acquire {
    Exploit,
    Explore,
    Ucb,
    Pi,
    Ei,
    Random,
    Baseline,
}

impl Start {
    pub fn as_str(self) -> &'static str {
        match self {
            Start::Random => "random",
            Start::Llm => "llm",
        }
    }
}

impl Acquire {
    pub const ACTIVE: [Acquire; 5] = [Acquire::Exploit, Acquire::Explore, Acquire::Ucb, Acquire::Pi, Acquire::Ei];

    pub fn as_str(self) -> &'static str {
        match self {
            Acquire::Exploit => "exploit",
            Acquire::Explore => "explore",
            Acquire::Ucb => "ucb",
            Acquire::Pi => "pi",
            Acquire::Ei => "ei",
            Acquire::Random => "random",
            Acquire::Baseline => "baseline",
        }
    }

    pub fn is_active(self) -> bool {
        Acquire::ACTIVE.contains(&self)
    }
}

impl FromStr for Start {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Start::Random),
            "llm" => Ok(Start::Llm),
            _ => Err(format!("unknown start '{s}' (random, llm)")),
        }
    }
}

impl FromStr for Acquire {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [
            Acquire::Exploit,
            Acquire::Explore,
            Acquire::Ucb,
            Acquire::Pi,
            Acquire::Ei,
            Acquire::Random,
            Acquire::Baseline,
        ]
        .into_iter()
        .find(|a| a.as_str().eq_ignore_ascii_case(s))
        .ok_or_else(|| format!("unknown acquisition '{s}'"))
    }
}

/// How to start, how to acquire, and the total label budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Treatment {
    /// `None` for the random-selection and baseline treatments.
    pub start: Option<Start>,
    pub acquire: Acquire,
    pub budget: usize,
}

impl Treatment {
    pub fn active(start: Start, acquire: Acquire, budget: usize) -> Self {
        Treatment {
            start: Some(start),
            acquire,
            budget,
        }
    }

    pub fn random(budget: usize) -> Self {
        Treatment {
            start: None,
            acquire: Acquire::Random,
            budget,
        }
    }

    /// Start and acquisition without the budget, e.g. `llm/exploit`.
    pub fn arm(&self) -> String {
        match self.start {
            Some(s) => format!("{}/{}", s.as_str(), self.acquire.as_str()),
            None => self.acquire.as_str().to_string(),
        }
    }
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.arm(), self.budget)
    }
}

/// Parse `start/acquire` (or a bare `random` / `baseline`).
pub fn parse_arm(s: &str) -> Result<(Option<Start>, Acquire), String> {
    match s.split_once('/') {
        Some((st, acq)) => {
            let acquire: Acquire = acq.parse()?;
            if !acquire.is_active() {
                return Err(format!("'{s}': {} takes no start", acquire.as_str()));
            }
            Ok((Some(st.parse()?), acquire))
        }
        None => {
            let acquire: Acquire = s.parse()?;
            if acquire.is_active() {
                return Err(format!("'{s}' needs a start, e.g. random/{s}"));
            }
            Ok((None, acquire))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// 1-based evaluation count.
    pub eval: usize,
    /// Lowest chebyshev seen so far.
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub dataset: String,
    pub treatment: Treatment,
    pub repeat: usize,
    pub seed: u64,
    pub best_chebyshev: f64,
    pub evaluations_used: usize,
    pub trace: Vec<TracePoint>,
    pub warm_fallback: bool,
    /// Labeled row ids in labeling order.
    pub labeled: Vec<usize>,
    pub transcripts: Vec<Transcript>,
}

/// Summary of the whole file's scores, reported as the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub dataset: String,
    pub rows: usize,
    pub median: f64,
    pub sd: f64,
    pub mean: f64,
    pub lo: f64,
    /// Every row's score, ascending.
    pub scores: Vec<f64>,
}

impl BaselineResult {
    /// Value at quantile `q` in `[0, 1]` (nearest rank).
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.scores.len();
        if n == 0 {
            return f64::NAN;
        }
        let i = ((q * n as f64).floor() as usize).min(n - 1);
        self.scores[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[derive(Default)]
pub struct EngineConfig {
    pub warm: WarmConfig,
    pub explore_form: ExploreForm,
    pub gp: AcquisitionParams,
}


#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("budget {budget} must exceed the warm-start size {b0}")]
    BudgetTooSmall { budget: usize, b0: usize },
    #[error("{0} is not an active-learning acquisition")]
    NotActive(&'static str),
    #[error(transparent)]
    Start(#[from] StartError),
    #[error(transparent)]
    Label(#[from] LabelError),
}

/// Per-run seed. Depends on the dataset and repeat only, so all treatments
/// of one repeat share their random cold start.
pub fn run_seed(base: u64, dataset: &str, repeat: usize) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in dataset.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix(splitmix(base ^ h) ^ (repeat as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn trace_of(labels: &LabelState<'_>) -> Result<Vec<TracePoint>, LabelError> {
    let mut best = f64::INFINITY;
    labels
        .labeled_ids()
        .iter()
        .enumerate()
        .map(|(i, &id)| {
            best = best.min(chebyshev(labels, id)?);
            Ok(TracePoint { eval: i + 1, best })
        })
        .collect()
}

fn finish(
    labels: &LabelState<'_>,
    treatment: Treatment,
    repeat: usize,
    seed: u64,
    warm_fallback: bool,
    transcripts: Vec<Transcript>,
) -> Result<RunResult, EngineError> {
    let trace = trace_of(labels)?;
    Ok(RunResult {
        dataset: labels.dataset().name().to_string(),
        treatment,
        repeat,
        seed,
        best_chebyshev: trace.last().map_or(f64::NAN, |t| t.best),
        evaluations_used: labels.evaluations(),
        trace,
        warm_fallback,
        labeled: labels.labeled_ids().to_vec(),
        transcripts,
    })
}

fn effective_budget(ds: &Dataset, budget: usize) -> usize {
    if budget > ds.len() {
        log::warn!("{}: budget {budget} exceeds {} rows; stopping when the file is exhausted", ds.name(), ds.len());
    }
    budget.min(ds.len())
}

fn next_row<R: Rng>(
    labels: &LabelState<'_>,
    acquire: Acquire,
    cfg: &EngineConfig,
    enc: &Encoding,
    pool: &[usize],
    rng: &mut R,
) -> Option<usize> {
    let ds = labels.dataset();
    let tpe = match acquire {
        Acquire::Exploit => Some(TpeAcquisition::Exploit),
        Acquire::Explore => Some(TpeAcquisition::Explore),
        _ => None,
    };
    let picked = if let Some(acq) = tpe {
        split(labels)
            .map_err(|e| e.to_string())
            .and_then(|s| TwoClassModel::fit(&s, ds).map_err(|e| e.to_string()))
            .and_then(|m| acquire_tpe(&m, ds, pool, acq, cfg.explore_form).map_err(|e| e.to_string()))
    } else {
        let acq = match acquire {
            Acquire::Ucb => GpAcquisition::Ucb,
            Acquire::Pi => GpAcquisition::Pi,
            _ => GpAcquisition::Ei,
        };
        fit_gp(labels, enc)
            .and_then(|(m, inc)| acquire_gp(&m, inc, enc, ds, pool, acq, cfg.gp, rng))
            .map_err(|e| e.to_string())
    };
    match picked {
        Ok(id) => Some(id),
        Err(e) => {
            log::warn!("{}: surrogate failed ({e}); labeling a random row", ds.name());
            (!pool.is_empty()).then(|| pool[rng.gen_range(0..pool.len())])
        }
    }
}

/// Start (cold or warm), then refit the surrogate and label its argmax
/// after every label until the budget is spent.
pub fn run_active(
    ds: &Dataset,
    treatment: Treatment,
    cfg: &EngineConfig,
    synth: &dyn Synthesizer,
    repeat: usize,
    seed: u64,
) -> Result<RunResult, EngineError> {
    if !treatment.acquire.is_active() {
        return Err(EngineError::NotActive(treatment.acquire.as_str()));
    }
    let b0 = cfg.warm.b0;
    if treatment.budget <= b0 {
        return Err(EngineError::BudgetTooSmall {
            budget: treatment.budget,
            b0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = LabelState::new(ds, effective_budget(ds, treatment.budget));
    let (fallback, transcripts) = match treatment.start.unwrap_or(Start::Random) {
        Start::Random => {
            cold_start(&mut labels, b0, &mut rng)?;
            (false, Vec::new())
        }
        Start::Llm => {
            let out = warm_start(&mut labels, cfg.warm, synth, &mut rng)?;
            (out.fallback, out.transcripts)
        }
    };
    let enc = Encoding::new(ds);
    while labels.remaining() > 0 {
        let pool = labels.unlabeled_ids();
        let Some(id) = next_row(&labels, treatment.acquire, cfg, &enc, &pool, &mut rng) else {
            break;
        };
        labels.label(id)?;
    }
    finish(&labels, treatment, repeat, seed, fallback, transcripts)
}

/// Label `budget` rows chosen uniformly and keep the best.
pub fn run_random(ds: &Dataset, budget: usize, repeat: usize, seed: u64) -> Result<RunResult, EngineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = effective_budget(ds, budget);
    let mut labels = LabelState::new(ds, budget);
    for i in index::sample(&mut rng, ds.len(), budget) {
        labels.label(i)?;
    }
    finish(&labels, Treatment::random(budget), repeat, seed, false, Vec::new())
}

/// Every row's score, summarized.
pub fn run_baseline(ds: &Dataset) -> BaselineResult {
    let mut scores = all_scores(ds);
    scores.sort_by(f64::total_cmp);
    let n = scores.len();
    let mean = scores.iter().sum::<f64>() / n.max(1) as f64;
    let sd = if n > 1 {
        (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    BaselineResult {
        dataset: ds.name().to_string(),
        rows: n,
        median: median_sorted(&scores),
        sd,
        mean,
        lo: scores.first().copied().unwrap_or(f64::NAN),
        scores,
    }
}

/// Dispatch on the treatment's acquisition. Baseline is not a run; use
/// [`run_baseline`].
pub fn run_treatment(
    ds: &Dataset,
    treatment: Treatment,
    cfg: &EngineConfig,
    synth: &dyn Synthesizer,
    repeat: usize,
    seed: u64,
) -> Result<RunResult, EngineError> {
    match treatment.acquire {
        Acquire::Random => run_random(ds, treatment.budget, repeat, seed),
        Acquire::Baseline => Err(EngineError::NotActive("baseline")),
        _ => run_active(ds, treatment, cfg, synth, repeat, seed),
    }
}

/// `(mean best - file minimum) / (file mean - file minimum)`: 0 means the
/// optimum was always found, 1 means no better than an average row. `None`
/// when the file has no spread or there are no results.
pub fn normalized_improvement(bests: &[f64], baseline: &BaselineResult) -> Option<f64> {
    improvement_ratio(bests, baseline.mean, baseline.lo)
}

/// [`normalized_improvement`] from the file's mean and minimum score.
pub fn improvement_ratio(bests: &[f64], file_mean: f64, file_lo: f64) -> Option<f64> {
    let span = file_mean - file_lo;
    if bests.is_empty() || span.is_nan() || span <= 0.0 {
        return None;
    }
    let mu = bests.iter().sum::<f64>() / bests.len() as f64;
    Some((mu - file_lo) / span)
}
