//! Initial label sets: uniform cold starts, or few-shot synthesis of better
//! and poorer examples mapped back to real rows.

pub mod mock;
pub mod parse;
pub mod prompt;
pub mod remote;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Cell, Dataset, LabelError, LabelState};
use crate::objective::{split, BestRestSplit};

pub use mock::{mock_synthesize, MockSynthesizer};
pub use parse::parse_response;
pub use prompt::{build_prompt, render_synthetic, PromptBundle};
pub use remote::{RemoteConfig, RemoteSynthesizer};

/// Synthetic rows kept per claim.
pub const PER_CLAIM: usize = 2;
/// Extra attempts after a failed synthesis before falling back.
pub const DEFAULT_RETRIES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Claim {
    Better,
    Poorer,
}

/// Invented independent values, with no goals.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRow {
    pub x: Vec<Cell>,
    pub claim: Claim,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthesisError {
    #[error("could not parse response: {0}")]
    Parse(String),
    #[error("remote call failed: {0}")]
    Remote(String),
    #[error("environment variable {0} with the API key is not set")]
    MissingKey(String),
}

/// One request/response pair, kept verbatim for the transcript log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub request: String,
    pub response: String,
    /// The completion text inside `response`.
    pub text: String,
}

pub trait Synthesizer: Send + Sync {
    fn name(&self) -> &str;

    fn complete(&self, prompt: &PromptBundle, split: &BestRestSplit, ds: &Dataset) -> Result<Exchange, SynthesisError>;
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StartError {
    #[error("cannot draw {want} rows from {have}")]
    TooFewRows { want: usize, have: usize },
    #[error(transparent)]
    Label(#[from] LabelError),
}

/// Label `b0` distinct unlabeled rows chosen uniformly.
pub fn cold_start<R: Rng + ?Sized>(labels: &mut LabelState<'_>, b0: usize, rng: &mut R) -> Result<Vec<usize>, StartError> {
    let pool = labels.unlabeled_ids();
    if b0 > pool.len() {
        return Err(StartError::TooFewRows { want: b0, have: pool.len() });
    }
    let picked: Vec<usize> = index::sample(rng, pool.len(), b0).into_iter().map(|i| pool[i]).collect();
    for &id in &picked {
        labels.label(id)?;
    }
    Ok(picked)
}

/// Where synthetic rows are mapped to real ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mapping {
    /// Nearest unlabeled row; mapped rows are then labeled.
    #[default]
    Pool,
    /// Nearest already-labeled row, so no new labels are spent.
    Literal,
}

/// Nearest candidate (by `x_distance`) for each synthetic row, in order,
/// without duplicates. Distance ties go to the lowest id.
pub fn map_to_pool(e1: &[SyntheticRow], candidates: &[usize], ds: &Dataset) -> Vec<usize> {
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    let mut out: Vec<usize> = Vec::new();
    for row in e1 {
        let mut best: Option<(f64, usize)> = None;
        for &id in &sorted {
            let d = ds.x_distance(&row.x, &ds.row(id).x);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, id));
            }
        }
        if let Some((_, id)) = best {
            if !out.contains(&id) {
                out.push(id);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WarmConfig {
    pub b0: usize,
    pub mapping: Mapping,
    pub retries: usize,
}

impl Default for WarmConfig {
    fn default() -> Self {
        WarmConfig {
            b0: 4,
            mapping: Mapping::Pool,
            retries: DEFAULT_RETRIES,
        }
    }
}

/// One synthesis attempt, for the audit log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub attempt: usize,
    pub synthesizer: String,
    pub exchange: Option<Exchange>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarmOutcome {
    /// Rows labeled by the cold start.
    pub cold: Vec<usize>,
    /// Rows labeled because synthetic rows mapped to them.
    pub mapped: Vec<usize>,
    /// Synthesis never produced usable rows; only the cold start stands.
    pub fallback: bool,
    pub transcripts: Vec<Transcript>,
}

impl WarmOutcome {
    pub fn labeled(&self) -> Vec<usize> {
        self.cold.iter().chain(&self.mapped).copied().collect()
    }
}

/// Cold start, split, prompt, synthesize, parse, map, label. Synthesis or
/// parse failures are retried `retries` times and then end in a fallback to
/// the cold start; they never abort the run. Mapped rows are truncated so
/// the label budget is never exceeded.
pub fn warm_start<R: Rng + ?Sized>(
    labels: &mut LabelState<'_>,
    config: WarmConfig,
    synth: &dyn Synthesizer,
    rng: &mut R,
) -> Result<WarmOutcome, StartError> {
    let ds = labels.dataset();
    let cold = cold_start(labels, config.b0, rng)?;
    let mut outcome = WarmOutcome {
        cold,
        mapped: Vec::new(),
        fallback: true,
        transcripts: Vec::new(),
    };
    let Ok(e0) = split(labels) else {
        log::warn!("{}: warm start needs at least 2 labels; using the cold start", ds.name());
        return Ok(outcome);
    };
    let prompt = build_prompt(&e0, ds);
    let mut e1 = None;
    for attempt in 0..=config.retries {
        let mut t = Transcript {
            attempt,
            synthesizer: synth.name().to_string(),
            exchange: None,
            error: None,
        };
        let result = synth.complete(&prompt, &e0, ds).and_then(|ex| {
            let rows = parse_response(&ex.text, ds);
            t.exchange = Some(ex);
            rows
        });
        match result {
            Ok(rows) => {
                outcome.transcripts.push(t);
                e1 = Some(rows);
                break;
            }
            Err(e) => {
                log::warn!("{}: synthesis attempt {} failed: {e}", ds.name(), attempt + 1);
                t.error = Some(e.to_string());
                outcome.transcripts.push(t);
            }
        }
    }
    let Some(e1) = e1 else {
        log::warn!("{}: falling back to the cold start", ds.name());
        return Ok(outcome);
    };
    outcome.fallback = false;
    if config.mapping == Mapping::Literal {
        return Ok(outcome);
    }
    let pool = labels.unlabeled_ids();
    let mut mapped = map_to_pool(&e1, &pool, ds);
    mapped.truncate(labels.remaining());
    for &id in &mapped {
        labels.label(id)?;
    }
    outcome.mapped = mapped;
    Ok(outcome)
}
