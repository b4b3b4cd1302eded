//! Frugal multi-objective optimization on tabular data: label a handful of
//! rows with a surrogate-driven loop, optionally warm-started by a language
//! model, then rank treatments statistically.

pub mod dataset;
pub mod engine;
pub mod gp;
pub mod likelihood;
pub mod objective;
pub mod report;
pub mod runner;
pub mod stats;
pub mod warmstart;

pub use dataset::{Cell, Dataset, DatasetError, Dims, LabelError, LabelState};
pub use engine::{
    normalized_improvement, run_active, run_baseline, run_random, run_seed, run_treatment, Acquire, BaselineResult,
    EngineConfig, RunResult, Start, Treatment,
};
pub use gp::{GpAcquisition, GpModel};
pub use likelihood::TwoClassModel;
pub use objective::{chebyshev, chebyshev_of, BestRestSplit};
pub use runner::{run_grid, GridConfig, GridOutput};
pub use stats::{scott_knott, RankTable, Sample, SkConfig};
pub use warmstart::{MockSynthesizer, RemoteConfig, RemoteSynthesizer, Synthesizer};
