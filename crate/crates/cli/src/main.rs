use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use frugal::engine::parse_arm;
use frugal::likelihood::ExploreForm;
use frugal::report::{load_report, write_report};
use frugal::runner::{run_grid, write_outputs, Arm, GridConfig, Manifest, DEFAULT_BUDGETS, DEFAULT_REPEATS, MANIFEST_FILE};
use frugal::stats::SkConfig;
use frugal::warmstart::{Mapping, MockSynthesizer, RemoteConfig, RemoteSynthesizer, Synthesizer};
use frugal::Dataset;

const TOY_CSV: &str = include_str!("../../../data/toy.csv");

#[derive(Parser)]
#[command(name = "frugal", version, about = "Label-frugal multi-objective optimization experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a dataset x treatment x budget x repeat grid.
    Run(RunArgs),
    /// Rank the results of a run directory.
    Rank(RankArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Synth {
    Mock,
    Remote,
}

#[derive(Args)]
struct StatArgs {
    /// Cliff's delta below which a difference is negligible.
    #[arg(long)]
    delta_small: Option<f64>,
    /// Bootstrap resamples.
    #[arg(long)]
    boots: Option<usize>,
    /// Bootstrap confidence.
    #[arg(long)]
    conf: Option<f64>,
}

impl StatArgs {
    fn apply(&self, mut sk: SkConfig) -> SkConfig {
        if let Some(d) = self.delta_small {
            sk.delta_small = d;
        }
        if let Some(b) = self.boots {
            sk.n_boot = b;
        }
        if let Some(c) = self.conf {
            sk.conf = c;
        }
        sk
    }
}

#[derive(Args)]
struct RunArgs {
    /// CSV files or directories of CSV files. Defaults to the bundled toy file.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    data: Vec<PathBuf>,
    /// Arms such as llm/exploit, random/ucb, random, baseline.
    #[arg(long, value_delimiter = ',')]
    treatments: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    budgets: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    repeats: usize,
    /// Labels spent on the initial sample.
    #[arg(long, default_value_t = 4)]
    warm_size: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Synth::Mock)]
    synth: Synth,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long)]
    key_env: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Map synthetic rows to the already-labeled rows instead of the pool.
    #[arg(long)]
    literal_mapping: bool,
    /// Use (B - R)/|B + R| instead of |B + R|/|B - R| for explore.
    #[arg(long)]
    signed_explore: bool,
    #[command(flatten)]
    stats: StatArgs,
}

#[derive(Args)]
struct RankArgs {
    /// Directory written by `run`.
    results: PathBuf,
    /// Where to write the report (default: <results>/report).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    stats: StatArgs,
}

/// Problems with flags or inputs; exit status 2.
#[derive(Debug)]
struct ConfigError(anyhow::Error);

fn config_err<T>(r: Result<T>) -> Result<T, ConfigError> {
    r.map_err(ConfigError)
}

struct Tee(Mutex<File>);

impl Write for &Tee {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let _ = std::io::stderr().write_all(buf);
        self.0.lock().unwrap_or_else(|e| e.into_inner()).write_all(buf)?;
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.0.lock().unwrap_or_else(|e| e.into_inner()).flush()
    }
}

fn init_logging(log_file: Option<&Path>) {
    let mut b = env_logger::Builder::new();
    b.filter_level(log::LevelFilter::Info).parse_default_env();
    if let Some(path) = log_file {
        if let Ok(f) = File::create(path) {
            let tee: &'static Tee = Box::leak(Box::new(Tee(Mutex::new(f))));
            b.target(env_logger::Target::Pipe(Box::new(tee)));
        }
    }
    let _ = b.try_init();
}

fn csv_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .with_context(|| format!("cannot read directory {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        Ok(files)
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

fn load_data(paths: &[PathBuf]) -> Result<Vec<(Dataset, Option<PathBuf>)>> {
    if paths.is_empty() {
        let ds = Dataset::from_reader("toy", TOY_CSV.as_bytes()).context("bundled toy data")?;
        return Ok(vec![(ds, None)]);
    }
    let mut out = Vec::new();
    for p in paths {
        for f in csv_files(p)? {
            let ds = Dataset::load_csv(&f).with_context(|| format!("cannot load data file {}", f.display()))?;
            out.push((ds, Some(f)));
        }
    }
    if out.is_empty() {
        bail!("no CSV files found in {:?}", paths);
    }
    Ok(out)
}

fn grid_config(a: &RunArgs) -> Result<GridConfig> {
    let mut cfg = GridConfig {
        repeats: a.repeats,
        seed: a.seed,
        jobs: a.jobs,
        ..GridConfig::default()
    };
    if !a.treatments.is_empty() {
        cfg.arms = a
            .treatments
            .iter()
            .map(|t| parse_arm(t.trim()).map(|(start, acquire)| Arm { start, acquire }))
            .collect::<Result<_, String>>()
            .map_err(anyhow::Error::msg)?;
    }
    cfg.budgets = if a.budgets.is_empty() { DEFAULT_BUDGETS.to_vec() } else { a.budgets.clone() };
    cfg.engine.warm.b0 = a.warm_size;
    if a.literal_mapping {
        cfg.engine.warm.mapping = Mapping::Literal;
    }
    if a.signed_explore {
        cfg.engine.explore_form = ExploreForm::Signed;
    }
    cfg.engine.gp.kappa = a.kappa;
    cfg.engine.gp.epsilon = a.epsilon;
    cfg.validate()?;
    Ok(cfg)
}

fn synthesizer(a: &RunArgs) -> Result<Box<dyn Synthesizer>> {
    Ok(match a.synth {
        Synth::Mock => Box::new(MockSynthesizer),
        Synth::Remote => {
            let d = RemoteConfig::default();
            let cfg = RemoteConfig {
                endpoint: a.endpoint.clone().unwrap_or(d.endpoint),
                model: a.model.clone().unwrap_or(d.model),
                key_env: a.key_env.clone().unwrap_or(d.key_env),
                ..d
            };
            Box::new(RemoteSynthesizer::new(cfg)?)
        }
    })
}

#[derive(serde::Serialize)]
struct RunManifest<'a> {
    #[serde(flatten)]
    grid: &'a Manifest,
    stats: SkConfig,
}

/// Returns the number of failed runs.
fn cmd_run(a: &RunArgs) -> Result<usize, ConfigError> {
    let cfg = config_err(grid_config(a))?;
    let synth = config_err(synthesizer(a))?;
    let data = config_err(load_data(&a.data))?;
    config_err(std::fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display())))?;
    init_logging(Some(&a.out.join("run.log")));
    log::info!(
        "{} datasets, {} treatments, {} repeats, synthesizer {}",
        data.len(),
        cfg.treatments().len() + usize::from(cfg.has_baseline()),
        cfg.repeats,
        synth.name()
    );
    let datasets: Vec<Dataset> = data.iter().map(|(d, _)| d.clone()).collect();
    let out = run_grid(&datasets, &cfg, synth.as_ref());
    let manifest = Manifest::new(&cfg, &data, synth.name());
    config_err(write_outputs(&a.out, &out, &manifest).context("writing results"))?;
    let full = RunManifest {
        grid: &manifest,
        stats: a.stats.apply(SkConfig::default()),
    };
    let text = serde_json::to_string_pretty(&full).map_err(|e| ConfigError(e.into()))? + "\n";
    config_err(std::fs::write(a.out.join(MANIFEST_FILE), text).context("writing manifest"))?;
    let fallbacks = out.runs.iter().filter(|r| r.warm_fallback).count();
    log::info!(
        "wrote {} results ({} failed runs, {} warm-start fallbacks) to {}",
        out.results.len(),
        out.failures.len(),
        fallbacks,
        a.out.display()
    );
    Ok(out.failures.len())
}

fn cmd_rank(a: &RankArgs) -> Result<(), ConfigError> {
    init_logging(None);
    let mut sk = SkConfig::default();
    if let Ok(text) = std::fs::read_to_string(a.results.join(MANIFEST_FILE)) {
        if let Some(saved) = serde_json::from_str::<serde_json::Value>(&text)
            .ok()
            .and_then(|v| serde_json::from_value::<SkConfig>(v["stats"].clone()).ok())
        {
            sk = saved;
        }
    }
    let sk = a.stats.apply(sk);
    let report = config_err(load_report(&a.results, &sk).map_err(anyhow::Error::from))?;
    let out = a.out.clone().unwrap_or_else(|| a.results.join("report"));
    config_err(write_report(&out, &report).with_context(|| format!("writing {}", out.display())))?;
    log::info!("ranked {} datasets into {}", report.tables.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run(a) => cmd_run(a).map(|failed| failed > 0),
        Cmd::Rank(a) => cmd_rank(a).map(|_| false),
    };
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(ConfigError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
