//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs on the bundled tables in `data/`. Point `FRUGAL_MOOT_DIR` at a
//! checkout of the optimization-table repository to run on the real files
//! instead (searched recursively for `*.csv`; `SS-A.csv` is used for the
//! SS-A criterion).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use frugal::dataset::Direction;
use frugal::engine::{run_treatment, Acquire, EngineConfig, Start, Treatment};
use frugal::gp::{ei, pi, ucb, GpModel};
use frugal::report::build_report;
use frugal::runner::{default_arms, run_grid, write_outputs, Arm, GridConfig, Manifest, DEFAULT_BUDGETS};
use frugal::stats::{cliffs_delta, scott_knott, sk_split, Sample, SkConfig};
use frugal::{chebyshev_of, Dataset, MockSynthesizer};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn moot_dir() -> Option<PathBuf> {
    std::env::var_os("FRUGAL_MOOT_DIR").map(PathBuf::from)
}

fn csvs_under(dir: &Path, out: &mut Vec<PathBuf>) {
    let Ok(entries) = std::fs::read_dir(dir) else { return };
    let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for p in paths {
        if p.is_dir() {
            csvs_under(&p, out);
        } else if p.extension().is_some_and(|x| x == "csv") {
            out.push(p);
        }
    }
}

/// Optimization tables: the real ones if configured, else the bundled
/// stand-ins (everything but the toy file).
fn tables() -> Vec<Dataset> {
    let mut paths = Vec::new();
    match moot_dir() {
        Some(d) => csvs_under(&d, &mut paths),
        None => {
            csvs_under(&data_dir(), &mut paths);
            paths.retain(|p| p.file_stem().is_some_and(|s| s != "toy"));
        }
    }
    paths.iter().filter_map(|p| Dataset::load_csv(p).ok()).collect()
}

fn ssa() -> Dataset {
    let path = match moot_dir() {
        Some(d) => {
            let mut all = Vec::new();
            csvs_under(&d, &mut all);
            all.into_iter()
                .find(|p| p.file_name().is_some_and(|n| n == "SS-A.csv"))
                .expect("FRUGAL_MOOT_DIR has no SS-A.csv")
        }
        None => data_dir().join("ssa_like.csv"),
    };
    Dataset::load_csv(&path).expect("SS-A table")
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

fn within(elapsed: Duration, limit_secs: f64) -> bool {
    elapsed.as_secs_f64() < limit_secs
}

// 1 ----------------------------------------------------------------------

fn brute_chebyshev(ds: &Dataset, id: usize) -> f64 {
    let mut worst = f64::MIN;
    for g in 0..ds.y_cols().len() {
        let col: Vec<f64> = ds.rows().iter().map(|r| r.y[g]).filter(|v| !v.is_nan()).collect();
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let v = ds.row(id).y[g];
        let gap = if v.is_nan() {
            1.0
        } else {
            let n = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
            if ds.y_spec(g).direction == Direction::Maximize {
                1.0 - n
            } else {
                n
            }
        };
        if gap > worst {
            worst = gap;
        }
    }
    worst
}

fn chebyshev_oracle() -> Outcome {
    let all = tables();
    let Some(ds) = all.first() else {
        return outcome(false, "no tables found");
    };
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let id = rng.gen_range(0..ds.len());
        let a = chebyshev_of(ds, &ds.row(id).y);
        worst = worst.max((a - brute_chebyshev(ds, id)).abs());
    }
    let el = t.elapsed();
    outcome(
        worst <= 1e-12 && within(el, 1.0),
        format!("{}: max |diff| {worst:.1e} over 200 rows, {el:.2?}", ds.name()),
    )
}

// 2 ----------------------------------------------------------------------

fn brute_cliffs(a: &[f64], b: &[f64]) -> f64 {
    let mut more = 0i64;
    let mut less = 0i64;
    for x in a {
        for y in b {
            if x > y {
                more += 1;
            } else if x < y {
                less += 1;
            }
        }
    }
    (more - less) as f64 / (a.len() * b.len()) as f64
}

fn brute_split(samples: &[Sample]) -> Option<usize> {
    let all: Vec<f64> = samples.iter().flat_map(|s| s.values.iter().copied()).collect();
    let n = all.len() as f64;
    let mu = all.iter().sum::<f64>() / n;
    let mut best: Option<(f64, usize)> = None;
    for cut in 1..samples.len() {
        let l: Vec<f64> = samples[..cut].iter().flat_map(|s| s.values.iter().copied()).collect();
        let r: Vec<f64> = samples[cut..].iter().flat_map(|s| s.values.iter().copied()).collect();
        let m1 = l.iter().sum::<f64>() / l.len() as f64;
        let m2 = r.iter().sum::<f64>() / r.len() as f64;
        let gain = l.len() as f64 / n * (m1 - mu).powi(2) + r.len() as f64 / n * (m2 - mu).powi(2);
        if best.is_none_or(|(g, _)| gain > g) {
            best = Some((gain, cut));
        }
    }
    best.filter(|&(g, _)| g > 1e-24).map(|(_, c)| c)
}

fn small_list(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.gen_range(1..=12);
    let shift = rng.gen_range(0..6) as f64;
    (0..n).map(|_| shift + rng.gen_range(0..8) as f64).collect()
}

fn cliffs_and_split_oracles() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = 0;
    for _ in 0..100 {
        let (a, b) = (small_list(&mut rng), small_list(&mut rng));
        if cliffs_delta(&a, &b) != brute_cliffs(&a, &b) {
            bad += 1;
        }
        let k = rng.gen_range(2..=6);
        let mut samples: Vec<Sample> = (0..k).map(|i| Sample::new(format!("s{i}"), small_list(&mut rng))).collect();
        samples.sort_by(|x, y| x.median().total_cmp(&y.median()));
        if sk_split(&samples) != brute_split(&samples) {
            bad += 1;
        }
    }
    let el = t.elapsed();
    outcome(bad == 0 && within(el, 5.0), format!("{bad} disagreements in 100 instances, {el:.2?}"))
}

// 3 ----------------------------------------------------------------------

fn gp_sanity() -> Outcome {
    let t = Instant::now();
    let truth = |x: f64| (2.0 * std::f64::consts::PI * x).sin();
    let xs: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| truth(x)).collect();
    let m = match GpModel::fit(xs.iter().map(|&x| vec![x]).collect(), &ys) {
        Ok(m) => m,
        Err(e) => return outcome(false, format!("fit failed: {e}")),
    };
    let mut max_err: f64 = 0.0;
    for i in 0..100 {
        let x = (i as f64 + 0.5) / 100.0;
        max_err = max_err.max((m.predict(&[x]).0 - truth(x)).abs());
    }
    let max_sd = xs.iter().map(|&x| m.predict(&[x]).1).fold(0.0, f64::max);
    let ei_zero = [-1.0, 0.0, 0.3, 2.0].iter().all(|&mu| ei(mu, 0.0, 0.1, 0.01) == 0.0);
    let el = t.elapsed();
    outcome(
        max_err <= 0.05 && max_sd <= 1e-3 && ei_zero && within(el, 5.0),
        format!("max |mean - truth| {max_err:.2e}, max sd at data {max_sd:.1e}, EI(sigma=0) = 0: {ei_zero}, {el:.2?}"),
    )
}

// 4 ----------------------------------------------------------------------

fn acquisition_analytics() -> Outcome {
    let (f_star, eps) = (0.3, 0.01);
    let p = pi(f_star + eps, 0.2, f_star, eps);
    let e = ei(f_star + eps, 1.0, f_star, eps);
    let u = ucb(0.5, 0.1, 2.0);
    outcome(
        (p - 0.5).abs() <= 1e-9 && (e - 0.39894).abs() <= 1e-5 && u == 0.7,
        format!("PI {p}, EI {e:.6}, UCB {u}"),
    )
}

// 5 ----------------------------------------------------------------------

fn medians_by_arm(ds: &Dataset, arms: &[Arm], budget: usize) -> Vec<f64> {
    let cfg = GridConfig {
        arms: arms.to_vec(),
        budgets: vec![budget],
        repeats: 20,
        seed: 1,
        ..GridConfig::default()
    };
    let out = run_grid(std::slice::from_ref(ds), &cfg, &MockSynthesizer);
    arms.iter()
        .map(|a| {
            let v: Vec<f64> = out.results.iter().filter(|r| r.arm() == a.name()).map(|r| r.best).collect();
            median(&v)
        })
        .collect()
}

fn tpe_beats_random() -> Outcome {
    let t = Instant::now();
    let ds = ssa();
    let arms = [
        Arm { start: Some(Start::Random), acquire: Acquire::Exploit },
        Arm { start: None, acquire: Acquire::Random },
    ];
    let m = medians_by_arm(&ds, &arms, 20);
    let base = 0.18;
    let el = t.elapsed();
    outcome(
        m[0] < m[1] && m[0] < base && m[1] < base && within(el, 120.0),
        format!("{}: random/exploit {:.4} vs random {:.4} (baseline {base}), {el:.2?}", ds.name(), m[0], m[1]),
    )
}

// 6 ----------------------------------------------------------------------

fn budget_honesty() -> Outcome {
    let mut all = tables();
    all.push(Dataset::load_csv(data_dir().join("toy.csv")).expect("toy table"));
    all.sort_by_key(Dataset::len);
    let small = &all[..2];
    let cfg = EngineConfig::default();
    let mut runs = 0;
    let mut violations = Vec::new();
    for ds in small {
        for arm in default_arms().into_iter().filter(|a| a.acquire != Acquire::Baseline) {
            for budget in DEFAULT_BUDGETS {
                for repeat in 0..20 {
                    let t = Treatment { start: arm.start, acquire: arm.acquire, budget };
                    let seed = frugal::run_seed(1, ds.name(), repeat);
                    let r = match run_treatment(ds, t, &cfg, &MockSynthesizer, repeat, seed) {
                        Ok(r) => r,
                        Err(e) => {
                            violations.push(format!("{t}: {e}"));
                            continue;
                        }
                    };
                    runs += 1;
                    let distinct: BTreeSet<usize> = r.labeled.iter().copied().collect();
                    if r.labeled.len() > budget || r.evaluations_used > budget || distinct.len() != r.labeled.len() {
                        violations.push(format!("{} {t} repeat {repeat}: {} labels", ds.name(), r.labeled.len()));
                    }
                }
            }
        }
    }
    let names: Vec<&str> = small.iter().map(Dataset::name).collect();
    outcome(
        violations.is_empty(),
        format!("{} runs on {names:?}, {} over budget", runs, violations.len()),
    )
}

// 7 ----------------------------------------------------------------------

fn warm_start_determinism() -> Outcome {
    let t = Instant::now();
    let ds = Dataset::load_csv(data_dir().join("toy.csv")).expect("toy table");
    let cfg = GridConfig {
        arms: vec![
            Arm { start: Some(Start::Llm), acquire: Acquire::Exploit },
            Arm { start: Some(Start::Llm), acquire: Acquire::Ucb },
        ],
        budgets: vec![10, 20],
        repeats: 5,
        seed: 7,
        ..GridConfig::default()
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = run_grid(std::slice::from_ref(&ds), &cfg, &MockSynthesizer);
        let manifest = Manifest::new(&cfg, &[(ds.clone(), None)], "mock");
        write_outputs(d.path(), &out, &manifest).unwrap();
    }
    let mut differing = Vec::new();
    for f in ["results.jsonl", "transcripts.jsonl", "traces.jsonl", "datasets.jsonl", "manifest.json"] {
        let a = std::fs::read(dirs[0].path().join(f)).unwrap();
        let b = std::fs::read(dirs[1].path().join(f)).unwrap();
        if a != b {
            differing.push(f);
        }
    }
    let el = t.elapsed();
    outcome(
        differing.is_empty() && within(el, 30.0),
        format!("differing files: {differing:?}, {el:.2?}"),
    )
}

// 8 ----------------------------------------------------------------------

/// 1000 rows, four uniform columns; both goals grow with the distance to an
/// interior point, so the best rows of any sample surround the optimum and
/// the best-half mean lies toward it.
fn bowl() -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let centre = [0.6, 0.4, 0.55, 0.45];
    let mut text = String::from("A,B,C,D,Cost-,Loss-\n");
    for _ in 0..1000 {
        let x: Vec<f64> = (0..4).map(|_| rng.gen::<f64>()).collect();
        let d = x.iter().zip(centre).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
        let noise = |r: &mut ChaCha8Rng| (r.gen::<f64>() - 0.5) * 0.02;
        let cost = d + noise(&mut rng);
        let loss = d * d + 0.5 * d + noise(&mut rng);
        text.push_str(&format!("{:.4},{:.4},{:.4},{:.4},{cost:.4},{loss:.4}\n", x[0], x[1], x[2], x[3]));
    }
    Dataset::from_reader("bowl", text.as_bytes()).unwrap()
}

fn warm_start_benefit() -> Outcome {
    let ds = bowl();
    let arms = [
        Arm { start: Some(Start::Llm), acquire: Acquire::Exploit },
        Arm { start: Some(Start::Random), acquire: Acquire::Exploit },
    ];
    let m = medians_by_arm(&ds, &arms, 15);
    outcome(m[0] < m[1], format!("llm/exploit {:.4} vs random/exploit {:.4}", m[0], m[1]))
}

// 9 ----------------------------------------------------------------------

fn thirty_is_enough() -> Outcome {
    let t = Instant::now();
    let data = tables();
    if data.len() < 5 {
        return outcome(false, format!("only {} tables", data.len()));
    }
    let arm = Arm { start: Some(Start::Llm), acquire: Acquire::Exploit };
    let cfg = GridConfig {
        arms: vec![arm],
        budgets: vec![10, 15, 25, 30],
        repeats: 20,
        seed: 1,
        ..GridConfig::default()
    };
    let out = run_grid(&data, &cfg, &MockSynthesizer);
    let report = build_report(&out.results, &out.datasets, &SkConfig::default());
    let curve: std::collections::BTreeMap<usize, f64> = report.curve(&arm.name()).into_iter().collect();
    let (Some(&a10), Some(&a15), Some(&a25), Some(&a30)) = (curve.get(&10), curve.get(&15), curve.get(&25), curve.get(&30))
    else {
        return outcome(false, "incomplete improvement curve");
    };
    let early = a10 - a15;
    let late = a25 - a30;
    let el = t.elapsed();
    outcome(
        early > 0.0 && late <= 0.2 * early && within(el, 600.0),
        format!(
            "{} tables, {}: 10->15 drop {early:.4}, 25->30 drop {late:.4} ({:.0}% of early), {el:.2?}",
            data.len(),
            arm.name(),
            100.0 * late / early
        ),
    )
}

// 10 ---------------------------------------------------------------------

fn scott_knott_intervals() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cfg = SkConfig { n_boot: 128, ..SkConfig::default() };
    let mut violations = 0;
    for _ in 0..500 {
        let k = rng.gen_range(1..=8);
        let mut samples: Vec<Sample> = (0..k)
            .map(|i| {
                let n = rng.gen_range(3..=15);
                let loc = rng.gen_range(0..4) as f64;
                Sample::new(format!("t{i}"), (0..n).map(|_| loc + rng.gen::<f64>()).collect())
            })
            .collect();
        samples.shuffle(&mut rng);
        let table = scott_knott(samples.clone(), &cfg);
        let members: usize = table.groups.iter().map(|g| g.members.len()).sum();
        let ordered = table.groups.windows(2).all(|w| {
            let hi = w[0].members.iter().map(|m| m.median).fold(f64::MIN, f64::max);
            let lo = w[1].members.iter().map(|m| m.median).fold(f64::MAX, f64::min);
            hi <= lo && w[0].rank < w[1].rank
        });
        if members != samples.len() || !ordered {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("{violations} violations in 500 inputs"))
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored
    let criteria: [Criterion; 10] = [
        ("chebyshev oracle", chebyshev_oracle),
        ("cliff's delta / split oracles", cliffs_and_split_oracles),
        ("gp sanity", gp_sanity),
        ("acquisition analytics", acquisition_analytics),
        ("exploit beats random selection on SS-A", tpe_beats_random),
        ("budget honesty", budget_honesty),
        ("warm-start determinism", warm_start_determinism),
        ("warm-start benefit on constructed data", warm_start_benefit),
        ("30 is enough", thirty_is_enough),
        ("scott-knott non-overlap", scott_knott_intervals),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
