use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mean;

/// Relative slack when comparing resampled statistics to the observed one,
/// so that rounding cannot flip a tie.
const TIE: f64 = 1e-12;

/// Two-sample bootstrap test on the absolute difference of means. Both
/// samples are shifted to the pooled mean (the null hypothesis), resampled
/// with replacement `n_boot` times, and the observed difference is
/// significant when at most `1 - conf` of the resampled differences reach
/// it. Returns `true` when the samples are indistinguishable.
pub fn bootstrap_same(a: &[f64], b: &[f64], n_boot: usize, conf: f64, seed: u64) -> bool {
    if a.is_empty() || b.is_empty() || n_boot == 0 {
        return true;
    }
    let (ma, mb) = (mean(a), mean(b));
    let observed = (ma - mb).abs();
    let pooled = (ma * a.len() as f64 + mb * b.len() as f64) / (a.len() + b.len()) as f64;
    let a0: Vec<f64> = a.iter().map(|v| v - ma + pooled).collect();
    let b0: Vec<f64> = b.iter().map(|v| v - mb + pooled).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |xs: &[f64]| -> f64 {
        (0..xs.len()).map(|_| xs[rng.gen_range(0..xs.len())]).sum::<f64>() / xs.len() as f64
    };
    let slack = TIE * observed.abs().max(pooled.abs()).max(1.0);
    let mut hits = 0usize;
    for _ in 0..n_boot {
        let d = (draw(&a0) - draw(&b0)).abs();
        if d + slack >= observed {
            hits += 1;
        }
    }
    hits as f64 / n_boot as f64 > 1.0 - conf
}
