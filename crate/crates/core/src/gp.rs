//! Gaussian-process surrogate with UCB, PI and EI acquisitions.
//!
//! The GP models `g = 1 - chebyshev`, so larger is better and the
//! acquisitions are maximized as written. Kernel: RBF with a length scale
//! picked from a small grid by log marginal likelihood; the signal variance
//! is the (population) variance of the targets and the prior mean is their
//! average. Inputs are rows encoded as normalized numerics plus one-hot
//! blocks for symbolic columns.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::dataset::{Cell, ColumnStats, Dataset, Kind, LabelError, LabelState};
use crate::likelihood::argmax_lowest_id;
use crate::objective::chebyshev;

/// Length scales tried when fitting.
pub const LENGTH_SCALES: [f64; 4] = [0.1, 0.3, 1.0, 3.0];
/// Diagonal jitter for the kernel matrix, relative to the signal variance
/// (that is, in units of standardized targets).
pub const NOISE: f64 = 1e-6;
/// Jitter is escalated by 10x up to this value before a fit gives up.
pub const MAX_JITTER: f64 = 1e-2;
/// At most this many pool rows are scored per acquisition.
pub const CANDIDATE_CAP: usize = 4096;
const MIN_SIGNAL_VAR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GpError {
    #[error("need at least 2 training points, got {0}")]
    TooFew(usize),
    #[error("kernel matrix is not positive definite even with jitter {0}")]
    NotPositiveDefinite(f64),
    #[error("cannot acquire from an empty pool")]
    EmptyPool,
    #[error(transparent)]
    Label(#[from] LabelError),
}

#[derive(Debug, Clone)]
enum Block {
    Numeric { column: usize },
    OneHot { values: Vec<String> },
}

/// Maps a row's independent cells to a fixed-length vector. Missing numeric
/// cells encode as 0.5, missing symbols as an all-zero block.
#[derive(Debug, Clone)]
pub struct Encoding {
    blocks: Vec<Block>,
    dim: usize,
}

impl Encoding {
    pub fn new(ds: &Dataset) -> Self {
        let mut dim = 0;
        let blocks = ds
            .x_cols()
            .iter()
            .map(|&column| match (ds.columns()[column].kind, ds.stats(column)) {
                (Kind::Symbolic, ColumnStats::Symbolic { freq, .. }) => {
                    dim += freq.len();
                    Block::OneHot {
                        values: freq.keys().cloned().collect(),
                    }
                }
                _ => {
                    dim += 1;
                    Block::Numeric { column }
                }
            })
            .collect();
        Encoding { blocks, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn encode(&self, ds: &Dataset, x: &[Cell]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim);
        for (block, cell) in self.blocks.iter().zip(x) {
            match block {
                Block::Numeric { column } => out.push(match cell {
                    Cell::Num(v) => ds.norm(*column, *v),
                    _ => 0.5,
                }),
                Block::OneHot { values } => {
                    let hit = match cell {
                        Cell::Sym(s) => values.binary_search(s).ok(),
                        _ => None,
                    };
                    out.extend((0..values.len()).map(|i| if Some(i) == hit { 1.0 } else { 0.0 }));
                }
            }
        }
        out
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `(lml, length scale, factor, alpha, jitter)` of the best grid point.
type Fitted = (f64, f64, Cholesky<f64, Dyn>, DVector<f64>, f64);

/// A fitted GP posterior.
#[derive(Debug, Clone)]
pub struct GpModel {
    inputs: Vec<Vec<f64>>,
    prior_mean: f64,
    signal_var: f64,
    length_scale: f64,
    jitter: f64,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    log_marginal: f64,
}

impl GpModel {
    /// Fit with the length scale chosen from [`LENGTH_SCALES`].
    pub fn fit(inputs: Vec<Vec<f64>>, targets: &[f64]) -> Result<Self, GpError> {
        Self::fit_grid(inputs, targets, &LENGTH_SCALES)
    }

    /// Fit with one fixed length scale.
    pub fn fit_with(inputs: Vec<Vec<f64>>, targets: &[f64], length_scale: f64) -> Result<Self, GpError> {
        Self::fit_grid(inputs, targets, &[length_scale])
    }

    fn fit_grid(inputs: Vec<Vec<f64>>, targets: &[f64], grid: &[f64]) -> Result<Self, GpError> {
        let n = targets.len();
        if n < 2 || inputs.len() != n {
            return Err(GpError::TooFew(n.min(inputs.len())));
        }
        let prior_mean = targets.iter().sum::<f64>() / n as f64;
        let signal_var = (targets.iter().map(|t| (t - prior_mean).powi(2)).sum::<f64>() / n as f64)
            .max(MIN_SIGNAL_VAR);
        let y = DVector::from_iterator(n, targets.iter().map(|t| t - prior_mean));

        let mut best: Option<Fitted> = None;
        let mut last_jitter = NOISE;
        for &ell in grid {
            let k = DMatrix::from_fn(n, n, |i, j| {
                signal_var * (-sq_dist(&inputs[i], &inputs[j]) / (2.0 * ell * ell)).exp()
            });
            let mut jitter = NOISE;
            let chol = loop {
                let mut kj = k.clone();
                for i in 0..n {
                    kj[(i, i)] += jitter * signal_var;
                }
                if let Some(c) = kj.cholesky() {
                    break Some(c);
                }
                jitter *= 10.0;
                if jitter > MAX_JITTER * (1.0 + 1e-9) {
                    break None;
                }
            };
            last_jitter = jitter;
            let Some(chol) = chol else { continue };
            let alpha = chol.solve(&y);
            let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
            let lml = -0.5 * y.dot(&alpha) - log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
            if best.as_ref().is_none_or(|b| lml > b.0) {
                best = Some((lml, ell, chol, alpha, jitter));
            }
        }
        let (log_marginal, length_scale, chol, alpha, jitter) =
            best.ok_or(GpError::NotPositiveDefinite(last_jitter.min(MAX_JITTER)))?;
        Ok(GpModel {
            inputs,
            prior_mean,
            signal_var,
            length_scale,
            jitter,
            chol,
            alpha,
            log_marginal,
        })
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn signal_var(&self) -> f64 {
        self.signal_var
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    /// Relative jitter that made the kernel matrix factorizable.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Absolute noise variance on the diagonal.
    pub fn noise_var(&self) -> f64 {
        self.jitter * self.signal_var
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal
    }

    fn kernel(&self, a: &[f64], b: &[f64]) -> f64 {
        self.signal_var * (-sq_dist(a, b) / (2.0 * self.length_scale * self.length_scale)).exp()
    }

    /// Posterior mean and standard deviation at an encoded point.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let n = self.inputs.len();
        let ks = DVector::from_iterator(n, self.inputs.iter().map(|xi| self.kernel(xi, x)));
        let mu = self.prior_mean + ks.dot(&self.alpha);
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&ks)
            .unwrap_or_else(|| DVector::zeros(n));
        let var = self.signal_var - v.dot(&v);
        (mu, var.max(0.0).sqrt())
    }
}

/// Best modeled objective among labeled rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incumbent {
    pub f_star: f64,
}

/// Training set for the GP: encoded labeled rows and `1 - chebyshev`.
pub fn training_set(labels: &LabelState<'_>, enc: &Encoding) -> Result<(Vec<Vec<f64>>, Vec<f64>), LabelError> {
    let ds = labels.dataset();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &id in labels.labeled_ids() {
        ys.push(1.0 - chebyshev(labels, id)?);
        xs.push(enc.encode(ds, &ds.row(id).x));
    }
    Ok((xs, ys))
}

/// Fit on every labeled row. Returns the model and the incumbent.
pub fn fit_gp(labels: &LabelState<'_>, enc: &Encoding) -> Result<(GpModel, Incumbent), GpError> {
    let (xs, ys) = training_set(labels, enc)?;
    let f_star = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((GpModel::fit(xs, &ys)?, Incumbent { f_star }))
}

/// Standard normal CDF.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn ucb(mu: f64, sigma: f64, kappa: f64) -> f64 {
    mu + kappa * sigma
}

/// Probability of improving on `f_star` by more than `epsilon`.
pub fn pi(mu: f64, sigma: f64, f_star: f64, epsilon: f64) -> f64 {
    let d = mu - f_star - epsilon;
    if sigma > 0.0 {
        norm_cdf(d / sigma)
    } else if d > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Expected improvement; exactly 0 when `sigma` is 0.
pub fn ei(mu: f64, sigma: f64, f_star: f64, epsilon: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    let d = mu - f_star - epsilon;
    let z = d / sigma;
    (d * norm_cdf(z) + sigma * norm_pdf(z)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GpAcquisition {
    Ucb,
    Pi,
    Ei,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionParams {
    pub kappa: f64,
    pub epsilon: f64,
}

impl Default for AcquisitionParams {
    fn default() -> Self {
        AcquisitionParams {
            kappa: 2.0,
            epsilon: 0.01,
        }
    }
}

impl GpAcquisition {
    pub fn score(self, mu: f64, sigma: f64, inc: Incumbent, p: AcquisitionParams) -> f64 {
        match self {
            GpAcquisition::Ucb => ucb(mu, sigma, p.kappa),
            GpAcquisition::Pi => pi(mu, sigma, inc.f_star, p.epsilon),
            GpAcquisition::Ei => ei(mu, sigma, inc.f_star, p.epsilon),
        }
    }
}

/// Rows scored by [`acquire_gp`]: the whole pool when it is small enough,
/// else a seeded uniform sample of [`CANDIDATE_CAP`] rows. Independent of
/// the pool's order.
pub fn candidates<R: Rng + ?Sized>(pool: &[usize], rng: &mut R) -> Vec<usize> {
    let mut sorted = pool.to_vec();
    sorted.sort_unstable();
    if sorted.len() <= CANDIDATE_CAP {
        return sorted;
    }
    let mut picked: Vec<usize> = index::sample(rng, sorted.len(), CANDIDATE_CAP)
        .into_iter()
        .map(|i| sorted[i])
        .collect();
    picked.sort_unstable();
    picked
}

/// Pick the candidate with the highest acquisition score, ties to the
/// lowest id.
#[allow(clippy::too_many_arguments)]
pub fn acquire_gp<R: Rng + ?Sized>(
    model: &GpModel,
    incumbent: Incumbent,
    enc: &Encoding,
    ds: &Dataset,
    pool: &[usize],
    acquisition: GpAcquisition,
    params: AcquisitionParams,
    rng: &mut R,
) -> Result<usize, GpError> {
    let cands = candidates(pool, rng);
    argmax_lowest_id(cands.into_iter().map(|id| {
        let (mu, sigma) = model.predict(&enc.encode(ds, &ds.row(id).x));
        (id, acquisition.score(mu, sigma, incumbent, params))
    }))
    .ok_or(GpError::EmptyPool)
}
