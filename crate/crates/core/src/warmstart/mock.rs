//! Deterministic offline stand-in for the language model.

use std::collections::BTreeMap;

use crate::dataset::{mode_of, Cell, Dataset};
use crate::objective::{BestRestSplit, Scored};

use super::prompt::{render_synthetic, PromptBundle};
use super::{Claim, Exchange, SynthesisError, Synthesizer, SyntheticRow};

/// Fractions of the gap to the class mean used for the two rows per claim.
pub const STEPS: [f64; 2] = [0.1, 0.2];

struct Centroid {
    means: Vec<Option<f64>>,
    modes: Vec<Option<String>>,
}

fn centroid(rows: &[Scored], ds: &Dataset) -> Centroid {
    let n = ds.x_cols().len();
    let mut sums = vec![(0.0, 0usize); n];
    let mut freqs = vec![BTreeMap::<String, usize>::new(); n];
    for s in rows {
        for (i, cell) in ds.row(s.id).x.iter().enumerate() {
            match cell {
                Cell::Num(v) => {
                    sums[i].0 += v;
                    sums[i].1 += 1;
                }
                Cell::Sym(v) => *freqs[i].entry(v.clone()).or_insert(0) += 1,
                Cell::Missing => {}
            }
        }
    }
    Centroid {
        means: sums.iter().map(|&(s, k)| (k > 0).then(|| s / k as f64)).collect(),
        modes: freqs.iter().map(mode_of).collect(),
    }
}

fn toward(anchor: &[Cell], c: &Centroid, step: f64, ds: &Dataset, claim: Claim) -> SyntheticRow {
    let x = anchor
        .iter()
        .enumerate()
        .map(|(i, cell)| match cell {
            Cell::Num(v) => match c.means[i] {
                Some(m) => {
                    let moved = v + step * (m - v);
                    match ds.stats(ds.x_cols()[i]).range() {
                        Some((lo, hi)) => Cell::Num(moved.clamp(lo, hi)),
                        None => Cell::Num(moved),
                    }
                }
                None => cell.clone(),
            },
            Cell::Sym(_) => c.modes[i].clone().map_or_else(|| cell.clone(), Cell::Sym),
            Cell::Missing => Cell::Missing,
        })
        .collect();
    SyntheticRow { x, claim }
}

/// Two better rows moved from the top row toward the best set's mean
/// (10% then 20% of the gap; symbols set to the best set's mode), then two
/// poorer rows moved from the bottom row toward the rest set's mean.
pub fn mock_synthesize(split: &BestRestSplit, ds: &Dataset) -> Vec<SyntheticRow> {
    let mut out = Vec::with_capacity(4);
    for (claim, anchor, group) in [
        (Claim::Better, split.best.first(), &split.best),
        (Claim::Poorer, split.rest.last(), &split.rest),
    ] {
        let Some(anchor) = anchor else { continue };
        let c = centroid(group, ds);
        for step in STEPS {
            out.push(toward(&ds.row(anchor.id).x, &c, step, ds, claim));
        }
    }
    out
}

/// [`mock_synthesize`] behind the synthesizer interface. Its text answer is
/// the markdown rendering of the rows, so it exercises the same parser as a
/// remote model.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockSynthesizer;

impl Synthesizer for MockSynthesizer {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, prompt: &PromptBundle, split: &BestRestSplit, ds: &Dataset) -> Result<Exchange, SynthesisError> {
        let text = render_synthetic(&mock_synthesize(split, ds), ds);
        Ok(Exchange {
            request: prompt.render(),
            response: text.clone(),
            text,
        })
    }
}
