use serde::{Deserialize, Serialize};

use super::{bootstrap_same, cliffs_delta, percentile, sd, sorted, Sample, SkConfig};

/// Expected-difference gains below this count as no gain at all.
const NO_GAIN: f64 = 1e-24;

fn pooled(samples: &[Sample]) -> Vec<f64> {
    samples.iter().flat_map(|s| s.values.iter().copied()).collect()
}

/// Best cut of median-sorted samples: the number of samples on the left
/// that maximizes `n1/n (mu1 - mu)^2 + n2/n (mu2 - mu)^2`, with `n` and the
/// means over pooled values. Ties go to the earliest cut; `None` when no
/// cut gains anything (or fewer than two samples).
pub fn sk_split(samples: &[Sample]) -> Option<usize> {
    if samples.len() < 2 {
        return None;
    }
    let sums: Vec<(f64, usize)> = samples
        .iter()
        .map(|s| (s.values.iter().sum(), s.values.len()))
        .collect();
    let (total, n) = sums.iter().fold((0.0, 0usize), |acc, s| (acc.0 + s.0, acc.1 + s.1));
    if n == 0 {
        return None;
    }
    let mu = total / n as f64;
    let (mut left, mut nl) = (0.0, 0usize);
    let mut best: Option<(f64, usize)> = None;
    for (cut, &(s, k)) in sums.iter().enumerate().take(samples.len() - 1) {
        left += s;
        nl += k;
        let nr = n - nl;
        if nl == 0 || nr == 0 {
            continue;
        }
        let (m1, m2) = (left / nl as f64, (total - left) / nr as f64);
        let gain = nl as f64 / n as f64 * (m1 - mu).powi(2) + nr as f64 / n as f64 * (m2 - mu).powi(2);
        if best.is_none_or(|(g, _)| gain > g) {
            best = Some((gain, cut + 1));
        }
    }
    best.filter(|&(g, _)| g > NO_GAIN).map(|(_, c)| c)
}

/// One sample in a rank table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranked {
    pub sample: Sample,
    pub median: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub rank: usize,
    pub members: Vec<Ranked>,
}

/// Groups in rank order; concatenating their members gives the samples
/// sorted by median.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub groups: Vec<Group>,
    /// Longest chain of accepted splits from the root.
    pub depth: usize,
}

impl RankTable {
    pub fn ranked(&self) -> impl Iterator<Item = (usize, &Ranked)> {
        self.groups.iter().flat_map(|g| g.members.iter().map(move |m| (g.rank, m)))
    }

    pub fn rank_of(&self, label: &str) -> Option<usize> {
        self.ranked().find(|(_, m)| m.sample.label == label).map(|(r, _)| r)
    }
}

fn divide(samples: &[Sample], cfg: &SkConfig, depth: usize, cuts: &mut Vec<usize>, offset: usize, max_depth: &mut usize) {
    *max_depth = (*max_depth).max(depth);
    let Some(cut) = sk_split(samples) else { return };
    let (l, r) = samples.split_at(cut);
    let (pl, pr) = (pooled(l), pooled(r));
    if cliffs_delta(&pl, &pr).abs() > cfg.delta_small && !bootstrap_same(&pl, &pr, cfg.n_boot, cfg.conf, cfg.seed) {
        divide(l, cfg, depth + 1, cuts, offset, max_depth);
        cuts.push(offset + cut);
        divide(r, cfg, depth + 1, cuts, offset + cut, max_depth);
    }
}

/// Sort by median (stable, so ties keep input order), then split
/// recursively while a cut shows both a non-negligible effect and a
/// significant difference. Ranks count up from 0 left to right.
pub fn scott_knott(samples: Vec<Sample>, cfg: &SkConfig) -> RankTable {
    let mut keyed: Vec<(f64, Sample)> = samples.into_iter().map(|s| (s.median(), s)).collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let samples: Vec<Sample> = keyed.into_iter().map(|(_, s)| s).collect();
    let mut cuts = Vec::new();
    let mut depth = 0;
    divide(&samples, cfg, 0, &mut cuts, 0, &mut depth);
    cuts.push(samples.len());
    let mut groups = Vec::new();
    let mut start = 0;
    for (rank, &end) in cuts.iter().enumerate() {
        let members = samples[start..end]
            .iter()
            .map(|s| Ranked {
                median: percentile(&sorted(&s.values), 0.5),
                sd: sd(&s.values),
                sample: s.clone(),
            })
            .collect();
        groups.push(Group { rank, members });
        start = end;
    }
    if samples.is_empty() {
        groups.clear();
    }
    RankTable { groups, depth }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(label: &str, values: &[f64]) -> Sample {
        Sample::new(label, values.to_vec())
    }

    #[test]
    fn split_examples() {
        assert_eq!(sk_split(&[s("a", &[0.0, 0.0]), s("b", &[1.0, 1.0])]), Some(1));
        assert_eq!(sk_split(&[s("a", &[0.3; 4]), s("b", &[0.3; 4]), s("c", &[0.3; 2])]), None);
        let four = [s("a", &[0.1]), s("b", &[0.12]), s("c", &[0.8]), s("d", &[0.82])];
        assert_eq!(sk_split(&four), Some(2));
        assert_eq!(sk_split(&four[..1]), None);
    }

    #[test]
    fn one_distribution_one_rank() {
        let base = [0.3, 0.31, 0.29, 0.305, 0.295, 0.3, 0.302, 0.298];
        let samples: Vec<Sample> = (0..5).map(|i| s(&format!("t{i}"), &base)).collect();
        let t = scott_knott(samples, &SkConfig::default());
        assert_eq!(t.groups.len(), 1);
    }

    #[test]
    fn two_clusters_two_ranks() {
        let lo: Vec<f64> = (0..20).map(|i| 0.1 + 0.001 * (i as f64 - 10.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|v| v + 0.8).collect();
        let samples = vec![s("h1", &hi), s("l1", &lo), s("h2", &hi), s("l2", &lo), s("l3", &lo), s("h3", &hi)];
        let t = scott_knott(samples, &SkConfig::default());
        assert_eq!(t.groups.len(), 2);
        assert!(t.groups[0].members.iter().all(|m| m.sample.label.starts_with('l')));
        assert_eq!(t.rank_of("h2"), Some(1));
    }

    #[test]
    fn empty_input() {
        assert!(scott_knott(Vec::new(), &SkConfig::default()).groups.is_empty());
    }

    fn arb_samples() -> impl Strategy<Value = Vec<Vec<u8>>> {
        prop::collection::vec(prop::collection::vec(0u8..64, 1..10), 1..8)
    }

    fn to_samples(raw: &[Vec<u8>], shift: f64) -> Vec<Sample> {
        raw.iter()
            .enumerate()
            .map(|(i, v)| s(&format!("t{i}"), &v.iter().map(|&x| x as f64 / 16.0 + shift).collect::<Vec<_>>()))
            .collect()
    }

    fn structure(t: &RankTable) -> Vec<Vec<String>> {
        t.groups
            .iter()
            .map(|g| g.members.iter().map(|m| m.sample.label.clone()).collect())
            .collect()
    }

    proptest! {
        #[test]
        fn groups_are_contiguous_and_ranked(raw in arb_samples()) {
            let t = scott_knott(to_samples(&raw, 0.0), &SkConfig::default());
            let medians: Vec<f64> = t.ranked().map(|(_, m)| m.median).collect();
            prop_assert!(medians.windows(2).all(|w| w[0] <= w[1]));
            for (i, g) in t.groups.iter().enumerate() {
                prop_assert_eq!(g.rank, i);
                prop_assert!(!g.members.is_empty());
            }
            prop_assert!(t.depth < raw.len().max(1));
        }

        #[test]
        fn shifting_all_values_keeps_groups(raw in arb_samples(), c in 1i32..20) {
            let a = scott_knott(to_samples(&raw, 0.0), &SkConfig::default());
            let b = scott_knott(to_samples(&raw, c as f64), &SkConfig::default());
            prop_assert_eq!(structure(&a), structure(&b));
        }
    }
}
