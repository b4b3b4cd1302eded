use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RankTable;

/// Percent of datasets in which each arm's best rank was `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub datasets: usize,
    /// Number of rank columns.
    pub ranks: usize,
    /// `(arm, percent per rank)`, most frequent rank-0 arm first.
    pub rows: Vec<(String, Vec<f64>)>,
}

/// Best (lowest) rank of each arm in one table.
fn best_ranks(table: &RankTable) -> BTreeMap<&str, usize> {
    let mut out: BTreeMap<&str, usize> = BTreeMap::new();
    for (rank, m) in table.ranked() {
        let e = out.entry(m.sample.arm.as_str()).or_insert(rank);
        *e = (*e).min(rank);
    }
    out
}

/// Tally best ranks per arm over `tables`. Arms missing from a table add
/// nothing for that dataset. Ties in the rank-0 column keep arm-name order.
pub fn rank_frequencies(tables: &[&RankTable]) -> FrequencyTable {
    let n = tables.len();
    let mut counts: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut ranks = 0;
    for t in tables {
        for (arm, r) in best_ranks(t) {
            let c = counts.entry(arm.to_string()).or_default();
            if c.len() <= r {
                c.resize(r + 1, 0);
            }
            c[r] += 1;
            ranks = ranks.max(r + 1);
        }
    }
    let mut rows: Vec<(String, Vec<f64>)> = counts
        .into_iter()
        .map(|(arm, mut c)| {
            c.resize(ranks, 0);
            let pct = c.iter().map(|&k| 100.0 * k as f64 / n as f64).collect();
            (arm, pct)
        })
        .collect();
    rows.sort_by(|a, b| b.1[0].total_cmp(&a.1[0]));
    FrequencyTable { datasets: n, ranks, rows }
}

/// Mean budget at which each arm's samples landed in each rank, over all
/// tables (`None` where an arm never reached a rank).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalsNeeded {
    pub ranks: usize,
    pub rows: Vec<(String, Vec<Option<f64>>)>,
}

pub fn evals_needed(tables: &[&RankTable]) -> EvalsNeeded {
    let mut acc: BTreeMap<String, BTreeMap<usize, (f64, usize)>> = BTreeMap::new();
    let mut ranks = 0;
    for t in tables {
        for (rank, m) in t.ranked() {
            let e = acc.entry(m.sample.arm.clone()).or_default().entry(rank).or_insert((0.0, 0));
            e.0 += m.sample.budget as f64;
            e.1 += 1;
            ranks = ranks.max(rank + 1);
        }
    }
    let mut rows: Vec<(String, Vec<Option<f64>>)> = acc
        .into_iter()
        .map(|(arm, by_rank)| {
            let v = (0..ranks)
                .map(|r| by_rank.get(&r).map(|&(s, k)| s / k as f64))
                .collect();
            (arm, v)
        })
        .collect();
    rows.sort_by(|a, b| {
        let key = |r: &Option<f64>| r.unwrap_or(f64::INFINITY);
        key(&a.1[0]).total_cmp(&key(&b.1[0]))
    });
    EvalsNeeded { ranks, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{Group, Ranked, Sample};

    fn table(groups: &[&[(&str, usize)]]) -> RankTable {
        RankTable {
            groups: groups
                .iter()
                .enumerate()
                .map(|(rank, ms)| Group {
                    rank,
                    members: ms
                        .iter()
                        .map(|&(arm, budget)| Ranked {
                            sample: Sample::with_arm(arm, budget, format!("{arm}/{budget}"), vec![0.0]),
                            median: 0.0,
                            sd: 0.0,
                        })
                        .collect(),
                })
                .collect(),
            depth: 0,
        }
    }

    #[test]
    fn single_table() {
        let t = table(&[&[("a", 10)], &[("b", 10)]]);
        let f = rank_frequencies(&[&t]);
        assert_eq!(f.rows[0], ("a".to_string(), vec![100.0, 0.0]));
        assert_eq!(f.rows[1], ("b".to_string(), vec![0.0, 100.0]));
    }

    #[test]
    fn manual_tally_over_four_tables() {
        let t1 = table(&[&[("a", 10), ("b", 10)], &[("c", 10), ("a", 20)]]);
        let t2 = table(&[&[("c", 10)], &[("a", 10)], &[("b", 10)]]);
        let t3 = table(&[&[("b", 20)], &[("a", 10), ("a", 20)]]);
        let t4 = table(&[&[("a", 30), ("b", 30)]]);
        let f = rank_frequencies(&[&t1, &t2, &t3, &t4]);
        // a best ranks: 0, 1, 1, 0; b: 0, 2, 0, 0; c: 1, 0, absent, absent
        let row = |arm: &str| f.rows.iter().find(|r| r.0 == arm).unwrap().1.clone();
        assert_eq!(row("a"), vec![50.0, 50.0, 0.0]);
        assert_eq!(row("b"), vec![75.0, 0.0, 25.0]);
        assert_eq!(row("c"), vec![25.0, 25.0, 0.0]);
        assert_eq!(f.rows.iter().map(|r| r.0.as_str()).collect::<Vec<_>>(), vec!["b", "a", "c"]);
    }

    #[test]
    fn evals_needed_means() {
        let t1 = table(&[&[("a", 10), ("a", 20)], &[("b", 30)]]);
        let t2 = table(&[&[("a", 30)], &[("b", 10)]]);
        let e = evals_needed(&[&t1, &t2]);
        assert_eq!(e.rows[0], ("a".to_string(), vec![Some(20.0), None]));
        assert_eq!(e.rows[1], ("b".to_string(), vec![None, Some(20.0)]));
    }
}
