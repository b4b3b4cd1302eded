use std::fmt::Write;

use super::{percentile, sorted, RankTable};

pub const SPARK_WIDTH: usize = 30;

/// Quartile sketch over `[lo, hi]`: dashes from the 10th to 30th and 70th
/// to 90th percentiles, `o` at the median.
pub fn sparkline(values: &[f64], lo: f64, hi: f64, width: usize) -> String {
    let v = sorted(values);
    let mut out = vec![' '; width];
    if v.is_empty() || width == 0 {
        return String::new();
    }
    let pos = |x: f64| -> usize {
        if hi > lo {
            (((x - lo) / (hi - lo)) * (width - 1) as f64).round().clamp(0.0, (width - 1) as f64) as usize
        } else {
            0
        }
    };
    for (a, b) in [(0.1, 0.3), (0.7, 0.9)] {
        for c in &mut out[pos(percentile(&v, a))..=pos(percentile(&v, b))] {
            *c = '-';
        }
    }
    out[pos(percentile(&v, 0.5))] = 'o';
    out.into_iter().collect::<String>().trim_end().to_string()
}

fn value_range(table: &RankTable) -> (f64, f64) {
    table
        .ranked()
        .flat_map(|(_, m)| m.sample.values.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Aligned text: rank, treatment, budget, median, sd and the sparkline.
pub fn rank_table_text(table: &RankTable, title: &str) -> String {
    let (lo, hi) = value_range(table);
    let rows: Vec<[String; 6]> = table
        .ranked()
        .map(|(rank, m)| {
            let s = &m.sample;
            let (start, acquire) = match s.arm.split_once('/') {
                Some((a, b)) => (a.to_string(), b.to_string()),
                None => (String::new(), s.arm.clone()),
            };
            [
                rank.to_string(),
                start,
                acquire,
                s.budget.to_string(),
                format!("{:.2} ({:.2})", m.median, m.sd),
                sparkline(&s.values, lo, hi, SPARK_WIDTH),
            ]
        })
        .collect();
    let header = ["rank", "start", "acquire", "budget", "median (sd)", "spread"];
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    if !title.is_empty() {
        let _ = writeln!(out, "{title}");
    }
    let line = |cells: &[String], out: &mut String| {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            let _ = write!(s, "{c:<w$}");
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&header.map(String::from), &mut out);
    line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>(), &mut out);
    for r in &rows {
        line(r, &mut out);
    }
    out
}

/// CSV with one line per sample.
pub fn rank_table_csv(table: &RankTable) -> String {
    let mut out = String::from("rank,label,arm,budget,n,median,sd,p10,p30,p70,p90\n");
    for (rank, m) in table.ranked() {
        let s = &m.sample;
        let v = sorted(&s.values);
        let _ = writeln!(
            out,
            "{rank},{},{},{},{},{},{},{},{},{},{}",
            s.label,
            s.arm,
            s.budget,
            v.len(),
            m.median,
            m.sd,
            percentile(&v, 0.1),
            percentile(&v, 0.3),
            percentile(&v, 0.7),
            percentile(&v, 0.9)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{scott_knott, Sample, SkConfig};

    #[test]
    fn sparkline_marks() {
        let v: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let s = sparkline(&v, 0.0, 1.0, 11);
        assert_eq!(s, " --- o ---");
        assert_eq!(sparkline(&[0.5; 4], 0.5, 0.5, 10), "o");
    }

    #[test]
    fn text_and_csv_have_a_line_per_sample() {
        let t = scott_knott(
            vec![
                Sample::with_arm("random/exploit", 20, "random/exploit/20", vec![0.1, 0.2, 0.15]),
                Sample::with_arm("baseline", 1512, "baseline/1512", vec![0.9, 0.8, 0.7]),
            ],
            &SkConfig::default(),
        );
        let text = rank_table_text(&t, "demo");
        assert_eq!(text.lines().count(), 1 + 2 + 2);
        assert!(text.contains("random  exploit"));
        assert_eq!(rank_table_csv(&t).lines().count(), 3);
    }
}
