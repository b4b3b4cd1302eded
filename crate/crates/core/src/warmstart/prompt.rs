//! Few-shot prompt assembly and the markdown tables it is made of.

use serde::{Deserialize, Serialize};

use crate::dataset::{Cell, ColumnStats, Dataset, Role};
use crate::objective::BestRestSplit;

use super::{Claim, SyntheticRow};

pub const SYSTEM_INTRO: &str = "You are given a dataset with several features. The rows have been \
categorized into \"Best\" and \"Rest\" examples based on their overall performance. Below are the \
key features and their descriptions from the dataset:";

pub const EXAMPLES_INTRO: &str = "Given Examples:";

pub const TASK: &str = "1. Generate Two New Examples that are Better:
These should outperform the given \"Best\" examples by optimizing the relevant features to better combinations.

2. Generate Two New Examples that are Poorer:
These should under perform the given \"Rest\" examples by modifying the relevant features to worse combinations.

Consider the inter-dependencies between features, and ensure that the generated examples follow logical consistency within the dataset's context.

Return the output in the same markdown structure:";

/// Column used in example tables for the Best/Rest tag.
pub const CLASS_HEADER: &str = "class";

/// The three parts of a warm-start prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    /// Role statement followed by the per-column meta table.
    pub system: String,
    /// Labeled rows, best first, tagged Best or Rest.
    pub examples: String,
    /// Fixed instruction block.
    pub task: String,
}

impl PromptBundle {
    /// Chat messages as `(role, content)` pairs: the system text, then the
    /// examples and task as one user message.
    pub fn messages(&self) -> Vec<(&'static str, String)> {
        vec![
            ("system", self.system.clone()),
            ("user", format!("{}\n\n{}", self.examples, self.task)),
        ]
    }

    pub fn render(&self) -> String {
        format!("{}\n\n{}\n\n{}\n", self.system, self.examples, self.task)
    }
}

fn escape(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

/// A markdown table with a header and a separator line.
pub fn markdown_table<S: AsRef<str>>(headers: &[S], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let line = |cells: &mut dyn Iterator<Item = String>| {
        let mut s = String::from("|");
        for c in cells {
            s.push(' ');
            s.push_str(&c);
            s.push_str(" |");
        }
        s.push('\n');
        s
    };
    out.push_str(&line(&mut headers.iter().map(|h| escape(h.as_ref()))));
    out.push_str(&line(&mut headers.iter().map(|_| "---".to_string())));
    for r in rows {
        out.push_str(&line(&mut r.iter().map(|c| escape(c))));
    }
    out
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:.4}")
    }
}

/// One line per non-ignored column: name, kind, role, then numeric
/// lo/hi/median/sd or symbolic mode and frequencies.
pub fn meta_table(ds: &Dataset) -> String {
    let headers = ["name", "kind", "role", "lo", "hi", "median", "sd", "mode", "frequencies"];
    let rows: Vec<Vec<String>> = ds
        .columns()
        .iter()
        .filter(|c| c.role != Role::Ignored)
        .map(|c| {
            let role = match c.role {
                Role::Goal => format!("goal ({})", c.direction.as_str()),
                _ => "feature".to_string(),
            };
            let mut line = vec![c.name.clone(), c.kind.as_str().to_string(), role];
            match ds.stats(c.index) {
                ColumnStats::Numeric { lo, hi, median, sd, .. } => {
                    line.extend([fmt_num(*lo), fmt_num(*hi), fmt_num(*median), fmt_num(*sd)]);
                    line.extend([String::new(), String::new()]);
                }
                ColumnStats::Symbolic { mode, freq, .. } => {
                    line.extend(std::iter::repeat_n(String::new(), 4));
                    line.push(mode.clone().unwrap_or_default());
                    line.push(
                        freq.iter()
                            .map(|(k, n)| format!("{k}: {n}"))
                            .collect::<Vec<_>>()
                            .join(", "),
                    );
                }
            }
            line
        })
        .collect();
    markdown_table(&headers, &rows)
}

fn x_headers(ds: &Dataset) -> Vec<String> {
    (0..ds.x_cols().len()).map(|i| ds.x_spec(i).name.clone()).collect()
}

fn render_cells(x: &[Cell]) -> Vec<String> {
    x.iter().map(|c| c.to_string()).collect()
}

/// Labeled rows as a table of independent values plus a Best/Rest column.
pub fn examples_table(split: &BestRestSplit, ds: &Dataset) -> String {
    let mut headers = x_headers(ds);
    headers.push(CLASS_HEADER.to_string());
    let tag = |rows: &[crate::objective::Scored], t: &str| -> Vec<Vec<String>> {
        rows.iter()
            .map(|s| {
                let mut line = render_cells(&ds.row(s.id).x);
                line.push(t.to_string());
                line
            })
            .collect()
    };
    let mut rows = tag(&split.best, "Best");
    rows.extend(tag(&split.rest, "Rest"));
    markdown_table(&headers, &rows)
}

pub fn build_prompt(split: &BestRestSplit, ds: &Dataset) -> PromptBundle {
    PromptBundle {
        system: format!("{SYSTEM_INTRO}\n\n{}", meta_table(ds)),
        examples: format!("{EXAMPLES_INTRO}\n\n{}", examples_table(split, ds)),
        task: TASK.to_string(),
    }
}

/// Render synthetic rows the way a well-behaved model would answer: a
/// heading per claim, each followed by a table of independent values.
pub fn render_synthetic(rows: &[SyntheticRow], ds: &Dataset) -> String {
    let headers = x_headers(ds);
    let mut out = String::new();
    for (claim, title) in [(Claim::Better, "## Better Examples"), (Claim::Poorer, "## Poorer Examples")] {
        let body: Vec<Vec<String>> = rows
            .iter()
            .filter(|r| r.claim == claim)
            .map(|r| render_cells(&r.x))
            .collect();
        if body.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(title);
        out.push_str("\n\n");
        out.push_str(&markdown_table(&headers, &body));
    }
    out
}
