//! Reading synthetic rows back out of a free-text model response.

use crate::dataset::{Cell, ColumnStats, Dataset, Kind, MISSING};

use super::{Claim, SynthesisError, SyntheticRow, PER_CLAIM};

fn claim_of(line: &str) -> Option<Claim> {
    let lower = line.to_lowercase();
    let better = lower.find("better");
    let poorer = ["poorer", "worse"].iter().filter_map(|w| lower.find(w)).min();
    match (better, poorer) {
        (Some(b), Some(p)) => Some(if b < p { Claim::Better } else { Claim::Poorer }),
        (Some(_), None) => Some(Claim::Better),
        (None, Some(_)) => Some(Claim::Poorer),
        (None, None) => None,
    }
}

fn split_cells(line: &str) -> Vec<String> {
    let inner = line.trim().trim_start_matches('|');
    let inner = inner.strip_suffix('|').unwrap_or(inner);
    let mut cells = Vec::new();
    let mut cur = String::new();
    let mut chars = inner.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' if chars.peek() == Some(&'|') => {
                cur.push('|');
                chars.next();
            }
            '|' => cells.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    cells.push(cur);
    cells.into_iter().map(|c| clean(&c)).collect()
}

fn clean(cell: &str) -> String {
    cell.trim().trim_matches('*').trim_matches('`').trim().to_string()
}

fn is_separator(cells: &[String]) -> bool {
    cells
        .iter()
        .all(|c| !c.is_empty() && c.chars().all(|ch| matches!(ch, '-' | ':' | ' ')))
}

fn coerce(ds: &Dataset, i: usize, raw: &str) -> Option<Cell> {
    if raw == MISSING {
        return Some(Cell::Missing);
    }
    let spec = ds.x_spec(i);
    match spec.kind {
        Kind::Numeric => {
            let v: f64 = raw.parse().ok().filter(|v: &f64| v.is_finite())?;
            Some(Cell::Num(match ds.stats(spec.index) {
                ColumnStats::Numeric { lo, hi, .. } if lo <= hi => v.clamp(*lo, *hi),
                _ => v,
            }))
        }
        Kind::Symbolic if raw.is_empty() => None,
        Kind::Symbolic => Some(Cell::Sym(raw.to_string())),
    }
}

/// Table rows under "better"/"poorer" headings, mapped to independent
/// columns by header name. Numbers are clamped to the column range; rows
/// with a cell that cannot be coerced are dropped, as are rows beyond the
/// first two per claim.
pub fn parse_response(text: &str, ds: &Dataset) -> Result<Vec<SyntheticRow>, SynthesisError> {
    let names: Vec<String> = (0..ds.x_cols().len())
        .map(|i| ds.x_spec(i).name.to_lowercase())
        .collect();
    let mut claim: Option<Claim> = None;
    // for the current table: x column index -> table cell index
    let mut layout: Option<Vec<Option<usize>>> = None;
    let mut out = Vec::new();
    let mut counts = [0usize; 2];

    for line in text.lines() {
        let t = line.trim();
        if !t.starts_with('|') {
            layout = None;
            if let Some(c) = claim_of(t) {
                claim = Some(c);
            }
            continue;
        }
        let cells = split_cells(t);
        if is_separator(&cells) {
            continue;
        }
        let Some(map) = &layout else {
            let lower: Vec<String> = cells.iter().map(|c| c.to_lowercase()).collect();
            let map: Vec<Option<usize>> = names
                .iter()
                .map(|n| lower.iter().position(|h| h == n))
                .collect();
            layout = Some(map);
            continue;
        };
        let Some(c) = claim else { continue };
        if map.iter().all(Option::is_none) {
            continue;
        }
        let slot = match c {
            Claim::Better => 0,
            Claim::Poorer => 1,
        };
        if counts[slot] >= PER_CLAIM {
            continue;
        }
        let x: Option<Vec<Cell>> = map
            .iter()
            .enumerate()
            .map(|(i, pos)| match pos {
                Some(p) => coerce(ds, i, cells.get(*p).map(String::as_str).unwrap_or("")),
                None => Some(Cell::Missing),
            })
            .collect();
        if let Some(x) = x {
            counts[slot] += 1;
            out.push(SyntheticRow { x, claim: c });
        }
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(SynthesisError::Parse(format!(
            "need at least one better and one poorer row, got {} and {}",
            counts[0], counts[1]
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warmstart::prompt::render_synthetic;

    fn ds() -> Dataset {
        Dataset::from_reader("t", "Size,color,Cost-\n0,red,1\n10,blue,2\n5,red,3\n".as_bytes()).unwrap()
    }

    const WELL_FORMED: &str = "## Better Examples

| Size | color |
| --- | --- |
| 1 | red |
| 2.5 | blue |

## Poorer Examples

| Size | color |
| --- | --- |
| 9 | blue |
| 8 | red |
";

    #[test]
    fn happy_path() {
        let rows = parse_response(WELL_FORMED, &ds()).unwrap();
        let claims: Vec<Claim> = rows.iter().map(|r| r.claim).collect();
        assert_eq!(claims, [Claim::Better, Claim::Better, Claim::Poorer, Claim::Poorer]);
        assert_eq!(rows[1].x, vec![Cell::Num(2.5), Cell::Sym("blue".into())]);
    }

    #[test]
    fn prose_around_tables() {
        let text = format!("Sure! Here you go.\n\n{WELL_FORMED}\nThese follow the trends of the data.\n");
        assert_eq!(parse_response(&text, &ds()).unwrap(), parse_response(WELL_FORMED, &ds()).unwrap());
    }

    #[test]
    fn uncoercible_row_is_dropped() {
        let text = WELL_FORMED.replace("| 2.5 | blue |", "| ten | blue |");
        let rows = parse_response(&text, &ds()).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows.iter().filter(|r| r.claim == Claim::Better).count(), 1);
    }

    #[test]
    fn too_few_rows_fail() {
        let text = WELL_FORMED.replace("| 9 | blue |", "| x | blue |").replace("| 8 | red |", "| nan | red |");
        assert!(matches!(parse_response(&text, &ds()), Err(SynthesisError::Parse(_))));
        assert!(parse_response("no tables here", &ds()).is_err());
    }

    #[test]
    fn clamps_and_reorders_columns() {
        let text = "Better:\n| color | Size | class |\n|:-|-:|-|\n| **red** | 99 | Best |\n\nWorse ones:\n| color | Size |\n|---|---|\n| blue | -4 |\n";
        let rows = parse_response(text, &ds()).unwrap();
        assert_eq!(rows[0].x, vec![Cell::Num(10.0), Cell::Sym("red".into())]);
        assert_eq!(rows[1].x, vec![Cell::Num(0.0), Cell::Sym("blue".into())]);
        assert_eq!(rows[1].claim, Claim::Poorer);
    }

    #[test]
    fn caps_two_per_claim() {
        let text = WELL_FORMED.replace("| 2.5 | blue |", "| 2.5 | blue |\n| 3 | blue |");
        assert_eq!(parse_response(&text, &ds()).unwrap().len(), 4);
    }

    #[test]
    fn render_round_trip() {
        let d = ds();
        let rows = vec![
            SyntheticRow { x: vec![Cell::Num(0.1 + 0.2), Cell::Sym("red".into())], claim: Claim::Better },
            SyntheticRow { x: vec![Cell::Num(1.0 / 3.0), Cell::Missing], claim: Claim::Better },
            SyntheticRow { x: vec![Cell::Num(9.75), Cell::Sym("blue".into())], claim: Claim::Poorer },
        ];
        assert_eq!(parse_response(&render_synthetic(&rows, &d), &d).unwrap(), rows);
    }
}
