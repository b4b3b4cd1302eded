/// `(#(x > y) - #(x < y)) / (|a| |b|)` over all pairs. Counts by binary
/// search over the sorted second list.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let bs = super::sorted(b);
    let mut more = 0usize;
    let mut less = 0usize;
    for &x in a {
        // values of b strictly below x, and at or below x
        let below = bs.partition_point(|&y| y < x);
        let upto = bs.partition_point(|&y| y <= x);
        more += below;
        less += bs.len() - upto;
    }
    (more as f64 - less as f64) / (a.len() * b.len()) as f64
}
