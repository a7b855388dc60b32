use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub value: f64,
    /// `Q ≥ |A|^{1/3}`: the formula says nothing and `value` is 1.
    pub degenerate: bool,
}

/// `½ + max(Q/(|A|^{1/3} − Q), Q·(log₂|A|/3)^{−ℓ})`, the success ceiling for a
/// classical algorithm making `Q` queries.
pub fn lower_bound(q: f64, card_a: f64, depth: usize) -> LowerBound {
    let cube_root = card_a.cbrt();
    if q >= cube_root {
        return LowerBound { value: 1.0, degenerate: true };
    }
    let first = q / (cube_root - q);
    let second = q * (card_a.log2() / 3.0).powi(-(depth as i32));
    LowerBound { value: 0.5 + first.max(second), degenerate: false }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm3Row {
    pub n: usize,
    pub log2_card_a: f64,
    pub depth: usize,
    pub queries: f64,
    pub bound: f64,
    pub degenerate: bool,
}

/// Bound at `|A| = 2^{n/2}`, `ℓ = log₂ n`, `Q = n^{c·log₂ n}`.
pub fn thm3_table(ns: &[usize], c: f64) -> Vec<Thm3Row> {
    ns.iter()
        .map(|&n| {
            let log_n = (n as f64).log2();
            let depth = log_n.round() as usize;
            let queries = (n as f64).powf(c * log_n);
            let log2_card_a = n as f64 / 2.0;
            let b = lower_bound(queries, 2f64.powf(log2_card_a), depth);
            Thm3Row { n, log2_card_a, depth, queries, bound: b.value, degenerate: b.degenerate }
        })
        .collect()
}
