//! Divergence between the two token views.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewDistance {
    pub jaccard: f64,
    pub toc: Option<f64>,
}

/// `1 - |a ∩ b| / |a ∪ b|`, and 0 when both sets are empty.
pub fn jaccard_distance<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return 0.0;
    }
    1.0 - inter as f64 / union as f64
}

/// Share of the shorter list's tokens that find a partner in the other
/// list within Levenshtein distance `t`. Matching walks the shorter list
/// in order and consumes the first unused partner.
pub fn tolerant_overlap_coefficient<S: AsRef<str>>(a: &[S], b: &[S], t: usize) -> f64 {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return if long.is_empty() { 1.0 } else { 0.0 };
    }
    let mut used = vec![false; long.len()];
    let mut matched = 0usize;
    for s in short {
        let partner = long
            .iter()
            .enumerate()
            .find(|(i, l)| !used[*i] && strsim::levenshtein(s.as_ref(), l.as_ref()) <= t);
        if let Some((i, _)) = partner {
            used[i] = true;
            matched += 1;
        }
    }
    matched as f64 / short.len() as f64
}
