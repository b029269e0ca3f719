use std::collections::BTreeMap;
use std::sync::Arc;

use super::EngineError;
use crate::ranking::{RankedList, Scored};

/// Min-max normalization to `[0, 1]`; a single candidate or an all-equal
/// list maps to 1.0 everywhere.
pub fn min_max(items: &[Scored]) -> Vec<(Arc<str>, f64)> {
    let (lo, hi) = items
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.score), hi.max(s.score)));
    items
        .iter()
        .map(|s| {
            let norm = if hi > lo { (s.score - lo) / (hi - lo) } else { 1.0 };
            (s.id.clone(), norm)
        })
        .collect()
}

/// Weighted sum of min-max normalized component scores. Candidates are the
/// union of the components with positive weight; an item missing from a
/// component counts as 0 there. Unranked.
pub fn hybrid_scores(components: &[(&RankedList, f64)]) -> Result<Vec<Scored>, EngineError> {
    if components.is_empty() {
        return Err(EngineError::InvalidWeights("no components".into()));
    }
    if components.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
        return Err(EngineError::InvalidWeights("weights must be finite and non-negative".into()));
    }
    if components.iter().all(|(_, w)| *w == 0.0) {
        return Err(EngineError::InvalidWeights("all weights are zero".into()));
    }
    let mut combined: BTreeMap<Arc<str>, f64> = BTreeMap::new();
    for (list, weight) in components.iter().filter(|(_, w)| *w > 0.0) {
        for (id, norm) in min_max(&list.items) {
            *combined.entry(id).or_insert(0.0) += weight * norm;
        }
    }
    Ok(combined.into_iter().map(|(id, score)| Scored { id, score }).collect())
}

/// Ranked hybrid combination truncated to `k`.
pub fn hybrid(components: &[(&RankedList, f64)], k: usize) -> Result<RankedList, EngineError> {
    let items = crate::ranking::top_k(hybrid_scores(components)?, k);
    let as_of_sequence = components.iter().map(|(l, _)| l.as_of_sequence).max().unwrap_or(0);
    Ok(RankedList { items, scenario_id: None, as_of_sequence })
}
