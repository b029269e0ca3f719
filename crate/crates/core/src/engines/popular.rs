use std::sync::Arc;

use super::{finish, AffinityWeights, EngineError};
use crate::catalog::{Column, DomainState};
use crate::exec::Exec;
use crate::ids::EntityTypeId;
use crate::ranking::{RankedList, Scored};
use crate::registry::PostFilter;
use crate::sched::checkpoint;

/// Unranked popularity scores: `score(i) = Σ_u affinity(u, i)`, positive only.
pub fn popularity_scores(
    snapshot: &DomainState,
    target_type: &EntityTypeId,
    weights: &AffinityWeights,
    exec: Exec,
) -> Vec<Scored> {
    let Some(columns) = snapshot.interactions().columns(target_type) else {
        return Vec::new();
    };
    let columns: Vec<(&Arc<str>, &Column)> = columns.iter().collect();
    exec.filter_map(&columns, |(id, column)| {
        checkpoint();
        let score: f64 = column.values().map(|c| weights.affinity(c)).sum();
        (score > 0.0).then(|| Scored { id: Arc::clone(id), score })
    })
}

/// Most-popular ranking with post-filters applied before truncation.
pub fn most_popular(
    snapshot: &DomainState,
    target_type: &EntityTypeId,
    weights: &AffinityWeights,
    filters: &[PostFilter],
    k: usize,
    exec: Exec,
) -> Result<RankedList, EngineError> {
    if weights.is_empty() {
        return Err(EngineError::Misconfigured("empty interaction subset".into()));
    }
    let candidates = popularity_scores(snapshot, target_type, weights, exec);
    finish(snapshot, target_type, candidates, filters, k)
}
