use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

use super::affinity::lookup;
use super::{finish, AffinityWeights, EngineError};
use crate::catalog::DomainState;
use crate::exec::Exec;
use crate::ids::{ActorId, EntityTypeId};
use crate::ranking::{RankedList, Scored};
use crate::registry::PostFilter;
use crate::sched::checkpoint;

/// A neighbor of the target actor with its cosine similarity.
#[derive(Clone, Debug, PartialEq)]
pub struct Neighbor {
    pub actor: ActorId,
    pub similarity: f64,
}

/// Cosine similarity of `actor` against every actor sharing at least one
/// target with it, keeping positive similarities, ordered by descending
/// similarity then ascending actor.
pub fn similar_actors(
    snapshot: &DomainState,
    target_type: &EntityTypeId,
    weights: &AffinityWeights,
    actor: &ActorId,
    exec: Exec,
) -> Result<Vec<Neighbor>, EngineError> {
    let interactions = snapshot.interactions();
    let own = weights.row(interactions.row(actor, target_type));
    if own.is_empty() {
        return Err(EngineError::ColdStartActor(actor.to_string()));
    }
    let own_norm = own.iter().map(|(_, a)| a * a).sum::<f64>().sqrt();

    // dot products accumulate in ascending target order
    let mut dots: HashMap<&ActorId, f64> = HashMap::new();
    for (target, a) in &own {
        checkpoint();
        let Some(column) = interactions.column(target_type, target) else { continue };
        for (other, contribs) in column.iter() {
            if other == actor {
                continue;
            }
            let b = weights.affinity(contribs);
            if b != 0.0 {
                *dots.entry(other).or_insert(0.0) += a * b;
            }
        }
    }
    let mut co_raters: Vec<(&ActorId, f64)> = dots.into_iter().collect();
    co_raters.sort_unstable_by(|a, b| a.0.cmp(b.0));

    let mut neighbors = exec.filter_map(&co_raters, |(other, dot)| {
        checkpoint();
        let norm = weights.row_norm(interactions.row(other, target_type));
        let similarity = dot / (own_norm * norm);
        (similarity > 0.0).then(|| Neighbor { actor: (*other).clone(), similarity })
    });
    neighbors.sort_by(neighbor_order);
    Ok(neighbors)
}

fn neighbor_order(a: &Neighbor, b: &Neighbor) -> Ordering {
    b.similarity.total_cmp(&a.similarity).then_with(|| a.actor.cmp(&b.actor))
}

/// User-based kNN scores over targets the actor has no affinity with:
/// `score(i) = Σ_{v∈N} sim(u,v)·a(v,i) / Σ_{v∈N} sim(u,v)`. Unranked,
/// positive only.
pub fn collaborative_scores(
    snapshot: &DomainState,
    target_type: &EntityTypeId,
    weights: &AffinityWeights,
    neighbors_k: usize,
    actor: &ActorId,
    exec: Exec,
) -> Result<Vec<Scored>, EngineError> {
    let interactions = snapshot.interactions();
    let mut neighbors = similar_actors(snapshot, target_type, weights, actor, exec)?;
    neighbors.truncate(neighbors_k);
    let own = weights.row(interactions.row(actor, target_type));

    let total_similarity: f64 = neighbors.iter().map(|n| n.similarity).sum();
    let mut scores: HashMap<Arc<str>, f64> = HashMap::new();
    for n in &neighbors {
        checkpoint();
        let Some(row) = interactions.row(&n.actor, target_type) else { continue };
        for (target, contribs) in row.iter() {
            let b = weights.affinity(contribs);
            if b == 0.0 || lookup(&own, target) != 0.0 {
                continue;
            }
            *scores.entry(target.clone()).or_insert(0.0) += n.similarity * b;
        }
    }
    Ok(scores
        .into_iter()
        .map(|(id, s)| Scored { id, score: s / total_similarity })
        .filter(|s| s.score > 0.0)
        .collect())
}

#[allow(clippy::too_many_arguments)]
pub fn collaborative(
    snapshot: &DomainState,
    target_type: &EntityTypeId,
    weights: &AffinityWeights,
    neighbors_k: usize,
    actor: &ActorId,
    filters: &[PostFilter],
    k: usize,
    exec: Exec,
) -> Result<RankedList, EngineError> {
    let candidates = collaborative_scores(snapshot, target_type, weights, neighbors_k, actor, exec)?;
    finish(snapshot, target_type, candidates, filters, k)
}
