use std::collections::HashMap;
use std::sync::Arc;

use super::affinity::lookup;
use super::{finish, AffinityWeights, EngineError};
use crate::catalog::{DomainState, EntityRecord};
use crate::exec::Exec;
use crate::ids::{ActorId, EntityTypeId};
use crate::ranking::{RankedList, Scored};
use crate::registry::PostFilter;
use crate::sched::checkpoint;

/// Scores registered users for a context item:
/// `score(u) = Σ_{v: a(v,item)>0} cos(u,v)·a(v,item)` over users with no
/// affinity to the item yet. Unranked, positive only.
///
/// Evaluated as `score(u) = (1/‖u‖)·Σ_i a(u,i)·q_i` with
/// `q_i = Σ_v a(v,item)/‖v‖ · a(v,i)`, which costs one pass over the
/// raters' rows plus one over the candidates' rows instead of one cosine
/// per (candidate, rater) pair.
pub fn audience_scores(
    snapshot: &DomainState,
    user_type: &EntityTypeId,
    item_type: &EntityTypeId,
    weights: &AffinityWeights,
    item: &str,
    exec: Exec,
) -> Result<Vec<Scored>, EngineError> {
    if snapshot.entity(item_type, item).is_none() {
        return Err(EngineError::UnknownEntity(item.to_string()));
    }
    let interactions = snapshot.interactions();
    let raters: Vec<(&ActorId, f64)> = interactions
        .column(item_type, item)
        .map(|column| {
            column
                .iter()
                .map(|(v, c)| (v, weights.affinity(c)))
                .filter(|(_, a)| *a > 0.0)
                .collect()
        })
        .unwrap_or_default();
    if raters.is_empty() {
        return Err(EngineError::NoAudience(item.to_string()));
    }

    let partials = exec.map(&raters, |(v, a_item)| {
        checkpoint();
        let row = weights.row(interactions.row(v, item_type));
        let norm = row.iter().map(|(_, a)| a * a).sum::<f64>().sqrt();
        let scale = a_item / norm;
        row.into_iter().map(|(i, a)| (i, scale * a)).collect::<Vec<_>>()
    });
    let mut q: HashMap<Arc<str>, f64> = HashMap::new();
    for partial in partials {
        for (i, x) in partial {
            *q.entry(i).or_insert(0.0) += x;
        }
    }

    let users: Vec<&Arc<EntityRecord>> = snapshot.entities_of(user_type).collect();
    Ok(exec.filter_map(&users, |user| {
        checkpoint();
        let actor = ActorId::user(&user.entity_id);
        let row = weights.row(interactions.row(&actor, item_type));
        if row.is_empty() || lookup(&row, item) != 0.0 {
            return None;
        }
        let norm = row.iter().map(|(_, a)| a * a).sum::<f64>().sqrt();
        let dot: f64 = row.iter().map(|(i, a)| a * q.get(i).copied().unwrap_or(0.0)).sum();
        let score = dot / norm;
        (score > 0.0).then(|| Scored::new(&user.entity_id, score))
    }))
}

#[allow(clippy::too_many_arguments)]
pub fn users_for_item(
    snapshot: &DomainState,
    user_type: &EntityTypeId,
    item_type: &EntityTypeId,
    weights: &AffinityWeights,
    item: &str,
    filters: &[PostFilter],
    k: usize,
    exec: Exec,
) -> Result<RankedList, EngineError> {
    let candidates = audience_scores(snapshot, user_type, item_type, weights, item, exec)?;
    finish(snapshot, user_type, candidates, filters, k)
}
