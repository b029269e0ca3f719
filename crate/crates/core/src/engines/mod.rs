//! The recommendation algorithms: most popular, content-based, user-based
//! collaborative filtering, users-for-item, weighted hybrid, and the
//! post-filters shared by all of them.
//!
//! Every engine produces an unranked candidate set first; [`finish`] then
//! applies post-filters to the full set and only afterwards truncates, so a
//! filtered scenario still fills `k` slots whenever enough candidates pass.

mod affinity;
mod audience;
mod collaborative;
mod filters;
mod hybrid;
mod popular;

pub use affinity::AffinityWeights;
pub use audience::{audience_scores, users_for_item};
pub use collaborative::{collaborative, collaborative_scores, similar_actors, Neighbor};
pub use filters::{apply_post_filters, matches};
pub use hybrid::{hybrid, hybrid_scores, min_max};
pub use popular::{most_popular, popularity_scores};

use thiserror::Error;

use crate::catalog::DomainState;
use crate::content::{ContentError, CorpusKey};
use crate::exec::Exec;
use crate::ids::EntityTypeId;
use crate::ranking::{top_k, RankedList, Scored};
use crate::registry::PostFilter;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EngineError {
    #[error("actor {0} has no contributing interactions")]
    ColdStartActor(String),
    #[error("entity {0:?} has an empty content profile")]
    EmptyProfile(String),
    #[error("unknown entity {0:?}")]
    UnknownEntity(String),
    #[error("nobody has interacted with {0:?}")]
    NoAudience(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("filter does not fit the target schema: {0}")]
    FilterSchemaMismatch(String),
    #[error("misconfigured scenario: {0}")]
    Misconfigured(String),
}

impl EngineError {
    pub fn kind(&self) -> &'static str {
        match self {
            EngineError::ColdStartActor(_) => "ColdStartActor",
            EngineError::EmptyProfile(_) => "EmptyProfile",
            EngineError::UnknownEntity(_) => "UnknownEntity",
            EngineError::NoAudience(_) => "NoAudience",
            EngineError::InvalidWeights(_) => "InvalidWeights",
            EngineError::FilterSchemaMismatch(_) => "FilterSchemaMismatch",
            EngineError::Misconfigured(_) => "Misconfigured",
        }
    }
}

impl From<ContentError> for EngineError {
    fn from(e: ContentError) -> Self {
        match e {
            ContentError::EmptyProfile(id) => EngineError::EmptyProfile(id),
            ContentError::UnknownEntity(id) => EngineError::UnknownEntity(id),
            ContentError::NonTextAttribute(a) => EngineError::Misconfigured(format!("{a:?} is not free text")),
        }
    }
}

/// Filters the full candidate set, then ranks and truncates to `k`.
pub fn finish(
    snapshot: &DomainState,
    target_type: &EntityTypeId,
    candidates: Vec<Scored>,
    filters: &[PostFilter],
    k: usize,
) -> Result<RankedList, EngineError> {
    let kept = apply_post_filters(snapshot, target_type, candidates, filters)?;
    Ok(RankedList { items: top_k(kept, k), scenario_id: None, as_of_sequence: snapshot.sequence })
}

/// Content-based candidates: cosine similarity to the context entity.
pub fn content_scores(
    snapshot: &DomainState,
    key: &CorpusKey,
    context: &str,
    exec: Exec,
) -> Result<Vec<Scored>, EngineError> {
    let corpus = snapshot
        .corpus(key)
        .ok_or_else(|| EngineError::Misconfigured(format!("no corpus for {key:?}")))?;
    if snapshot.entity(&key.entity_type, context).is_none() {
        return Err(EngineError::UnknownEntity(context.to_string()));
    }
    Ok(corpus.similar_candidates(context, exec)?)
}

pub fn content_based(
    snapshot: &DomainState,
    key: &CorpusKey,
    context: &str,
    filters: &[PostFilter],
    k: usize,
    exec: Exec,
) -> Result<RankedList, EngineError> {
    let candidates = content_scores(snapshot, key, context, exec)?;
    finish(snapshot, &key.entity_type, candidates, filters, k)
}
