//! Scenario serving: request validation, algorithm dispatch with cold-start
//! fallback, and per-domain worker pools.

mod dispatch;
mod load;
mod pool;

pub use dispatch::{fallback_weights, run_scenario, run_scenario_at_depth, Outcome, COMPONENT_DEPTH};
pub use load::{percentile, serve_isolated, LoadProfile, LoadReport};
pub use pool::{Gateway, GatewayOptions};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::AttributeValue;
use crate::engines::EngineError;
use crate::ids::ScenarioId;

pub const DEFAULT_K: usize = 10;
pub const MAX_K: usize = 100;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RecommendationRequest {
    #[serde(default)]
    pub user_id: Option<String>,
    #[serde(default)]
    pub session_id: Option<String>,
    #[serde(default, alias = "contextItemId")]
    pub item_id: Option<String>,
    #[serde(default)]
    pub k: Option<usize>,
}

impl RecommendationRequest {
    pub fn for_user(user: impl Into<String>) -> Self {
        Self { user_id: Some(user.into()), ..Self::default() }
    }

    pub fn for_session(session: impl Into<String>) -> Self {
        Self { session_id: Some(session.into()), ..Self::default() }
    }

    pub fn item(mut self, item: impl Into<String>) -> Self {
        self.item_id = Some(item.into());
        self
    }

    pub fn k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecommendedItem {
    pub id: String,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attributes: Option<BTreeMap<String, AttributeValue>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecommendationResponse {
    pub items: Vec<RecommendedItem>,
    pub scenario_id: ScenarioId,
    pub as_of_sequence: u64,
    pub fallback_used: bool,
    pub latency_ms: f64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ServeError {
    #[error("unknown system domain {0}")]
    UnknownDomain(String),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("audience violation: {0}")]
    AudienceViolation(String),
    #[error("missing context: {0}")]
    MissingContext(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("unknown entity {0:?}")]
    UnknownEntity(String),
    #[error("domain queue is full")]
    Busy,
    #[error("worker stopped before replying")]
    Unavailable,
    #[error(transparent)]
    Engine(EngineError),
}

impl ServeError {
    pub fn kind(&self) -> &'static str {
        match self {
            ServeError::UnknownDomain(_) => "UnknownDomain",
            ServeError::UnknownScenario(_) => "UnknownScenario",
            ServeError::AudienceViolation(_) => "AudienceViolation",
            ServeError::MissingContext(_) => "MissingContext",
            ServeError::InvalidRequest(_) => "InvalidRequest",
            ServeError::UnknownEntity(_) => "UnknownEntity",
            ServeError::Busy => "Busy",
            ServeError::Unavailable => "Unavailable",
            ServeError::Engine(e) => e.kind(),
        }
    }

    /// HTTP status code for this error.
    pub fn status(&self) -> u16 {
        match self {
            ServeError::UnknownDomain(_) | ServeError::UnknownScenario(_) | ServeError::UnknownEntity(_) => 404,
            ServeError::AudienceViolation(_) | ServeError::MissingContext(_) | ServeError::InvalidRequest(_) => 400,
            ServeError::Busy => 429,
            ServeError::Unavailable => 503,
            ServeError::Engine(_) => 500,
        }
    }
}

impl From<EngineError> for ServeError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::UnknownEntity(id) => ServeError::UnknownEntity(id),
            other => ServeError::Engine(other),
        }
    }
}
