//! Entity records and interaction events: validation, the per-domain
//! append-only log, and the in-memory state that snapshots read from.

mod event;
pub mod log;
mod record;
mod state;

pub use event::{validate_interaction, InteractionEvent, NewInteraction};
pub use record::{encoded_size, validate_values, AttributeValue, EntityRecord, MAX_RECORD_BYTES};
pub use state::{corpus_keys, Column, Contribs, DomainState, InteractionIndex, Row, Tally};

pub(crate) use record::check_id;

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::ids::DomainId;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CatalogError {
    #[error("unknown system domain {0}")]
    UnknownDomain(DomainId),
    #[error("unknown entity type {0:?}")]
    UnknownEntityType(String),
    #[error("invalid entity id: {0}")]
    InvalidEntityId(String),
    #[error("schema violation on {attribute:?}: {reason}")]
    SchemaViolation { attribute: String, reason: String },
    #[error("record of {0} bytes exceeds the 1 MiB limit")]
    PayloadTooLarge(usize),
    #[error("unknown interaction type {0:?}")]
    UnknownInteractionType(String),
    #[error("actor mode violation: {0}")]
    ActorModeViolation(String),
    #[error("explicitness violation: {0}")]
    ExplicitnessViolation(String),
    #[error("timestamp violation: {0}")]
    TimestampViolation(String),
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("unknown {entity_type} {id:?}")]
    UnknownTarget { entity_type: String, id: String },
    #[error("log corrupt at byte {offset}: {reason}")]
    CorruptLog { offset: u64, reason: String },
    #[error("storage error: {0}")]
    Io(String),
}

impl CatalogError {
    pub fn kind(&self) -> &'static str {
        match self {
            CatalogError::UnknownDomain(_) => "UnknownDomain",
            CatalogError::UnknownEntityType(_) => "UnknownEntityType",
            CatalogError::InvalidEntityId(_) => "InvalidEntityId",
            CatalogError::SchemaViolation { .. } => "SchemaViolation",
            CatalogError::PayloadTooLarge(_) => "PayloadTooLarge",
            CatalogError::UnknownInteractionType(_) => "UnknownInteractionType",
            CatalogError::ActorModeViolation(_) => "ActorModeViolation",
            CatalogError::ExplicitnessViolation(_) => "ExplicitnessViolation",
            CatalogError::TimestampViolation(_) => "TimestampViolation",
            CatalogError::InvalidEvent(_) => "InvalidEvent",
            CatalogError::UnknownTarget { .. } => "UnknownTarget",
            CatalogError::CorruptLog { .. } => "CorruptLog",
            CatalogError::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for CatalogError {
    fn from(e: std::io::Error) -> Self {
        CatalogError::Io(e.to_string())
    }
}

/// Acknowledgment of an accepted write.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ack {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entity_id: Option<String>,
    pub sequence: u64,
}

/// Immutable, sequence-stamped read view of one domain.
pub type Snapshot = Arc<DomainState>;
