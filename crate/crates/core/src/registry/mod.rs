//! Domain configuration: system domains, entity schemas, interaction types and
//! recommendation scenarios, plus the rules that keep them consistent.

mod types;
mod validate;

pub use types::*;
pub use validate::{
    check_display_name, check_entity_type, check_interaction_type, check_post_filter, check_scenario, check_schema_extension,
    validate_domain, validate_registry, Violation,
};

use thiserror::Error;

use crate::ids::DomainId;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RegistryError {
    #[error("invalid name: {0}")]
    InvalidName(String),
    #[error("a system domain named {0:?} already exists")]
    DuplicateName(String),
    #[error("unknown system domain {0}")]
    UnknownDomain(DomainId),
    #[error("invalid attribute {name:?}: {reason}")]
    InvalidAttribute { name: String, reason: String },
    #[error("entity type {0:?} already exists")]
    DuplicateEntityType(String),
    #[error("unknown entity type {0:?}")]
    UnknownEntityType(String),
    #[error("interaction type {0:?} already exists")]
    DuplicateInteractionType(String),
    #[error("unknown interaction type {0:?}")]
    UnknownInteractionType(String),
    #[error("invalid interaction type {name:?}: {reason}")]
    InvalidInteractionType { name: String, reason: String },
    #[error("scenario {0:?} already exists")]
    DuplicateScenario(String),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("hybrid component {component:?} targets {found:?}, expected {expected:?}")]
    CrossDomainHybrid {
        component: String,
        expected: String,
        found: String,
    },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

impl RegistryError {
    /// Stable machine-readable name, used in HTTP error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            RegistryError::InvalidName(_) => "InvalidName",
            RegistryError::DuplicateName(_) => "DuplicateName",
            RegistryError::UnknownDomain(_) => "UnknownDomain",
            RegistryError::InvalidAttribute { .. } => "InvalidAttribute",
            RegistryError::DuplicateEntityType(_) => "DuplicateEntityType",
            RegistryError::UnknownEntityType(_) => "UnknownEntityType",
            RegistryError::DuplicateInteractionType(_) => "DuplicateInteractionType",
            RegistryError::UnknownInteractionType(_) => "UnknownInteractionType",
            RegistryError::InvalidInteractionType { .. } => "InvalidInteractionType",
            RegistryError::DuplicateScenario(_) => "DuplicateScenario",
            RegistryError::UnknownScenario(_) => "UnknownScenario",
            RegistryError::CrossDomainHybrid { .. } => "CrossDomainHybrid",
            RegistryError::InvalidWeights(_) => "InvalidWeights",
            RegistryError::InvalidScenario(_) => "InvalidScenario",
        }
    }
}
