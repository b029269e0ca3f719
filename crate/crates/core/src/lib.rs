//! Multi-domain recommendation platform core: domain registry, catalog
//! storage, content index, recommendation engines and the serving gateway.

pub mod catalog;
pub mod content;
pub mod engines;
pub mod exec;
pub mod gateway;
pub mod ids;
pub mod platform;
pub mod ranking;
pub mod registry;
pub mod sched;

pub use exec::Exec;
pub use platform::Platform;

use thiserror::Error;

/// Error type of the platform facade.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Registry(#[from] registry::RegistryError),
    #[error(transparent)]
    Catalog(#[from] catalog::CatalogError),
    #[error("storage error: {0}")]
    Storage(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Registry(e) => e.kind(),
            Error::Catalog(e) => e.kind(),
            Error::Storage(_) => "StorageError",
        }
    }
}
