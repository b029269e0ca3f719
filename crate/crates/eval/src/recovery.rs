//! Structural comparison of domain states, used to check crash recovery
//! against an uninterrupted reference run.

use uptrendz_core::catalog::DomainState;
use uptrendz_core::{Error, Platform};

use crate::movielens::Dataset;
use crate::walkthrough;

/// Compares everything that recovery must restore. Domain creation times
/// differ between runs and are ignored.
pub fn structural_diff(recovered: &DomainState, reference: &DomainState) -> Vec<String> {
    let mut diffs = Vec::new();
    let mut config = (*recovered.config).clone();
    config.domain.created_at = reference.config.domain.created_at;
    if config != *reference.config {
        diffs.push("configuration differs".to_string());
    }
    if recovered.sequence != reference.sequence {
        diffs.push(format!("sequence {} vs {}", recovered.sequence, reference.sequence));
    }
    if recovered.events() != reference.events() {
        diffs.push(format!("event logs differ ({} vs {} events)", recovered.events().len(), reference.events().len()));
    }
    if recovered.interactions() != reference.interactions() {
        diffs.push("interaction index differs".to_string());
    }
    let mut aligned = reference.clone();
    aligned.set_config(recovered.config.clone());
    if diffs.is_empty() && aligned != *recovered {
        diffs.push("entities or content index differ".to_string());
    }
    diffs
}

/// State of an in-memory walkthrough domain holding the catalog and the
/// first `events` ratings in file order.
pub fn reference_state(data: &Dataset, events: usize) -> Result<DomainState, Error> {
    let platform = Platform::in_memory();
    let d = walkthrough::configure(&platform)?;
    walkthrough::ingest_catalog(&platform, &d, data)?;
    walkthrough::ingest_ratings(&platform, &d, data.ratings.iter().take(events))?;
    Ok((*platform.snapshot(d.as_str())?).clone())
}
