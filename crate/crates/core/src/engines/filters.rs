use super::EngineError;
use crate::catalog::{AttributeValue, DomainState, EntityRecord};
use crate::ids::EntityTypeId;
use crate::ranking::Scored;
use crate::registry::PostFilter;

/// Whether one record passes one filter. A missing attribute passes
/// `Excludes` and fails `Contains` and `NumericRange`.
pub fn matches(record: Option<&EntityRecord>, filter: &PostFilter) -> bool {
    let value = record.and_then(|r| r.values.get(filter.attribute()));
    let contains = |needle: &str| match value {
        Some(AttributeValue::Text(s)) => s == needle,
        Some(AttributeValue::List(xs)) => xs.iter().any(|x| x == needle),
        _ => false,
    };
    match filter {
        PostFilter::Contains { value: needle, .. } => contains(needle),
        PostFilter::Excludes { value: needle, .. } => !contains(needle),
        PostFilter::NumericRange { min, max, .. } => value
            .and_then(AttributeValue::as_f64)
            .is_some_and(|v| *min <= v && v <= *max),
    }
}

/// Keeps the candidates that satisfy every filter.
pub fn apply_post_filters(
    snapshot: &DomainState,
    target_type: &EntityTypeId,
    candidates: Vec<Scored>,
    filters: &[PostFilter],
) -> Result<Vec<Scored>, EngineError> {
    if filters.is_empty() {
        return Ok(candidates);
    }
    let schema = snapshot
        .config
        .schema(target_type.as_str())
        .ok_or_else(|| EngineError::Misconfigured(format!("unknown entity type {target_type}")))?;
    for filter in filters {
        crate::registry::check_post_filter(schema, filter).map_err(EngineError::FilterSchemaMismatch)?;
    }
    Ok(candidates
        .into_iter()
        .filter(|c| {
            let record = snapshot.entity(target_type, &c.id).map(|r| &**r);
            filters.iter().all(|f| matches(record, f))
        })
        .collect())
}
