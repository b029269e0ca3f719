use std::collections::BTreeMap;

use chrono::{DateTime, NaiveDate};
use serde::{Deserialize, Serialize};

use super::CatalogError;
use crate::ids::EntityTypeId;
use crate::registry::{AttributeKind, EntitySchema};

pub const MAX_RECORD_BYTES: usize = 1 << 20;

/// A typed attribute value as it appears on the wire and in the log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttributeValue {
    Integer(i64),
    Real(f64),
    Text(String),
    List(Vec<String>),
}

impl AttributeValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            AttributeValue::Integer(i) => Some(*i as f64),
            AttributeValue::Real(r) => Some(*r),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntityRecord {
    #[serde(rename = "entity_type")]
    pub entity_type_id: EntityTypeId,
    pub entity_id: String,
    pub values: BTreeMap<String, AttributeValue>,
    #[serde(rename = "seq")]
    pub sequence: u64,
}

pub(crate) fn check_id(id: &str) -> Result<(), String> {
    if id.is_empty() || id.len() > 256 {
        return Err("ids must be 1..=256 bytes".into());
    }
    if id.chars().any(|c| c == '/' || c.is_control() || c.is_whitespace()) {
        return Err("ids must not contain '/', whitespace or control characters".into());
    }
    Ok(())
}

fn is_iso_date(s: &str) -> bool {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").is_ok() || DateTime::parse_from_rfc3339(s).is_ok()
}

fn violation(attribute: &str, reason: &str) -> CatalogError {
    CatalogError::SchemaViolation { attribute: attribute.to_string(), reason: reason.to_string() }
}

/// Checks `values` against `schema` and returns them in canonical form
/// (integers given for real-valued attributes become reals).
pub fn validate_values(
    schema: &EntitySchema,
    values: BTreeMap<String, AttributeValue>,
) -> Result<BTreeMap<String, AttributeValue>, CatalogError> {
    for attr in &schema.attributes {
        if attr.required && !values.contains_key(&attr.name) {
            return Err(violation(&attr.name, "required attribute missing"));
        }
    }
    let mut out = BTreeMap::new();
    for (name, value) in values {
        let Some(attr) = schema.attribute(&name) else {
            return Err(violation(&name, "unknown attribute"));
        };
        let value = match (attr.kind, value) {
            (AttributeKind::CategoricalSingle, v @ AttributeValue::Text(_)) => v,
            (AttributeKind::CategoricalSingle, _) => return Err(violation(&name, "expected string")),
            (AttributeKind::CategoricalMulti, v @ AttributeValue::List(_)) => v,
            (AttributeKind::CategoricalMulti, _) => return Err(violation(&name, "expected list")),
            (AttributeKind::FreeTextEnglish | AttributeKind::FreeTextGerman, v @ AttributeValue::Text(_)) => v,
            (AttributeKind::FreeTextEnglish | AttributeKind::FreeTextGerman, _) => {
                return Err(violation(&name, "expected text"))
            }
            (AttributeKind::NumericInteger, v @ AttributeValue::Integer(_)) => v,
            (AttributeKind::NumericInteger, _) => return Err(violation(&name, "expected integer")),
            (AttributeKind::NumericReal, AttributeValue::Integer(i)) => AttributeValue::Real(i as f64),
            (AttributeKind::NumericReal, AttributeValue::Real(r)) if r.is_finite() => AttributeValue::Real(r),
            (AttributeKind::NumericReal, _) => return Err(violation(&name, "expected finite number")),
            (AttributeKind::Date, AttributeValue::Text(s)) if is_iso_date(&s) => AttributeValue::Text(s),
            (AttributeKind::Date, _) => return Err(violation(&name, "expected ISO-8601 date")),
        };
        out.insert(name, value);
    }
    Ok(out)
}

pub fn encoded_size(values: &BTreeMap<String, AttributeValue>) -> usize {
    serde_json::to_vec(values).map_or(usize::MAX, |v| v.len())
}
