use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::types::*;
use super::RegistryError;
use crate::ids::{slugify, DomainId, EntityTypeId};

fn valid_identifier(name: &str) -> bool {
    (1..=64).contains(&name.len()) && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

pub fn check_display_name(name: &str) -> Result<(), RegistryError> {
    if name.trim().is_empty() {
        return Err(RegistryError::InvalidName("name must not be empty".into()));
    }
    if name.chars().count() > 128 {
        return Err(RegistryError::InvalidName("name longer than 128 characters".into()));
    }
    Ok(())
}

fn check_attributes<'a>(
    existing: impl IntoIterator<Item = &'a AttributeSpec>,
    added: &[AttributeSpec],
) -> Result<(), RegistryError> {
    let mut seen: BTreeSet<&str> = existing.into_iter().map(|a| a.name.as_str()).collect();
    if seen.len() + added.len() > MAX_ATTRIBUTES {
        return Err(RegistryError::InvalidAttribute {
            name: added.last().map(|a| a.name.clone()).unwrap_or_default(),
            reason: format!("more than {MAX_ATTRIBUTES} attributes"),
        });
    }
    for attr in added {
        if !valid_identifier(&attr.name) {
            return Err(RegistryError::InvalidAttribute {
                name: attr.name.clone(),
                reason: "name must match [A-Za-z0-9_]{1,64}".into(),
            });
        }
        if !seen.insert(&attr.name) {
            return Err(RegistryError::InvalidAttribute {
                name: attr.name.clone(),
                reason: "duplicate".into(),
            });
        }
    }
    Ok(())
}

/// Validates a new entity type and returns the schema it materializes as.
pub fn check_entity_type(
    config: &DomainConfig,
    new: &NewEntityType,
) -> Result<EntitySchema, RegistryError> {
    check_display_name(&new.name)?;
    let slug = slugify(&new.name);
    if slug.is_empty() {
        return Err(RegistryError::InvalidName(format!(
            "{:?} has no URL-safe characters",
            new.name
        )));
    }
    let entity_type_id = EntityTypeId::new(&slug);
    if config.entity_types.contains_key(&entity_type_id) {
        return Err(RegistryError::DuplicateEntityType(slug));
    }
    check_attributes([], &new.attributes)?;
    Ok(EntitySchema {
        domain_id: config.domain.id.clone(),
        upload_endpoint: upload_endpoint(&config.domain.id, &entity_type_id),
        entity_type_id,
        entity_kind: new.entity_kind,
        name: new.name.clone(),
        attributes: new.attributes.clone(),
    })
}

/// Schemas only grow: new attributes are appended and must be optional so
/// that records ingested earlier stay valid.
pub fn check_schema_extension(
    schema: &EntitySchema,
    added: &[AttributeSpec],
) -> Result<EntitySchema, RegistryError> {
    check_attributes(&schema.attributes, added)?;
    if let Some(attr) = added.iter().find(|a| a.required) {
        return Err(RegistryError::InvalidAttribute {
            name: attr.name.clone(),
            reason: "attributes added to an existing schema must be optional".into(),
        });
    }
    let mut extended = schema.clone();
    extended.attributes.extend(added.iter().cloned());
    Ok(extended)
}

pub fn check_interaction_type(
    config: &DomainConfig,
    new: &NewInteractionType,
) -> Result<InteractionTypeConfig, RegistryError> {
    if !valid_identifier(&new.name) {
        return Err(RegistryError::InvalidInteractionType {
            name: new.name.clone(),
            reason: "name must match [A-Za-z0-9_]{1,64}".into(),
        });
    }
    if config.interaction_types.contains_key(&new.name) {
        return Err(RegistryError::DuplicateInteractionType(new.name.clone()));
    }
    if !(new.default_weight.is_finite() && new.default_weight >= 0.0) {
        return Err(RegistryError::InvalidInteractionType {
            name: new.name.clone(),
            reason: "default_weight must be finite and non-negative".into(),
        });
    }
    let schema = config
        .schema(new.target_entity_type.as_str())
        .ok_or_else(|| RegistryError::UnknownEntityType(new.target_entity_type.to_string()))?;
    let expected_kind = match new.target {
        InteractionTarget::UserItem => EntityKind::Item,
        InteractionTarget::UserUser => EntityKind::User,
    };
    if schema.entity_kind != expected_kind {
        return Err(RegistryError::InvalidInteractionType {
            name: new.name.clone(),
            reason: format!(
                "{:?} interactions must target a {:?} entity type",
                new.target, expected_kind
            ),
        });
    }
    Ok(InteractionTypeConfig {
        domain_id: config.domain.id.clone(),
        name: new.name.clone(),
        explicitness: new.explicitness,
        default_weight: new.default_weight,
        actor_mode: new.actor_mode,
        track_timestamp: new.track_timestamp,
        target: new.target,
        target_entity_type: new.target_entity_type.clone(),
    })
}

fn invalid(msg: impl Into<String>) -> RegistryError {
    RegistryError::InvalidScenario(msg.into())
}

/// Checks an interaction selection; returns the entity type its interactions
/// target (all members must agree).
fn check_selection(
    config: &DomainConfig,
    selection: &InteractionSelection,
) -> Result<EntityTypeId, RegistryError> {
    if selection.interaction_subset.is_empty() {
        return Err(invalid("interaction_subset must not be empty"));
    }
    let mut target: Option<&EntityTypeId> = None;
    for name in &selection.interaction_subset {
        let ty = config
            .interaction_types
            .get(name)
            .ok_or_else(|| RegistryError::UnknownInteractionType(name.clone()))?;
        match target {
            None => target = Some(&ty.target_entity_type),
            Some(t) if *t != ty.target_entity_type => {
                return Err(invalid(format!(
                    "interaction types target different entity types ({t} and {})",
                    ty.target_entity_type
                )))
            }
            Some(_) => {}
        }
    }
    for (name, weight) in &selection.interaction_weights {
        if !selection.interaction_subset.contains(name) {
            return Err(invalid(format!("weight given for {name:?} outside interaction_subset")));
        }
        if !(weight.is_finite() && *weight >= 0.0) {
            return Err(RegistryError::InvalidWeights(format!(
                "weight for {name:?} must be finite and non-negative"
            )));
        }
    }
    Ok(target.expect("non-empty subset").clone())
}

fn expect_context(got: ContextKind, want: ContextKind, variant: &str) -> Result<(), RegistryError> {
    if got != want {
        return Err(invalid(format!("{variant} scenarios take context {want:?}, got {got:?}")));
    }
    Ok(())
}

pub fn check_post_filter(schema: &EntitySchema, filter: &PostFilter) -> Result<(), String> {
    let attr = schema
        .attribute(filter.attribute())
        .ok_or_else(|| format!("unknown filter attribute {:?}", filter.attribute()))?;
    match filter {
        PostFilter::Contains { .. } | PostFilter::Excludes { .. } if !attr.kind.is_categorical() => {
            Err(format!("{:?} is not categorical", attr.name))
        }
        PostFilter::NumericRange { .. } if !attr.kind.is_numeric() => {
            Err(format!("{:?} is not numeric", attr.name))
        }
        PostFilter::NumericRange { min, max, .. } if !(min.is_finite() && max.is_finite() && min <= max) => {
            Err(format!("invalid range [{min}, {max}] on {:?}", attr.name))
        }
        _ => Ok(()),
    }
}

/// Context the hybrid itself requires: an item if any component needs one,
/// otherwise the caller if any component needs one.
fn hybrid_context(components: &[&ScenarioConfig]) -> ContextKind {
    if components.iter().any(|c| c.context == ContextKind::ItemId) {
        ContextKind::ItemId
    } else if components.iter().any(|c| c.context == ContextKind::UserId) {
        ContextKind::UserId
    } else {
        ContextKind::None
    }
}

/// Validates a new scenario against the domain and returns the stored form.
pub fn check_scenario(
    config: &DomainConfig,
    new: &NewScenario,
) -> Result<ScenarioConfig, RegistryError> {
    check_display_name(&new.name)?;
    let id = match &new.id {
        Some(id) => {
            if !crate::ids::is_url_token(id) {
                return Err(RegistryError::InvalidName(format!("{id:?} is not a URL-safe id")));
            }
            id.clone()
        }
        None => slugify(&new.name),
    };
    if id.is_empty() {
        return Err(RegistryError::InvalidName(format!("{:?} has no URL-safe characters", new.name)));
    }
    let scenario_id = crate::ids::ScenarioId::new(&id);
    if config.scenarios.contains_key(&scenario_id) {
        return Err(RegistryError::DuplicateScenario(id));
    }
    let schema = config
        .schema(new.target_entity_type.as_str())
        .ok_or_else(|| RegistryError::UnknownEntityType(new.target_entity_type.to_string()))?;

    match &new.algorithm {
        AlgorithmSpec::MostPopular { selection } => {
            let target = check_selection(config, selection)?;
            if target != new.target_entity_type {
                return Err(invalid(format!(
                    "interactions target {target}, scenario recommends {}",
                    new.target_entity_type
                )));
            }
            expect_context(new.context, ContextKind::None, "MostPopular")?;
        }
        AlgorithmSpec::Collaborative { selection, neighbors_k } => {
            let target = check_selection(config, selection)?;
            if target != new.target_entity_type {
                return Err(invalid(format!(
                    "interactions target {target}, scenario recommends {}",
                    new.target_entity_type
                )));
            }
            if *neighbors_k == 0 {
                return Err(invalid("neighbors_k must be positive"));
            }
            expect_context(new.context, ContextKind::UserId, "Collaborative")?;
        }
        AlgorithmSpec::UserForItem { selection } => {
            let item_type = check_selection(config, selection)?;
            if schema.entity_kind != EntityKind::User {
                return Err(invalid("UserForItem scenarios must recommend a User entity type"));
            }
            if config.schema(item_type.as_str()).map(|s| s.entity_kind) != Some(EntityKind::Item) {
                return Err(invalid("UserForItem interactions must be user-item interactions"));
            }
            expect_context(new.context, ContextKind::ItemId, "UserForItem")?;
        }
        AlgorithmSpec::ContentBased { cbf_attributes } => {
            if cbf_attributes.is_empty() {
                return Err(invalid("cbf_attributes must not be empty"));
            }
            for name in cbf_attributes {
                match schema.attribute(name) {
                    Some(a) if a.kind.is_free_text() => {}
                    Some(_) => return Err(invalid(format!("{name:?} is not a free-text attribute"))),
                    None => return Err(invalid(format!("unknown attribute {name:?}"))),
                }
            }
            expect_context(new.context, ContextKind::ItemId, "ContentBased")?;
        }
        AlgorithmSpec::Hybrid { hybrid_components } => {
            if hybrid_components.len() < 2 {
                return Err(invalid("a hybrid needs at least two components"));
            }
            let mut resolved = Vec::with_capacity(hybrid_components.len());
            for component in hybrid_components {
                let c = config
                    .scenario(component.scenario_id.as_str())
                    .ok_or_else(|| RegistryError::UnknownScenario(component.scenario_id.to_string()))?;
                if c.algorithm.is_hybrid() {
                    return Err(invalid(format!(
                        "component {} is itself a hybrid",
                        component.scenario_id
                    )));
                }
                if c.target_entity_type != new.target_entity_type {
                    return Err(RegistryError::CrossDomainHybrid {
                        component: component.scenario_id.to_string(),
                        expected: new.target_entity_type.to_string(),
                        found: c.target_entity_type.to_string(),
                    });
                }
                if !(component.weight.is_finite() && component.weight >= 0.0) {
                    return Err(RegistryError::InvalidWeights(format!(
                        "weight of {} must be finite and non-negative",
                        component.scenario_id
                    )));
                }
                resolved.push(c);
            }
            if hybrid_components.iter().all(|c| c.weight == 0.0) {
                return Err(RegistryError::InvalidWeights("all hybrid weights are zero".into()));
            }
            expect_context(new.context, hybrid_context(&resolved), "this Hybrid")?;
        }
    }

    for filter in &new.post_filters {
        check_post_filter(schema, filter).map_err(invalid)?;
    }
    for name in &new.echo_attributes {
        if schema.attribute(name).is_none() {
            return Err(invalid(format!("unknown echo attribute {name:?}")));
        }
    }

    Ok(ScenarioConfig {
        domain_id: config.domain.id.clone(),
        recommendation_endpoint: recommendation_endpoint(&config.domain.id, &scenario_id),
        scenario_id,
        name: new.name.clone(),
        target_entity_type: new.target_entity_type.clone(),
        audience: new.audience,
        context: new.context,
        algorithm: new.algorithm.clone(),
        post_filters: new.post_filters.clone(),
        echo_attributes: new.echo_attributes.clone(),
    })
}

/// One inconsistency found by [`validate_registry`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "violation")]
pub enum Violation {
    DanglingReference { domain: String, owner: String, reference: String },
    Duplicate { what: String },
    CrossDomainHybrid { domain: String, scenario: String, component: String },
    Invalid { domain: String, owner: String, reason: String },
}

/// Full consistency scan over stored configuration for one domain.
pub fn validate_domain(config: &DomainConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let d = config.domain.id.to_string();
    let dangling = |owner: String, reference: String| Violation::DanglingReference {
        domain: d.clone(),
        owner,
        reference,
    };
    let bad = |owner: String, reason: String| Violation::Invalid { domain: d.clone(), owner, reason };

    if config.domain.storage_namespace.is_empty() {
        out.push(bad("domain".into(), "empty storage namespace".into()));
    }

    for (id, schema) in &config.entity_types {
        let owner = format!("entity type {id}");
        if schema.entity_type_id != *id {
            out.push(bad(owner.clone(), "key does not match entity_type_id".into()));
        }
        if schema.domain_id != config.domain.id {
            out.push(dangling(owner.clone(), format!("domain {}", schema.domain_id)));
        }
        if schema.upload_endpoint != upload_endpoint(&config.domain.id, id) {
            out.push(bad(owner.clone(), "upload endpoint is not derived from ids".into()));
        }
        if let Err(e) = check_attributes([], &schema.attributes) {
            out.push(bad(owner, e.to_string()));
        }
    }

    for (name, ty) in &config.interaction_types {
        let owner = format!("interaction type {name}");
        if ty.name != *name {
            out.push(bad(owner.clone(), "key does not match name".into()));
        }
        if config.schema(ty.target_entity_type.as_str()).is_none() {
            out.push(dangling(owner.clone(), format!("entity type {}", ty.target_entity_type)));
        }
        if !(ty.default_weight.is_finite() && ty.default_weight >= 0.0) {
            out.push(bad(owner, "default_weight must be finite and non-negative".into()));
        }
    }

    for (id, scenario) in &config.scenarios {
        let owner = format!("scenario {id}");
        if scenario.scenario_id != *id {
            out.push(bad(owner.clone(), "key does not match scenario_id".into()));
        }
        let schema = config.schema(scenario.target_entity_type.as_str());
        if schema.is_none() {
            out.push(dangling(owner.clone(), format!("entity type {}", scenario.target_entity_type)));
        }
        if let Some(selection) = scenario.algorithm.selection() {
            for name in &selection.interaction_subset {
                if !config.interaction_types.contains_key(name) {
                    out.push(dangling(owner.clone(), format!("interaction type {name}")));
                }
            }
        }
        match &scenario.algorithm {
            AlgorithmSpec::Hybrid { hybrid_components } => {
                for c in hybrid_components {
                    match config.scenario(c.scenario_id.as_str()) {
                        None => out.push(dangling(owner.clone(), format!("scenario {}", c.scenario_id))),
                        Some(other) if other.algorithm.is_hybrid() => {
                            out.push(bad(owner.clone(), format!("nested hybrid {}", c.scenario_id)))
                        }
                        Some(other) if other.target_entity_type != scenario.target_entity_type => {
                            out.push(Violation::CrossDomainHybrid {
                                domain: d.clone(),
                                scenario: id.to_string(),
                                component: c.scenario_id.to_string(),
                            })
                        }
                        Some(_) => {}
                    }
                }
                if hybrid_components.iter().all(|c| c.weight == 0.0) {
                    out.push(bad(owner.clone(), "all hybrid weights are zero".into()));
                }
            }
            AlgorithmSpec::ContentBased { cbf_attributes } => {
                if let Some(schema) = schema {
                    for name in cbf_attributes {
                        if !schema.attribute(name).is_some_and(|a| a.kind.is_free_text()) {
                            out.push(bad(owner.clone(), format!("{name:?} is not a free-text attribute")));
                        }
                    }
                }
            }
            _ => {}
        }
        if let Some(schema) = schema {
            for filter in &scenario.post_filters {
                if let Err(reason) = check_post_filter(schema, filter) {
                    out.push(bad(owner.clone(), reason));
                }
            }
        }
    }
    out
}

/// Scans every domain plus the cross-domain uniqueness rules.
pub fn validate_registry<'a>(domains: impl IntoIterator<Item = &'a DomainConfig>) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut ids: BTreeMap<&DomainId, usize> = BTreeMap::new();
    let mut names: BTreeMap<&str, usize> = BTreeMap::new();
    let mut namespaces: BTreeMap<&str, usize> = BTreeMap::new();
    for config in domains {
        *ids.entry(&config.domain.id).or_default() += 1;
        *names.entry(&config.domain.name).or_default() += 1;
        *namespaces.entry(&config.domain.storage_namespace).or_default() += 1;
        out.extend(validate_domain(config));
    }
    for (id, n) in ids {
        if n > 1 {
            out.push(Violation::Duplicate { what: format!("domain id {id}") });
        }
    }
    for (name, n) in names {
        if n > 1 {
            out.push(Violation::Duplicate { what: format!("domain name {name:?}") });
        }
    }
    for (ns, n) in namespaces {
        if n > 1 {
            out.push(Violation::Duplicate { what: format!("storage namespace {ns:?}") });
        }
    }
    out
}
