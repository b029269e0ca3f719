use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::record::check_id;
use super::CatalogError;
use crate::ids::{ActorId, EntityTypeId};
use crate::registry::{ActorMode, DomainConfig, Explicitness, InteractionTypeConfig};

/// Interaction as submitted to the data plane. Exactly one of `user_id` and
/// `session_id` names the actor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewInteraction {
    pub interaction_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    pub target_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
}

impl NewInteraction {
    pub fn by_user(kind: &str, user: &str, target: &str) -> Self {
        Self {
            interaction_type: kind.into(),
            user_id: Some(user.into()),
            session_id: None,
            target_id: target.into(),
            value: None,
            timestamp: None,
        }
    }

    pub fn by_session(kind: &str, session: &str, target: &str) -> Self {
        Self { user_id: None, session_id: Some(session.into()), ..Self::by_user(kind, "", target) }
    }

    pub fn value(mut self, value: f64) -> Self {
        self.value = Some(value);
        self
    }

    pub fn at(mut self, timestamp: DateTime<Utc>) -> Self {
        self.timestamp = Some(timestamp);
        self
    }
}

/// A stored interaction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionEvent {
    #[serde(rename = "seq")]
    pub sequence: u64,
    pub interaction_type: String,
    pub actor: ActorId,
    pub target_type: EntityTypeId,
    pub target_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
}

fn actor_of(new: &NewInteraction, ty: &InteractionTypeConfig) -> Result<ActorId, CatalogError> {
    let actor = match (&new.user_id, &new.session_id) {
        (Some(u), None) => ActorId::user(u),
        (None, Some(s)) => ActorId::session(s),
        _ => {
            return Err(CatalogError::InvalidEvent(
                "exactly one of user_id and session_id is required".into(),
            ))
        }
    };
    check_id(actor.raw()).map_err(CatalogError::InvalidEvent)?;
    let allowed = match ty.actor_mode {
        ActorMode::RegisteredOnly => actor.is_registered(),
        ActorMode::AnonymousOnly => !actor.is_registered(),
        ActorMode::Both => true,
    };
    if !allowed {
        return Err(CatalogError::ActorModeViolation(format!(
            "{} accepts {:?} actors, got {}",
            ty.name, ty.actor_mode, actor
        )));
    }
    Ok(actor)
}

/// Checks an interaction against its type configuration. Returns the event
/// with `sequence` left at 0.
pub fn validate_interaction(
    config: &DomainConfig,
    new: NewInteraction,
    target_exists: impl Fn(&EntityTypeId, &str) -> bool,
    now: DateTime<Utc>,
) -> Result<InteractionEvent, CatalogError> {
    let ty = config
        .interaction_types
        .get(&new.interaction_type)
        .ok_or_else(|| CatalogError::UnknownInteractionType(new.interaction_type.clone()))?;
    let actor = actor_of(&new, ty)?;
    match (ty.explicitness, new.value) {
        (Explicitness::Explicit, Some(v)) if v.is_finite() => {}
        (Explicitness::Explicit, Some(_)) => {
            return Err(CatalogError::ExplicitnessViolation(format!("{}: value must be finite", ty.name)))
        }
        (Explicitness::Explicit, None) => {
            return Err(CatalogError::ExplicitnessViolation(format!("{} requires a value", ty.name)))
        }
        (Explicitness::Implicit, Some(_)) => {
            return Err(CatalogError::ExplicitnessViolation(format!("{} is implicit and takes no value", ty.name)))
        }
        (Explicitness::Implicit, None) => {}
    }
    let timestamp = match (ty.track_timestamp, new.timestamp) {
        (true, Some(t)) => Some(t),
        (true, None) => Some(now),
        (false, None) => None,
        (false, Some(_)) => {
            return Err(CatalogError::TimestampViolation(format!(
                "{} does not track timestamps",
                ty.name
            )))
        }
    };
    if !target_exists(&ty.target_entity_type, &new.target_id) {
        return Err(CatalogError::UnknownTarget {
            entity_type: ty.target_entity_type.to_string(),
            id: new.target_id,
        });
    }
    Ok(InteractionEvent {
        sequence: 0,
        interaction_type: ty.name.clone(),
        actor,
        target_type: ty.target_entity_type.clone(),
        target_id: new.target_id,
        value: new.value,
        timestamp,
    })
}
