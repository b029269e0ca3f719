use std::collections::BTreeMap;

use super::{RecommendationRequest, RecommendationResponse, RecommendedItem, ServeError, DEFAULT_K, MAX_K};
use crate::catalog::DomainState;
use crate::content::CorpusKey;
use crate::engines::{self, AffinityWeights, EngineError};
use crate::exec::Exec;
use crate::ids::{ActorId, EntityTypeId};
use crate::ranking::RankedList;
use crate::registry::{AlgorithmSpec, Audience, ContextKind, DomainConfig, InteractionSelection, ScenarioConfig};

/// Minimum depth at which hybrid components are evaluated before combination.
pub const COMPONENT_DEPTH: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub list: RankedList,
    pub fallback_used: bool,
}

struct Call<'a> {
    snapshot: &'a DomainState,
    actor: ActorId,
    item: Option<&'a str>,
    exec: Exec,
}

fn check_audience(audience: Audience, req: &RecommendationRequest) -> Result<ActorId, ServeError> {
    let user = req.user_id.as_deref().filter(|s| !s.is_empty());
    let session = req.session_id.as_deref().filter(|s| !s.is_empty());
    match (audience, user, session) {
        (Audience::Registered, Some(u), None) => Ok(ActorId::user(u)),
        (Audience::Registered, _, Some(_)) => {
            Err(ServeError::AudienceViolation("scenario serves registered users only; sessionId is not accepted".into()))
        }
        (Audience::Registered, None, None) => Err(ServeError::AudienceViolation("userId is required".into())),
        (Audience::Anonymous, None, Some(s)) => Ok(ActorId::session(s)),
        (Audience::Anonymous, Some(_), _) => {
            Err(ServeError::AudienceViolation("scenario serves anonymous sessions only; userId is not accepted".into()))
        }
        (Audience::Anonymous, None, None) => Err(ServeError::AudienceViolation("sessionId is required".into())),
        (Audience::Both, Some(u), _) => Ok(ActorId::user(u)),
        (Audience::Both, None, Some(s)) => Ok(ActorId::session(s)),
        (Audience::Both, None, None) => {
            Err(ServeError::AudienceViolation("userId or sessionId is required".into()))
        }
    }
}

/// Weights used when a scenario falls back to most-popular: the scenario's
/// own interaction subset if it has one, otherwise every interaction type
/// that targets the scenario's entity type, at default weights.
pub fn fallback_weights(config: &DomainConfig, scenario: &ScenarioConfig) -> Result<AffinityWeights, EngineError> {
    let selection = match scenario.algorithm.selection() {
        Some(selection) if !matches!(scenario.algorithm, AlgorithmSpec::UserForItem { .. }) => selection.clone(),
        _ => InteractionSelection::of(
            config
                .interaction_types
                .values()
                .filter(|t| t.target_entity_type == scenario.target_entity_type)
                .map(|t| t.name.clone()),
        ),
    };
    AffinityWeights::resolve(config, &selection)
}

fn fallback(call: &Call, scenario: &ScenarioConfig, k: usize) -> Result<Outcome, ServeError> {
    let weights = fallback_weights(&call.snapshot.config, scenario)?;
    let list = if weights.is_empty() {
        RankedList { items: Vec::new(), scenario_id: None, as_of_sequence: call.snapshot.sequence }
    } else {
        engines::most_popular(call.snapshot, &scenario.target_entity_type, &weights, &scenario.post_filters, k, call.exec)?
    };
    Ok(Outcome { list, fallback_used: true })
}

fn item_type_of(config: &DomainConfig, selection: &InteractionSelection) -> Result<EntityTypeId, EngineError> {
    selection
        .interaction_subset
        .iter()
        .next()
        .and_then(|name| config.interaction_types.get(name))
        .map(|t| t.target_entity_type.clone())
        .ok_or_else(|| EngineError::Misconfigured("empty interaction subset".into()))
}

fn require_item<'a>(call: &Call<'a>, scenario: &ScenarioConfig) -> Result<&'a str, ServeError> {
    call.item
        .ok_or_else(|| ServeError::MissingContext(format!("scenario {} needs itemId", scenario.scenario_id)))
}

fn execute(call: &Call, scenario: &ScenarioConfig, k: usize) -> Result<Outcome, ServeError> {
    let snapshot = call.snapshot;
    let config = &snapshot.config;
    let target = &scenario.target_entity_type;
    let filters = &scenario.post_filters;
    let direct = |list| Ok(Outcome { list, fallback_used: false });
    match &scenario.algorithm {
        AlgorithmSpec::MostPopular { selection } => {
            let weights = AffinityWeights::resolve(config, selection)?;
            direct(engines::most_popular(snapshot, target, &weights, filters, k, call.exec)?)
        }
        AlgorithmSpec::ContentBased { cbf_attributes } => {
            let item = require_item(call, scenario)?;
            let key = CorpusKey::new(target.clone(), cbf_attributes.iter().cloned());
            match engines::content_based(snapshot, &key, item, filters, k, call.exec) {
                Err(EngineError::EmptyProfile(_)) => fallback(call, scenario, k),
                other => direct(other?),
            }
        }
        AlgorithmSpec::Collaborative { selection, neighbors_k } => {
            let weights = AffinityWeights::resolve(config, selection)?;
            match engines::collaborative(snapshot, target, &weights, *neighbors_k, &call.actor, filters, k, call.exec) {
                Err(EngineError::ColdStartActor(_)) => fallback(call, scenario, k),
                other => direct(other?),
            }
        }
        AlgorithmSpec::UserForItem { selection } => {
            let item = require_item(call, scenario)?;
            let weights = AffinityWeights::resolve(config, selection)?;
            let item_type = item_type_of(config, selection)?;
            match engines::users_for_item(snapshot, target, &item_type, &weights, item, filters, k, call.exec) {
                Err(EngineError::NoAudience(_)) => direct(RankedList {
                    items: Vec::new(),
                    scenario_id: None,
                    as_of_sequence: snapshot.sequence,
                }),
                other => direct(other?),
            }
        }
        AlgorithmSpec::Hybrid { hybrid_components } => {
            let mut parts = Vec::with_capacity(hybrid_components.len());
            let mut fallback_used = false;
            for component in hybrid_components {
                let sub = config.scenario(component.scenario_id.as_str()).ok_or_else(|| {
                    EngineError::Misconfigured(format!("unknown component {}", component.scenario_id))
                })?;
                if sub.algorithm.is_hybrid() {
                    return Err(EngineError::Misconfigured("nested hybrid".into()).into());
                }
                let outcome = execute(call, sub, COMPONENT_DEPTH.max(k))?;
                fallback_used |= outcome.fallback_used;
                parts.push((outcome.list, component.weight));
            }
            let refs: Vec<(&RankedList, f64)> = parts.iter().map(|(l, w)| (l, *w)).collect();
            let candidates = engines::hybrid_scores(&refs)?;
            let list = engines::finish(snapshot, target, candidates, filters, k)?;
            Ok(Outcome { list, fallback_used })
        }
    }
}

/// Runs one scenario against an immutable snapshot. Pure: the same
/// snapshot and request always give the same ranking.
pub fn run_scenario(
    snapshot: &DomainState,
    scenario_id: &str,
    req: &RecommendationRequest,
    exec: Exec,
) -> Result<Outcome, ServeError> {
    let k = req.k.unwrap_or(DEFAULT_K);
    if !(1..=MAX_K).contains(&k) {
        return Err(ServeError::InvalidRequest(format!("k must be between 1 and {MAX_K}, got {k}")));
    }
    run_scenario_at_depth(snapshot, scenario_id, req, k, exec)
}

/// [`run_scenario`] with an explicit list depth that may exceed the public
/// cap on `k`; used by offline evaluation, which drops already-seen items
/// after ranking. `req.k` is ignored.
pub fn run_scenario_at_depth(
    snapshot: &DomainState,
    scenario_id: &str,
    req: &RecommendationRequest,
    depth: usize,
    exec: Exec,
) -> Result<Outcome, ServeError> {
    let k = depth;
    let scenario = snapshot
        .config
        .scenario(scenario_id)
        .ok_or_else(|| ServeError::UnknownScenario(scenario_id.to_string()))?;
    let actor = check_audience(scenario.audience, req)?;
    let item = req.item_id.as_deref().filter(|s| !s.is_empty());
    if scenario.context == ContextKind::ItemId && item.is_none() {
        return Err(ServeError::MissingContext(format!("scenario {scenario_id} needs itemId")));
    }
    let call = Call { snapshot, actor, item, exec };
    let mut outcome = execute(&call, scenario, k)?;
    outcome.list.scenario_id = Some(scenario.scenario_id.clone());
    outcome.list.as_of_sequence = snapshot.sequence;
    Ok(outcome)
}

/// Builds the wire response, echoing the scenario's configured attributes.
pub(crate) fn to_response(snapshot: &DomainState, scenario_id: &str, outcome: Outcome, latency_ms: f64) -> RecommendationResponse {
    let scenario = snapshot.config.scenario(scenario_id).expect("validated by run_scenario");
    let items = outcome
        .list
        .items
        .into_iter()
        .map(|s| {
            let attributes = (!scenario.echo_attributes.is_empty()).then(|| {
                let record = snapshot.entity(&scenario.target_entity_type, &s.id);
                scenario
                    .echo_attributes
                    .iter()
                    .filter_map(|name| Some((name.clone(), record?.values.get(name)?.clone())))
                    .collect::<BTreeMap<_, _>>()
            });
            RecommendedItem { id: s.id.to_string(), score: s.score, attributes }
        })
        .collect();
    RecommendationResponse {
        items,
        scenario_id: scenario.scenario_id.clone(),
        as_of_sequence: outcome.list.as_of_sequence,
        fallback_used: outcome.fallback_used,
        latency_ms,
    }
}
