//! Brute-force reference implementations of every engine, checked against
//! the platform on small random instances.
//!
//! The oracle works from the instance description alone (entities, raw
//! events, scenario parameters) with dense matrices and naive loops; it
//! never reads the platform's indexes.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use uptrendz_core::catalog::{AttributeValue, DomainState, NewInteraction};
use uptrendz_core::content::{idf, tokenize};
use uptrendz_core::gateway::{run_scenario, Outcome, RecommendationRequest, ServeError, COMPONENT_DEPTH};
use uptrendz_core::ids::EntityTypeId;
use uptrendz_core::registry::{
    ActorMode, AlgorithmSpec, AttributeKind, AttributeSpec, Audience, ContextKind, EntityKind, Explicitness,
    HybridComponent, InteractionSelection, InteractionTarget, Language, NewEntityType, NewInteractionType,
    NewScenario, PostFilter,
};
use uptrendz_core::{Exec, Platform};

pub const TOLERANCE: f64 = 1e-9;
pub const MAX_ACTORS: usize = 10;
pub const MAX_ITEMS: usize = 12;
pub const MAX_TYPES: usize = 3;

const ITEM: &str = "item";
const USER: &str = "user";
const WORDS: [&str; 14] =
    ["space", "war", "garden", "love", "story", "the", "night", "dead", "toy", "star", "a", "of", "planet", "river"];
const TAGS: [&str; 3] = ["red", "green", "blue"];
const KINDS: [&str; 2] = ["x", "y"];
const SEGMENTS: [&str; 2] = ["p", "q"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypeSpec {
    pub name: String,
    pub explicit: bool,
    pub default_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ItemSpec {
    pub id: String,
    pub title: Option<String>,
    pub tags: Vec<String>,
    pub kind: Option<String>,
    pub price: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UserSpec {
    pub id: String,
    pub age: Option<i64>,
    pub segment: Option<String>,
}

/// An interaction party: a registered user id or a session token.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Actor {
    User(String),
    Session(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventSpec {
    pub kind: usize,
    pub actor: Actor,
    pub item: usize,
    pub value: Option<f64>,
}

/// Interaction weights of one scenario, indexed like the instance's types;
/// `None` marks a type outside the selection.
pub type Weights = Vec<Option<f64>>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Algo {
    Popular { weights: Weights },
    Collaborative { weights: Weights, neighbors_k: usize },
    Content,
    Audience { weights: Weights },
    Hybrid { parts: Vec<(usize, f64)> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioSpec {
    pub id: String,
    pub algo: Algo,
    pub filters: Vec<PostFilter>,
    /// Type-level overrides actually configured, for rebuilding the
    /// selection on the platform.
    pub overrides: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Instance {
    pub seed: u64,
    pub types: Vec<TypeSpec>,
    pub items: Vec<ItemSpec>,
    pub users: Vec<UserSpec>,
    pub actors: Vec<Actor>,
    pub events: Vec<EventSpec>,
    pub scenarios: Vec<ScenarioSpec>,
}

/// One request issued against one scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Query {
    pub scenario: usize,
    pub actor: Actor,
    pub item: Option<String>,
    pub k: usize,
}

fn quarter(rng: &mut ChaCha8Rng, max_quarters: u32) -> f64 {
    f64::from(rng.gen_range(0..=max_quarters)) * 0.25
}

fn pick_filter(rng: &mut ChaCha8Rng, on_users: bool) -> PostFilter {
    if on_users {
        return match rng.gen_range(0..3) {
            0 => {
                let lo = f64::from(rng.gen_range(10..40));
                PostFilter::NumericRange { attribute: "age".into(), min: lo, max: lo + f64::from(rng.gen_range(0..30)) }
            }
            1 => PostFilter::Contains { attribute: "segment".into(), value: SEGMENTS.choose(rng).unwrap().to_string() },
            _ => PostFilter::Excludes { attribute: "segment".into(), value: SEGMENTS.choose(rng).unwrap().to_string() },
        };
    }
    match rng.gen_range(0..4) {
        0 => PostFilter::Contains { attribute: "tags".into(), value: TAGS.choose(rng).unwrap().to_string() },
        1 => PostFilter::Excludes { attribute: "tags".into(), value: TAGS.choose(rng).unwrap().to_string() },
        2 => PostFilter::Contains { attribute: "kind".into(), value: KINDS.choose(rng).unwrap().to_string() },
        _ => {
            let lo = f64::from(rng.gen_range(0..60));
            PostFilter::NumericRange { attribute: "price".into(), min: lo, max: lo + f64::from(rng.gen_range(0..60)) }
        }
    }
}

fn pick_filters(rng: &mut ChaCha8Rng, on_users: bool) -> Vec<PostFilter> {
    let n = [0, 0, 1, 1, 2][rng.gen_range(0..5)];
    (0..n).map(|_| pick_filter(rng, on_users)).collect()
}

fn pick_weights(rng: &mut ChaCha8Rng, types: &[TypeSpec]) -> (Weights, BTreeMap<String, f64>) {
    loop {
        let mut overrides = BTreeMap::new();
        let weights: Weights = types
            .iter()
            .map(|t| {
                if !rng.gen_bool(0.7) {
                    return None;
                }
                if rng.gen_bool(0.4) {
                    let w = quarter(rng, 8);
                    overrides.insert(t.name.clone(), w);
                    Some(w)
                } else {
                    Some(t.default_weight)
                }
            })
            .collect();
        if weights.iter().any(Option::is_some) {
            return (weights, overrides);
        }
    }
}

impl Instance {
    /// Deterministic random instance for `seed`.
    pub fn generate(seed: u64) -> Self {
        let rng = &mut ChaCha8Rng::seed_from_u64(seed);
        let types: Vec<TypeSpec> = (0..rng.gen_range(1..=MAX_TYPES))
            .map(|i| TypeSpec {
                name: format!("t{i}"),
                explicit: rng.gen_bool(0.5),
                default_weight: if rng.gen_bool(0.1) { 0.0 } else { 0.25 + quarter(rng, 7) },
            })
            .collect();
        let items: Vec<ItemSpec> = (0..rng.gen_range(1..=MAX_ITEMS))
            .map(|i| ItemSpec {
                id: format!("i{i:02}"),
                title: rng.gen_bool(0.9).then(|| {
                    let n = rng.gen_range(0..=4);
                    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
                }),
                tags: TAGS.iter().filter(|_| rng.gen_bool(0.4)).map(|t| t.to_string()).collect(),
                kind: rng.gen_bool(0.8).then(|| KINDS.choose(rng).unwrap().to_string()),
                price: rng.gen_bool(0.8).then(|| f64::from(rng.gen_range(0..100))),
            })
            .collect();
        let n_users = rng.gen_range(1..=MAX_ACTORS - 1);
        let n_sessions = rng.gen_range(0..=MAX_ACTORS - n_users);
        let with_entities = rng.gen_range(0..=n_users);
        let users: Vec<UserSpec> = (0..with_entities)
            .map(|i| UserSpec {
                id: format!("u{i}"),
                age: rng.gen_bool(0.8).then(|| rng.gen_range(10..70)),
                segment: rng.gen_bool(0.8).then(|| SEGMENTS.choose(rng).unwrap().to_string()),
            })
            .collect();
        let mut actors: Vec<Actor> = (0..n_users).map(|i| Actor::User(format!("u{i}"))).collect();
        actors.extend((0..n_sessions).map(|i| Actor::Session(format!("s{i}"))));
        let events = (0..rng.gen_range(0..=40))
            .map(|_| {
                let kind = rng.gen_range(0..types.len());
                EventSpec {
                    kind,
                    actor: actors.choose(rng).unwrap().clone(),
                    item: rng.gen_range(0..items.len()),
                    value: types[kind].explicit.then(|| f64::from(rng.gen_range(1..=5))),
                }
            })
            .collect();

        let mut scenarios = Vec::new();
        let (weights, overrides) = pick_weights(rng, &types);
        scenarios.push(ScenarioSpec { id: "mp".into(), algo: Algo::Popular { weights }, filters: pick_filters(rng, false), overrides });
        let (weights, overrides) = pick_weights(rng, &types);
        scenarios.push(ScenarioSpec {
            id: "cf".into(),
            algo: Algo::Collaborative { weights, neighbors_k: rng.gen_range(1..=5) },
            filters: pick_filters(rng, false),
            overrides,
        });
        scenarios.push(ScenarioSpec {
            id: "cbf".into(),
            algo: Algo::Content,
            filters: pick_filters(rng, false),
            overrides: BTreeMap::new(),
        });
        let (weights, overrides) = pick_weights(rng, &types);
        scenarios.push(ScenarioSpec {
            id: "ufi".into(),
            algo: Algo::Audience { weights },
            filters: pick_filters(rng, true),
            overrides,
        });
        let mut parts = loop {
            let parts: Vec<(usize, f64)> = vec![(1, quarter(rng, 4)), (2, quarter(rng, 4))];
            if parts.iter().any(|(_, w)| *w > 0.0) {
                break parts;
            }
        };
        if rng.gen_bool(0.5) {
            parts.push((0, quarter(rng, 4)));
        }
        scenarios.push(ScenarioSpec {
            id: "hyb".into(),
            algo: Algo::Hybrid { parts },
            filters: pick_filters(rng, false),
            overrides: BTreeMap::new(),
        });
        Instance { seed, types, items, users, actors, events, scenarios }
    }

    pub fn dump(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    fn selection(&self, weights: &Weights, overrides: &BTreeMap<String, f64>) -> InteractionSelection {
        let mut selection = InteractionSelection::of(
            self.types.iter().zip(weights).filter(|(_, w)| w.is_some()).map(|(t, _)| t.name.clone()),
        );
        selection.interaction_weights = overrides.clone();
        selection
    }

    /// Builds the instance on a fresh in-memory platform through its public
    /// operations and returns the resulting snapshot.
    pub fn build(&self) -> Result<DomainState, uptrendz_core::Error> {
        let platform = Platform::in_memory();
        let d = platform.create_system_domain("oracle")?.id;
        let d = d.as_str();
        platform.define_entity_schema(
            d,
            NewEntityType {
                entity_kind: EntityKind::Item,
                name: ITEM.into(),
                attributes: vec![
                    AttributeSpec::new("title", AttributeKind::FreeTextEnglish),
                    AttributeSpec::new("tags", AttributeKind::CategoricalMulti),
                    AttributeSpec::new("kind", AttributeKind::CategoricalSingle),
                    AttributeSpec::new("price", AttributeKind::NumericReal),
                ],
            },
        )?;
        platform.define_entity_schema(
            d,
            NewEntityType {
                entity_kind: EntityKind::User,
                name: USER.into(),
                attributes: vec![
                    AttributeSpec::new("age", AttributeKind::NumericInteger),
                    AttributeSpec::new("segment", AttributeKind::CategoricalSingle),
                ],
            },
        )?;
        for t in &self.types {
            platform.define_interaction_type(
                d,
                NewInteractionType {
                    name: t.name.clone(),
                    explicitness: if t.explicit { Explicitness::Explicit } else { Explicitness::Implicit },
                    default_weight: t.default_weight,
                    actor_mode: ActorMode::Both,
                    track_timestamp: false,
                    target: InteractionTarget::UserItem,
                    target_entity_type: EntityTypeId::new(ITEM),
                },
            )?;
        }
        for s in &self.scenarios {
            let (target, context, algorithm) = match &s.algo {
                Algo::Popular { weights } => {
                    (ITEM, ContextKind::None, AlgorithmSpec::MostPopular { selection: self.selection(weights, &s.overrides) })
                }
                Algo::Collaborative { weights, neighbors_k } => (
                    ITEM,
                    ContextKind::UserId,
                    AlgorithmSpec::Collaborative {
                        selection: self.selection(weights, &s.overrides),
                        neighbors_k: *neighbors_k,
                    },
                ),
                Algo::Content => (
                    ITEM,
                    ContextKind::ItemId,
                    AlgorithmSpec::ContentBased { cbf_attributes: ["title".to_string()].into() },
                ),
                Algo::Audience { weights } => {
                    (USER, ContextKind::ItemId, AlgorithmSpec::UserForItem { selection: self.selection(weights, &s.overrides) })
                }
                Algo::Hybrid { parts } => (
                    ITEM,
                    ContextKind::ItemId,
                    AlgorithmSpec::Hybrid {
                        hybrid_components: parts
                            .iter()
                            .map(|(i, w)| HybridComponent { scenario_id: self.scenarios[*i].id.as_str().into(), weight: *w })
                            .collect(),
                    },
                ),
            };
            platform.create_scenario(
                d,
                NewScenario {
                    id: Some(s.id.clone()),
                    name: s.id.clone(),
                    target_entity_type: EntityTypeId::new(target),
                    audience: Audience::Both,
                    context,
                    algorithm,
                    post_filters: s.filters.clone(),
                    echo_attributes: Vec::new(),
                },
            )?;
        }
        for item in &self.items {
            let mut values = BTreeMap::new();
            if let Some(t) = &item.title {
                values.insert("title".to_string(), AttributeValue::Text(t.clone()));
            }
            values.insert("tags".to_string(), AttributeValue::List(item.tags.clone()));
            if let Some(kind) = &item.kind {
                values.insert("kind".to_string(), AttributeValue::Text(kind.clone()));
            }
            if let Some(p) = item.price {
                values.insert("price".to_string(), AttributeValue::Real(p));
            }
            platform.upsert_entity(d, ITEM, &item.id, values)?;
        }
        for user in &self.users {
            let mut values = BTreeMap::new();
            if let Some(age) = user.age {
                values.insert("age".to_string(), AttributeValue::Integer(age));
            }
            if let Some(s) = &user.segment {
                values.insert("segment".to_string(), AttributeValue::Text(s.clone()));
            }
            platform.upsert_entity(d, USER, &user.id, values)?;
        }
        for e in &self.events {
            let kind = &self.types[e.kind].name;
            let item = &self.items[e.item].id;
            let mut new = match &e.actor {
                Actor::User(u) => NewInteraction::by_user(kind, u, item),
                Actor::Session(s) => NewInteraction::by_session(kind, s, item),
            };
            if let Some(v) = e.value {
                new = new.value(v);
            }
            platform.record_interaction(d, new)?;
        }
        Ok((*platform.snapshot(d)?).clone())
    }

    /// Every request checked for this instance.
    pub fn queries(&self) -> Vec<Query> {
        let rng = &mut ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut actors = self.actors.clone();
        actors.push(Actor::User("ghost".into()));
        actors.push(Actor::Session("fresh".into()));
        let mut items: Vec<String> = self.items.iter().map(|i| i.id.clone()).collect();
        items.push("missing".into());
        let mut out = Vec::new();
        for (si, s) in self.scenarios.iter().enumerate() {
            let mut k = || if rng.gen_bool(0.2) { 100 } else { rng.gen_range(1..=MAX_ITEMS + 1) };
            match s.algo {
                Algo::Popular { .. } | Algo::Collaborative { .. } => {
                    for a in &actors {
                        out.push(Query { scenario: si, actor: a.clone(), item: None, k: k() });
                    }
                }
                Algo::Content | Algo::Audience { .. } => {
                    for i in &items {
                        out.push(Query { scenario: si, actor: Actor::Session("anon".into()), item: Some(i.clone()), k: k() });
                    }
                }
                Algo::Hybrid { .. } => {
                    for a in &actors {
                        for i in &items {
                            out.push(Query { scenario: si, actor: a.clone(), item: Some(i.clone()), k: k() });
                        }
                    }
                }
            }
        }
        out
    }
}

impl Query {
    pub fn request(&self) -> RecommendationRequest {
        let mut req = match &self.actor {
            Actor::User(u) => RecommendationRequest::for_user(u),
            Actor::Session(s) => RecommendationRequest::for_session(s),
        };
        if let Some(i) = &self.item {
            req = req.item(i);
        }
        req.k(self.k)
    }
}

// ---- the oracle proper ----

/// The oracle's answer: the full filtered candidate map plus the ranked
/// top-k drawn from it.
#[derive(Clone, Debug, PartialEq)]
pub struct Expected {
    pub ranked: Vec<(String, f64)>,
    pub all: BTreeMap<String, f64>,
    pub fallback_used: bool,
}

/// Error kinds the oracle predicts, named like the platform's.
pub type Kind = &'static str;

fn rank(all: &BTreeMap<String, f64>, k: usize) -> Vec<(String, f64)> {
    let mut v: Vec<(String, f64)> = all.iter().map(|(id, s)| (id.clone(), *s)).collect();
    v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(&b.0)));
    v.truncate(k);
    v
}

fn attr_text<'a>(inst: &'a Instance, user_target: bool, id: &str, attr: &str) -> Option<Vec<&'a str>> {
    if user_target {
        let u = inst.users.iter().find(|u| u.id == id)?;
        match attr {
            "segment" => u.segment.as_deref().map(|s| vec![s]),
            _ => None,
        }
    } else {
        let i = inst.items.iter().find(|i| i.id == id)?;
        match attr {
            "tags" => Some(i.tags.iter().map(String::as_str).collect()),
            "kind" => i.kind.as_deref().map(|s| vec![s]),
            _ => None,
        }
    }
}

fn attr_number(inst: &Instance, user_target: bool, id: &str, attr: &str) -> Option<f64> {
    if user_target {
        inst.users.iter().find(|u| u.id == id).and_then(|u| if attr == "age" { u.age.map(|a| a as f64) } else { None })
    } else {
        inst.items.iter().find(|i| i.id == id).and_then(|i| if attr == "price" { i.price } else { None })
    }
}

fn passes(inst: &Instance, user_target: bool, id: &str, filters: &[PostFilter]) -> bool {
    filters.iter().all(|f| match f {
        PostFilter::Contains { attribute, value } => {
            attr_text(inst, user_target, id, attribute).is_some_and(|vs| vs.contains(&value.as_str()))
        }
        PostFilter::Excludes { attribute, value } => {
            !attr_text(inst, user_target, id, attribute).is_some_and(|vs| vs.contains(&value.as_str()))
        }
        PostFilter::NumericRange { attribute, min, max } => {
            attr_number(inst, user_target, id, attribute).is_some_and(|v| *min <= v && v <= *max)
        }
    })
}

/// Dense affinity matrix: actor → per-item affinity, item order as in the
/// instance.
fn affinity(inst: &Instance, weights: &Weights) -> BTreeMap<Actor, Vec<f64>> {
    let mut m: BTreeMap<Actor, Vec<f64>> = BTreeMap::new();
    for e in &inst.events {
        let Some(w) = weights[e.kind] else { continue };
        let contribution = if inst.types[e.kind].explicit { w * e.value.unwrap_or(0.0) } else { w };
        m.entry(e.actor.clone()).or_insert_with(|| vec![0.0; inst.items.len()])[e.item] += contribution;
    }
    m
}

fn norm(row: &[f64]) -> f64 {
    row.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (norm(a) * norm(b))
}

fn finish(inst: &Instance, user_target: bool, scores: BTreeMap<String, f64>, filters: &[PostFilter], k: usize, fallback_used: bool) -> Expected {
    let all: BTreeMap<String, f64> = scores.into_iter().filter(|(id, _)| passes(inst, user_target, id, filters)).collect();
    Expected { ranked: rank(&all, k), all, fallback_used }
}

fn popular(inst: &Instance, weights: &Weights) -> BTreeMap<String, f64> {
    let m = affinity(inst, weights);
    inst.items
        .iter()
        .enumerate()
        .map(|(i, item)| (item.id.clone(), m.values().map(|row| row[i]).sum::<f64>()))
        .filter(|(_, s)| *s > 0.0)
        .collect()
}

fn collaborative(inst: &Instance, weights: &Weights, neighbors_k: usize, actor: &Actor) -> Option<BTreeMap<String, f64>> {
    let m = affinity(inst, weights);
    let own = m.get(actor).filter(|row| row.iter().any(|a| *a != 0.0))?;
    let mut sims: Vec<(&Actor, f64)> = m
        .iter()
        .filter(|(v, row)| *v != actor && dot(own, row) != 0.0)
        .map(|(v, row)| (v, cosine(own, row)))
        .filter(|(_, s)| *s > 0.0)
        .collect();
    sims.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(b.0)));
    sims.truncate(neighbors_k);
    let total: f64 = sims.iter().map(|(_, s)| s).sum();
    let mut out = BTreeMap::new();
    for (i, item) in inst.items.iter().enumerate() {
        if own[i] != 0.0 {
            continue;
        }
        let score = sims.iter().map(|(v, s)| s * m[*v][i]).sum::<f64>() / total;
        if score > 0.0 {
            out.insert(item.id.clone(), score);
        }
    }
    Some(out)
}

fn audience(inst: &Instance, weights: &Weights, item: usize) -> Option<BTreeMap<String, f64>> {
    let m = affinity(inst, weights);
    let raters: Vec<(&Vec<f64>, f64)> = m.values().filter(|row| row[item] > 0.0).map(|row| (row, row[item])).collect();
    if raters.is_empty() {
        return None;
    }
    let mut out = BTreeMap::new();
    for user in &inst.users {
        let Some(row) = m.get(&Actor::User(user.id.clone())) else { continue };
        if row.iter().all(|a| *a == 0.0) || row[item] != 0.0 {
            continue;
        }
        let score: f64 = raters.iter().map(|(v, a)| cosine(row, v) * a).sum();
        if score > 0.0 {
            out.insert(user.id.clone(), score);
        }
    }
    Some(out)
}

enum ContentAnswer {
    Scores(BTreeMap<String, f64>),
    EmptyProfile,
}

fn content(inst: &Instance, item: usize) -> ContentAnswer {
    let docs: Vec<BTreeMap<String, f64>> = inst
        .items
        .iter()
        .map(|i| {
            let mut counts = BTreeMap::new();
            for t in tokenize(i.title.as_deref().unwrap_or(""), Language::English).tokens {
                *counts.entry(t).or_insert(0.0) += 1.0;
            }
            counts
        })
        .collect();
    if docs[item].is_empty() {
        return ContentAnswer::EmptyProfile;
    }
    let n = docs.len() as u64;
    let vocab: BTreeSet<&String> = docs.iter().flat_map(|d| d.keys()).collect();
    let vectors: Vec<Vec<f64>> = docs
        .iter()
        .map(|d| {
            vocab
                .iter()
                .map(|t| {
                    let df = docs.iter().filter(|d| d.contains_key(*t)).count() as u64;
                    d.get(*t).copied().unwrap_or(0.0) * idf(n, df)
                })
                .collect()
        })
        .collect();
    let q = &vectors[item];
    let mut out = BTreeMap::new();
    for (j, v) in vectors.iter().enumerate() {
        if j == item || docs[j].is_empty() {
            continue;
        }
        let d = dot(q, v);
        if d > 0.0 {
            out.insert(inst.items[j].id.clone(), (d / (norm(q) * norm(v))).min(1.0));
        }
    }
    ContentAnswer::Scores(out)
}

fn min_max(list: &[(String, f64)]) -> Vec<(String, f64)> {
    let lo = list.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let hi = list.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    list.iter().map(|(id, s)| (id.clone(), if hi > lo { (s - lo) / (hi - lo) } else { 1.0 })).collect()
}

/// The oracle's answer for one scenario of an instance.
pub fn expected(inst: &Instance, scenario: usize, actor: &Actor, item: Option<&str>, k: usize) -> Result<Expected, Kind> {
    let s = &inst.scenarios[scenario];
    let item_index = || -> Result<usize, Kind> {
        let id = item.ok_or("MissingContext")?;
        inst.items.iter().position(|i| i.id == id).ok_or("UnknownEntity")
    };
    let all_types: Weights = inst.types.iter().map(|t| Some(t.default_weight)).collect();
    let fallback = |weights: &Weights| Ok(finish(inst, false, popular(inst, weights), &s.filters, k, true));
    match &s.algo {
        Algo::Popular { weights } => Ok(finish(inst, false, popular(inst, weights), &s.filters, k, false)),
        Algo::Collaborative { weights, neighbors_k } => match collaborative(inst, weights, *neighbors_k, actor) {
            Some(scores) => Ok(finish(inst, false, scores, &s.filters, k, false)),
            None => fallback(weights),
        },
        Algo::Content => match content(inst, item_index()?) {
            ContentAnswer::Scores(scores) => Ok(finish(inst, false, scores, &s.filters, k, false)),
            ContentAnswer::EmptyProfile => fallback(&all_types),
        },
        Algo::Audience { weights } => {
            let scores = audience(inst, weights, item_index()?).unwrap_or_default();
            Ok(finish(inst, true, scores, &s.filters, k, false))
        }
        Algo::Hybrid { parts } => {
            let mut combined: BTreeMap<String, f64> = BTreeMap::new();
            let mut fallback_used = false;
            for (component, weight) in parts {
                let sub = expected(inst, *component, actor, item, COMPONENT_DEPTH.max(k))?;
                fallback_used |= sub.fallback_used;
                if *weight > 0.0 {
                    for (id, x) in min_max(&sub.ranked) {
                        *combined.entry(id).or_insert(0.0) += weight * x;
                    }
                }
            }
            let mut out = finish(inst, false, combined, &s.filters, k, false);
            out.fallback_used = fallback_used;
            Ok(out)
        }
    }
}

// ---- comparison ----

/// Compares a platform outcome with the oracle. Scores must agree within
/// [`TOLERANCE`] position by position; ids must agree except where the
/// oracle itself scores the two candidates within [`TOLERANCE`] of each
/// other, so that rounding cannot decide a tie-break.
pub fn compare(got: &Result<Outcome, ServeError>, want: &Result<Expected, Kind>) -> Result<(), String> {
    match (got, want) {
        (Err(e), Err(kind)) if e.kind() == *kind => Ok(()),
        (Err(e), Err(kind)) => Err(format!("error {} but oracle expects {kind}", e.kind())),
        (Err(e), Ok(_)) => Err(format!("error {} but oracle expects a list", e.kind())),
        (Ok(_), Err(kind)) => Err(format!("list but oracle expects {kind}")),
        (Ok(outcome), Ok(expected)) => {
            if outcome.fallback_used != expected.fallback_used {
                return Err(format!("fallback_used {} vs {}", outcome.fallback_used, expected.fallback_used));
            }
            let items = &outcome.list.items;
            if items.len() != expected.ranked.len() {
                return Err(format!("{} items vs {} expected", items.len(), expected.ranked.len()));
            }
            let mut seen = BTreeSet::new();
            for (pos, (g, (id, score))) in items.iter().zip(&expected.ranked).enumerate() {
                if !seen.insert(g.id.clone()) {
                    return Err(format!("duplicate {} at {pos}", g.id));
                }
                if (g.score - score).abs() > TOLERANCE {
                    return Err(format!("position {pos}: score {} vs {score}", g.score));
                }
                if &*g.id != id {
                    let tied = expected.all.get(&*g.id).is_some_and(|s| (s - score).abs() <= TOLERANCE);
                    if !tied {
                        return Err(format!("position {pos}: {} vs {id}", g.id));
                    }
                }
            }
            Ok(())
        }
    }
}

/// The engine entry point under test; replaced by a mutant in sanity checks.
pub type Subject = fn(&DomainState, &str, &RecommendationRequest) -> Result<Outcome, ServeError>;

pub fn platform_subject(snapshot: &DomainState, scenario: &str, req: &RecommendationRequest) -> Result<Outcome, ServeError> {
    run_scenario(snapshot, scenario, req, Exec::default())
}

#[derive(Clone, Debug)]
pub struct Mismatch {
    pub seed: u64,
    pub scenario: String,
    pub query: Query,
    pub reason: String,
    pub instance: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "OracleMismatch seed={} scenario={} query={} reason: {}\ninstance: {}",
            self.seed,
            self.scenario,
            serde_json::to_string(&self.query).unwrap_or_default(),
            self.reason,
            self.instance
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct OracleReport {
    pub instances: usize,
    pub queries: usize,
    /// Checked queries per scenario id.
    pub per_scenario: BTreeMap<String, usize>,
    /// First mismatch of each failing instance.
    pub failures: Vec<Mismatch>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.instances > 0
    }

    pub fn summary(&self) -> String {
        let per: Vec<String> = self.per_scenario.iter().map(|(s, n)| format!("{s}={n}")).collect();
        format!(
            "{} instances, {} queries ({}), {} failing instances",
            self.instances,
            self.queries,
            per.join(" "),
            self.failures.len()
        )
    }
}

/// Checks one instance; returns the number of queries and the first mismatch.
pub fn check_instance(inst: &Instance, subject: Subject) -> (usize, BTreeMap<String, usize>, Option<Mismatch>) {
    let snapshot = match inst.build() {
        Ok(s) => s,
        Err(e) => {
            let query = Query { scenario: 0, actor: Actor::Session("-".into()), item: None, k: 0 };
            let reason = format!("instance rejected by the platform: {e}");
            return (0, BTreeMap::new(), Some(Mismatch { seed: inst.seed, scenario: "-".into(), query, reason, instance: inst.dump() }));
        }
    };
    let queries = inst.queries();
    let mut per = BTreeMap::new();
    for q in &queries {
        let scenario = &inst.scenarios[q.scenario].id;
        *per.entry(scenario.clone()).or_insert(0) += 1;
        let got = subject(&snapshot, scenario, &q.request());
        let want = expected(inst, q.scenario, &q.actor, q.item.as_deref(), q.k);
        if let Err(reason) = compare(&got, &want) {
            let m = Mismatch { seed: inst.seed, scenario: scenario.clone(), query: q.clone(), reason, instance: inst.dump() };
            return (queries.len(), per, Some(m));
        }
    }
    (queries.len(), per, None)
}

/// Runs `instances` instances with seeds `seed, seed+1, ...`.
pub fn run_oracles_with(seed: u64, instances: usize, subject: Subject) -> OracleReport {
    let mut report = OracleReport { instances, ..OracleReport::default() };
    for i in 0..instances as u64 {
        let inst = Instance::generate(seed.wrapping_add(i));
        let (n, per, mismatch) = check_instance(&inst, subject);
        report.queries += n;
        for (s, c) in per {
            *report.per_scenario.entry(s).or_insert(0) += c;
        }
        report.failures.extend(mismatch);
    }
    report
}

pub fn run_oracles(seed: u64, instances: usize) -> OracleReport {
    run_oracles_with(seed, instances, platform_subject)
}
