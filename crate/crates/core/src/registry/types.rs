use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::ids::{DomainId, EntityTypeId, ScenarioId};

pub const MAX_ATTRIBUTES: usize = 256;
pub const DEFAULT_NEIGHBORS_K: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemDomain {
    pub id: DomainId,
    pub name: String,
    pub storage_namespace: String,
    pub created_at: DateTime<Utc>,
}

/// The attribute kinds a schema may declare.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttributeKind {
    CategoricalSingle,
    CategoricalMulti,
    FreeTextEnglish,
    FreeTextGerman,
    NumericInteger,
    NumericReal,
    Date,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Language {
    English,
    German,
}

impl AttributeKind {
    pub const ALL: [AttributeKind; 7] = [
        AttributeKind::CategoricalSingle,
        AttributeKind::CategoricalMulti,
        AttributeKind::FreeTextEnglish,
        AttributeKind::FreeTextGerman,
        AttributeKind::NumericInteger,
        AttributeKind::NumericReal,
        AttributeKind::Date,
    ];

    pub fn is_categorical(self) -> bool {
        matches!(self, AttributeKind::CategoricalSingle | AttributeKind::CategoricalMulti)
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, AttributeKind::NumericInteger | AttributeKind::NumericReal)
    }

    pub fn language(self) -> Option<Language> {
        match self {
            AttributeKind::FreeTextEnglish => Some(Language::English),
            AttributeKind::FreeTextGerman => Some(Language::German),
            _ => None,
        }
    }

    pub fn is_free_text(self) -> bool {
        self.language().is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
    #[serde(default)]
    pub required: bool,
}

impl AttributeSpec {
    pub fn new(name: impl Into<String>, kind: AttributeKind) -> Self {
        Self { name: name.into(), kind, required: false }
    }

    pub fn required(mut self) -> Self {
        self.required = true;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    Item,
    User,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySchema {
    pub domain_id: DomainId,
    pub entity_type_id: EntityTypeId,
    pub entity_kind: EntityKind,
    pub name: String,
    pub attributes: Vec<AttributeSpec>,
    pub upload_endpoint: String,
}

impl EntitySchema {
    pub fn attribute(&self, name: &str) -> Option<&AttributeSpec> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

/// Input to `define_entity_schema`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewEntityType {
    pub entity_kind: EntityKind,
    pub name: String,
    #[serde(default)]
    pub attributes: Vec<AttributeSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Explicitness {
    Explicit,
    Implicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActorMode {
    RegisteredOnly,
    AnonymousOnly,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InteractionTarget {
    UserItem,
    UserUser,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionTypeConfig {
    pub domain_id: DomainId,
    pub name: String,
    pub explicitness: Explicitness,
    pub default_weight: f64,
    pub actor_mode: ActorMode,
    pub track_timestamp: bool,
    pub target: InteractionTarget,
    pub target_entity_type: EntityTypeId,
}

/// Input to `define_interaction_type`; the domain comes from the call.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewInteractionType {
    pub name: String,
    pub explicitness: Explicitness,
    pub default_weight: f64,
    pub actor_mode: ActorMode,
    #[serde(default)]
    pub track_timestamp: bool,
    pub target: InteractionTarget,
    pub target_entity_type: EntityTypeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Audience {
    Registered,
    Anonymous,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContextKind {
    None,
    ItemId,
    UserId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridComponent {
    pub scenario_id: ScenarioId,
    pub weight: f64,
}

/// Interaction subset and weight overrides shared by the interaction-driven
/// algorithms.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionSelection {
    pub interaction_subset: BTreeSet<String>,
    #[serde(default)]
    pub interaction_weights: BTreeMap<String, f64>,
}

impl InteractionSelection {
    pub fn of<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            interaction_subset: names.into_iter().map(Into::into).collect(),
            interaction_weights: BTreeMap::new(),
        }
    }

    pub fn with_weight(mut self, name: impl Into<String>, weight: f64) -> Self {
        self.interaction_weights.insert(name.into(), weight);
        self
    }
}

fn default_neighbors_k() -> usize {
    DEFAULT_NEIGHBORS_K
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum AlgorithmSpec {
    MostPopular {
        #[serde(flatten)]
        selection: InteractionSelection,
    },
    ContentBased {
        cbf_attributes: BTreeSet<String>,
    },
    Collaborative {
        #[serde(flatten)]
        selection: InteractionSelection,
        #[serde(default = "default_neighbors_k")]
        neighbors_k: usize,
    },
    UserForItem {
        #[serde(flatten)]
        selection: InteractionSelection,
    },
    Hybrid {
        hybrid_components: Vec<HybridComponent>,
    },
}

impl AlgorithmSpec {
    pub fn selection(&self) -> Option<&InteractionSelection> {
        match self {
            AlgorithmSpec::MostPopular { selection }
            | AlgorithmSpec::Collaborative { selection, .. }
            | AlgorithmSpec::UserForItem { selection } => Some(selection),
            AlgorithmSpec::ContentBased { .. } | AlgorithmSpec::Hybrid { .. } => None,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            AlgorithmSpec::MostPopular { .. } => "MostPopular",
            AlgorithmSpec::ContentBased { .. } => "ContentBased",
            AlgorithmSpec::Collaborative { .. } => "Collaborative",
            AlgorithmSpec::UserForItem { .. } => "UserForItem",
            AlgorithmSpec::Hybrid { .. } => "Hybrid",
        }
    }

    pub fn is_hybrid(&self) -> bool {
        matches!(self, AlgorithmSpec::Hybrid { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode")]
pub enum PostFilter {
    Contains { attribute: String, value: String },
    Excludes { attribute: String, value: String },
    NumericRange { attribute: String, min: f64, max: f64 },
}

impl PostFilter {
    pub fn attribute(&self) -> &str {
        match self {
            PostFilter::Contains { attribute, .. }
            | PostFilter::Excludes { attribute, .. }
            | PostFilter::NumericRange { attribute, .. } => attribute,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub domain_id: DomainId,
    pub scenario_id: ScenarioId,
    pub name: String,
    pub target_entity_type: EntityTypeId,
    pub audience: Audience,
    pub context: ContextKind,
    pub algorithm: AlgorithmSpec,
    #[serde(default)]
    pub post_filters: Vec<PostFilter>,
    /// Attributes echoed back with every recommended entity.
    #[serde(default)]
    pub echo_attributes: Vec<String>,
    pub recommendation_endpoint: String,
}

/// Input to `create_scenario`. Without an explicit `id` the scenario id is
/// the slug of `name`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewScenario {
    #[serde(default)]
    pub id: Option<String>,
    pub name: String,
    pub target_entity_type: EntityTypeId,
    pub audience: Audience,
    pub context: ContextKind,
    pub algorithm: AlgorithmSpec,
    #[serde(default)]
    pub post_filters: Vec<PostFilter>,
    #[serde(default)]
    pub echo_attributes: Vec<String>,
}

/// Everything configured for one system domain. This is also the readback
/// and bootstrap document format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainConfig {
    pub domain: SystemDomain,
    #[serde(default)]
    pub entity_types: BTreeMap<EntityTypeId, EntitySchema>,
    #[serde(default)]
    pub interaction_types: BTreeMap<String, InteractionTypeConfig>,
    #[serde(default)]
    pub scenarios: BTreeMap<ScenarioId, ScenarioConfig>,
}

impl DomainConfig {
    pub fn new(domain: SystemDomain) -> Self {
        Self {
            domain,
            entity_types: BTreeMap::new(),
            interaction_types: BTreeMap::new(),
            scenarios: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> &DomainId {
        &self.domain.id
    }

    pub fn schema(&self, entity_type: &str) -> Option<&EntitySchema> {
        self.entity_types.get(entity_type)
    }

    pub fn scenario(&self, id: &str) -> Option<&ScenarioConfig> {
        self.scenarios.get(id)
    }

    /// Human-readable persisted form; byte-stable across round trips.
    pub fn to_document(&self) -> String {
        let mut doc = serde_json::to_string_pretty(self).expect("config serializes");
        doc.push('\n');
        doc
    }

    pub fn from_document(doc: &str) -> serde_json::Result<Self> {
        serde_json::from_str(doc)
    }
}

pub fn upload_endpoint(domain: &DomainId, entity_type: &EntityTypeId) -> String {
    format!("/domains/{domain}/catalog/{entity_type}")
}

pub fn recommendation_endpoint(domain: &DomainId, scenario: &ScenarioId) -> String {
    format!("/domains/{domain}/scenarios/{scenario}/recommendations")
}

pub fn storage_namespace(domain: &DomainId) -> String {
    format!("ns/{domain}")
}
