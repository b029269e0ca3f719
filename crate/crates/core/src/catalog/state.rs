use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::{EntityRecord, InteractionEvent};
use crate::content::{term_counts, CorpusIndex, CorpusKey};
use crate::ids::{ActorId, EntityTypeId};
use crate::registry::{AlgorithmSpec, DomainConfig};

/// Running totals of one interaction type on one (actor, target) pair.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tally {
    pub count: u32,
    pub value_sum: f64,
}

/// Per-type tallies for one (actor, target) pair, sorted by type name.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Contribs(pub Vec<(Arc<str>, Tally)>);

impl Contribs {
    fn add(&mut self, kind: &str, value: Option<f64>) {
        let pos = match self.0.binary_search_by(|(k, _)| (**k).cmp(kind)) {
            Ok(p) => p,
            Err(p) => {
                self.0.insert(p, (Arc::from(kind), Tally::default()));
                p
            }
        };
        let tally = &mut self.0[pos].1;
        tally.count += 1;
        tally.value_sum += value.unwrap_or(0.0);
    }
}

pub type Row = imbl::OrdMap<Arc<str>, Contribs>;
pub type Column = imbl::OrdMap<ActorId, Contribs>;

/// Interaction tallies indexed both by actor and by target.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InteractionIndex {
    rows: imbl::HashMap<ActorId, imbl::HashMap<EntityTypeId, Row>>,
    cols: imbl::HashMap<EntityTypeId, imbl::HashMap<Arc<str>, Column>>,
}

impl InteractionIndex {
    fn record(&mut self, event: &InteractionEvent) {
        let target: Arc<str> = Arc::from(event.target_id.as_str());
        self.rows
            .entry(event.actor.clone())
            .or_default()
            .entry(event.target_type.clone())
            .or_default()
            .entry(target.clone())
            .or_default()
            .add(&event.interaction_type, event.value);
        self.cols
            .entry(event.target_type.clone())
            .or_default()
            .entry(target)
            .or_default()
            .entry(event.actor.clone())
            .or_default()
            .add(&event.interaction_type, event.value);
    }

    /// Everything `actor` did to entities of `target_type`.
    pub fn row(&self, actor: &ActorId, target_type: &EntityTypeId) -> Option<&Row> {
        self.rows.get(actor)?.get(target_type)
    }

    /// Everyone who interacted with `target`.
    pub fn column(&self, target_type: &EntityTypeId, target: &str) -> Option<&Column> {
        self.cols.get(target_type)?.get(target)
    }

    /// All targets of `target_type` with at least one interaction.
    pub fn columns(&self, target_type: &EntityTypeId) -> Option<&imbl::HashMap<Arc<str>, Column>> {
        self.cols.get(target_type)
    }

    pub fn actors(&self) -> impl Iterator<Item = &ActorId> {
        self.rows.keys()
    }
}

/// The content corpora a configuration asks for: one per (entity type,
/// attribute set) used by a content-based scenario.
pub fn corpus_keys(config: &DomainConfig) -> BTreeSet<CorpusKey> {
    config
        .scenarios
        .values()
        .filter_map(|s| match &s.algorithm {
            AlgorithmSpec::ContentBased { cbf_attributes } => {
                Some(CorpusKey::new(s.target_entity_type.clone(), cbf_attributes.iter().cloned()))
            }
            _ => None,
        })
        .collect()
}

/// Complete in-memory state of one system domain at one sequence number.
/// Cloning is cheap (persistent maps share structure), which is what makes
/// snapshots immutable without copying.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainState {
    pub config: Arc<DomainConfig>,
    pub sequence: u64,
    entities: imbl::HashMap<EntityTypeId, imbl::OrdMap<Arc<str>, Arc<EntityRecord>>>,
    events: imbl::Vector<Arc<InteractionEvent>>,
    interactions: InteractionIndex,
    content: BTreeMap<CorpusKey, CorpusIndex>,
}

impl DomainState {
    pub fn new(config: Arc<DomainConfig>) -> Self {
        let content = corpus_keys(&config).into_iter().map(|k| (k, CorpusIndex::default())).collect();
        Self {
            config,
            sequence: 0,
            entities: imbl::HashMap::new(),
            events: imbl::Vector::new(),
            interactions: InteractionIndex::default(),
            content,
        }
    }

    pub fn entity(&self, entity_type: &EntityTypeId, id: &str) -> Option<&Arc<EntityRecord>> {
        self.entities.get(entity_type)?.get(id)
    }

    pub fn entities_of(
        &self,
        entity_type: &EntityTypeId,
    ) -> impl Iterator<Item = &Arc<EntityRecord>> + '_ {
        self.entities.get(entity_type).into_iter().flat_map(|m| m.values())
    }

    pub fn entity_count(&self) -> usize {
        self.entities.values().map(|m| m.len()).sum()
    }

    pub fn entity_count_of(&self, entity_type: &EntityTypeId) -> usize {
        self.entities.get(entity_type).map_or(0, |m| m.len())
    }

    pub fn events(&self) -> &imbl::Vector<Arc<InteractionEvent>> {
        &self.events
    }

    pub fn interactions(&self) -> &InteractionIndex {
        &self.interactions
    }

    pub fn corpus(&self, key: &CorpusKey) -> Option<&CorpusIndex> {
        self.content.get(key)
    }

    /// Stores a validated record (its `sequence` already assigned) and
    /// reindexes it in every corpus over its entity type.
    pub fn apply_entity(&mut self, record: EntityRecord) {
        debug_assert_eq!(record.sequence, self.sequence + 1);
        self.sequence = record.sequence;
        if let Some(schema) = self.config.schema(record.entity_type_id.as_str()) {
            for (key, corpus) in self.content.iter_mut() {
                if key.entity_type == record.entity_type_id {
                    // attributes were checked to be free text when the scenario was created
                    if let Ok(counts) = term_counts(schema, &record, &key.attributes) {
                        corpus.upsert(&record.entity_id, counts);
                    }
                }
            }
        }
        let id: Arc<str> = Arc::from(record.entity_id.as_str());
        self.entities
            .entry(record.entity_type_id.clone())
            .or_default()
            .insert(id, Arc::new(record));
    }

    pub fn apply_event(&mut self, event: InteractionEvent) {
        debug_assert_eq!(event.sequence, self.sequence + 1);
        self.sequence = event.sequence;
        self.interactions.record(&event);
        self.events.push_back(Arc::new(event));
    }

    /// Swaps in a new configuration, building any corpus it introduces from
    /// the entities already stored.
    pub fn set_config(&mut self, config: Arc<DomainConfig>) {
        let keys = corpus_keys(&config);
        self.content.retain(|k, _| keys.contains(k));
        for key in keys {
            if self.content.contains_key(&key) {
                continue;
            }
            let mut corpus = CorpusIndex::default();
            if let (Some(schema), Some(records)) =
                (config.schema(key.entity_type.as_str()), self.entities.get(&key.entity_type))
            {
                for record in records.values() {
                    if let Ok(counts) = term_counts(schema, record, &key.attributes) {
                        corpus.upsert(&record.entity_id, counts);
                    }
                }
            }
            self.content.insert(key, corpus);
        }
        self.config = config;
    }
}
