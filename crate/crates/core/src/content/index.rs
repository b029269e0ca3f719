use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use super::tokenize::tokenize;
use super::ContentError;
use crate::catalog::{AttributeValue, EntityRecord};
use crate::exec::Exec;
use crate::ids::EntityTypeId;
use crate::ranking::{top_k, RankedList, Scored};
use crate::registry::EntitySchema;
use crate::sched::checkpoint;

/// Identifies one corpus: an entity type plus the free-text attributes whose
/// token streams are concatenated into each document.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CorpusKey {
    pub entity_type: EntityTypeId,
    pub attributes: Vec<String>,
}

impl CorpusKey {
    pub fn new<I, S>(entity_type: EntityTypeId, attributes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = attributes.into_iter().map(Into::into).collect();
        Self { entity_type, attributes: set.into_iter().collect() }
    }
}

/// Raw term counts of one document, sorted by term.
pub type TermCounts = Vec<(Arc<str>, u32)>;

/// Sparse TF-IDF profile of one entity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermVector {
    pub entity_id: String,
    pub weights: BTreeMap<String, f64>,
}

/// Smoothed inverse document frequency; positive for any `doc_freq <= doc_count`.
pub fn idf(doc_count: u64, doc_freq: u64) -> f64 {
    ((1.0 + doc_count as f64) / (1.0 + doc_freq as f64)).ln() + 1.0
}

/// Term counts over the concatenated token streams of `attributes`.
pub fn term_counts(
    schema: &EntitySchema,
    record: &EntityRecord,
    attributes: &[String],
) -> Result<TermCounts, ContentError> {
    let mut counts: BTreeMap<String, u32> = BTreeMap::new();
    for name in attributes {
        let language = schema
            .attribute(name)
            .and_then(|a| a.kind.language())
            .ok_or_else(|| ContentError::NonTextAttribute(name.clone()))?;
        if let Some(AttributeValue::Text(text)) = record.values.get(name) {
            for token in tokenize(text, language).tokens {
                *counts.entry(token).or_default() += 1;
            }
        }
    }
    Ok(counts.into_iter().map(|(t, c)| (Arc::from(t), c)).collect())
}

/// Document frequencies and per-document term counts for one corpus.
///
/// Weights are not stored: they are derived from the stored counts and the
/// live document frequencies at query time, so incremental maintenance and
/// a rebuild from scratch hold identical state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorpusIndex {
    doc_count: u64,
    doc_freq: imbl::HashMap<Arc<str>, u64>,
    docs: imbl::OrdMap<Arc<str>, Arc<TermCounts>>,
    postings: imbl::HashMap<Arc<str>, imbl::OrdSet<Arc<str>>>,
}

impl CorpusIndex {
    pub fn doc_count(&self) -> u64 {
        self.doc_count
    }

    pub fn doc_freq(&self, term: &str) -> u64 {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    pub fn idf(&self, term: &str) -> f64 {
        idf(self.doc_count, self.doc_freq(term))
    }

    pub fn contains(&self, entity_id: &str) -> bool {
        self.docs.contains_key(entity_id)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Arc<str>, u64)> {
        self.doc_freq.iter().map(|(t, n)| (t, *n))
    }

    /// Inserts or fully replaces one document.
    pub fn upsert(&mut self, entity_id: &str, counts: TermCounts) {
        let id: Arc<str> = Arc::from(entity_id);
        match self.docs.get(entity_id).cloned() {
            Some(old) => self.unlink(&id, &old),
            None => self.doc_count += 1,
        }
        for (term, _) in &counts {
            *self.doc_freq.entry(term.clone()).or_insert(0) += 1;
            self.postings.entry(term.clone()).or_default().insert(id.clone());
        }
        self.docs.insert(id, Arc::new(counts));
    }

    fn unlink(&mut self, id: &Arc<str>, old: &TermCounts) {
        for (term, _) in old {
            let gone = match self.doc_freq.get_mut(term) {
                Some(n) => {
                    *n -= 1;
                    *n == 0
                }
                None => false,
            };
            if gone {
                self.doc_freq.remove(term);
                self.postings.remove(term);
            } else if let Some(p) = self.postings.get_mut(term) {
                p.remove(id);
            }
        }
    }

    fn weights(&self, counts: &TermCounts) -> Vec<(Arc<str>, f64)> {
        counts
            .iter()
            .map(|(t, c)| (t.clone(), *c as f64 * self.idf(t)))
            .collect()
    }

    pub fn vector(&self, entity_id: &str) -> Option<TermVector> {
        let counts = self.docs.get(entity_id)?;
        Some(TermVector {
            entity_id: entity_id.to_string(),
            weights: self
                .weights(counts)
                .into_iter()
                .map(|(t, w)| (t.to_string(), w))
                .collect(),
        })
    }

    fn norm(&self, counts: &TermCounts) -> f64 {
        counts
            .iter()
            .map(|(t, c)| {
                let w = *c as f64 * self.idf(t);
                w * w
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Cosine similarity of `context` against every other document sharing
    /// at least one term. Unordered; zero scores never appear.
    pub fn similar_candidates(&self, context: &str, exec: Exec) -> Result<Vec<Scored>, ContentError> {
        let counts = self
            .docs
            .get(context)
            .ok_or_else(|| ContentError::UnknownEntity(context.to_string()))?;
        if counts.is_empty() {
            return Err(ContentError::EmptyProfile(context.to_string()));
        }
        let query = self.weights(counts);
        let query_norm = query.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();

        let mut candidates: BTreeSet<&Arc<str>> = BTreeSet::new();
        for (term, _) in counts.iter() {
            if let Some(ids) = self.postings.get(term) {
                candidates.extend(ids.iter());
            }
        }
        candidates.remove(&Arc::<str>::from(context));
        let candidates: Vec<&Arc<str>> = candidates.into_iter().collect();

        Ok(exec.filter_map(&candidates, |id| {
            checkpoint();
            let doc = self.docs.get(&***id)?;
            let mut dot = 0.0;
            for (term, w) in &query {
                if let Ok(pos) = doc.binary_search_by(|(t, _)| t.cmp(term)) {
                    dot += w * doc[pos].1 as f64 * self.idf(term);
                }
            }
            if dot <= 0.0 {
                return None;
            }
            let score = (dot / (query_norm * self.norm(doc))).min(1.0);
            Some(Scored { id: Arc::clone(id), score })
        }))
    }

    /// Top-`k` most similar documents to `context`.
    pub fn similar_entities(
        &self,
        context: &str,
        k: usize,
        exec: Exec,
    ) -> Result<RankedList, ContentError> {
        let items = top_k(self.similar_candidates(context, exec)?, k);
        Ok(RankedList { items, scenario_id: None, as_of_sequence: 0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::DomainId;
    use crate::registry::{AttributeKind, AttributeSpec, EntityKind};
    use proptest::prelude::*;

    fn schema() -> EntitySchema {
        EntitySchema {
            domain_id: DomainId::new("d"),
            entity_type_id: EntityTypeId::new("doc"),
            entity_kind: EntityKind::Item,
            name: "doc".into(),
            attributes: vec![
                AttributeSpec::new("title", AttributeKind::FreeTextEnglish),
                AttributeSpec::new("body", AttributeKind::FreeTextGerman),
                AttributeSpec::new("tag", AttributeKind::CategoricalSingle),
            ],
            upload_endpoint: String::new(),
        }
    }

    fn record(id: &str, title: &str) -> EntityRecord {
        EntityRecord {
            entity_type_id: EntityTypeId::new("doc"),
            entity_id: id.into(),
            values: [("title".to_string(), AttributeValue::Text(title.into()))].into(),
            sequence: 0,
        }
    }

    fn corpus(docs: &[(&str, &str)]) -> CorpusIndex {
        let s = schema();
        let attrs = vec!["title".to_string()];
        let mut c = CorpusIndex::default();
        for (id, text) in docs {
            c.upsert(id, term_counts(&s, &record(id, text), &attrs).unwrap());
        }
        c
    }

    #[test]
    fn single_document_weights() {
        let c = corpus(&[("a", "toy story")]);
        let v = c.vector("a").unwrap();
        let expected = idf(1, 1);
        assert_eq!(expected, 1.0);
        assert_eq!(v.weights.len(), 2);
        assert!((v.weights["toy"] - expected).abs() < 1e-12);
        assert!((v.weights["story"] - expected).abs() < 1e-12);
    }

    #[test]
    fn shared_terms_have_lower_idf() {
        let c = corpus(&[("a", "space story"), ("b", "garden story")]);
        assert_eq!(c.doc_freq("story"), 2);
        assert_eq!(c.doc_freq("space"), 1);
        assert!(c.idf("story") < c.idf("space"));
    }

    #[test]
    fn empty_text_yields_empty_profile() {
        let c = corpus(&[("a", ""), ("b", "space war")]);
        assert!(c.vector("a").unwrap().weights.is_empty());
        assert_eq!(c.similar_entities("a", 5, Exec::Sequential), Err(ContentError::EmptyProfile("a".into())));
        let from_b = c.similar_entities("b", 5, Exec::Sequential).unwrap();
        assert!(from_b.is_empty());
    }

    #[test]
    fn identical_and_disjoint_texts() {
        let c = corpus(&[("A", "space war"), ("B", "space war"), ("C", "garden")]);
        let r = c.similar_entities("A", 10, Exec::Sequential).unwrap();
        assert_eq!(r.ids(), ["B"]);
        assert!((r.items[0].score - 1.0).abs() < 1e-9);
        let r1 = corpus(&[("A", "space war"), ("B", "space war"), ("C", "space garden")])
            .similar_entities("A", 1, Exec::Sequential)
            .unwrap();
        assert_eq!(r1.len(), 1);
    }

    #[test]
    fn unknown_context() {
        let c = corpus(&[("A", "space war")]);
        assert_eq!(
            c.similar_entities("Z", 1, Exec::Sequential),
            Err(ContentError::UnknownEntity("Z".into()))
        );
    }

    #[test]
    fn non_text_attribute_rejected() {
        let err = term_counts(&schema(), &record("a", "x"), &["tag".to_string()]).unwrap_err();
        assert_eq!(err, ContentError::NonTextAttribute("tag".into()));
    }

    #[test]
    fn reupsert_replaces_vector() {
        let mut c = corpus(&[("a", "space war"), ("b", "space")]);
        let s = schema();
        c.upsert("a", term_counts(&s, &record("a", "garden"), &["title".into()]).unwrap());
        assert_eq!(c.doc_count(), 2);
        assert_eq!(c.doc_freq("war"), 0);
        assert_eq!(c.doc_freq("space"), 1);
        assert_eq!(c.vector("a").unwrap().weights.keys().collect::<Vec<_>>(), ["garden"]);
    }

    const WORDS: [&str; 6] = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot"];

    fn text_strategy() -> impl Strategy<Value = String> {
        proptest::collection::vec(0usize..WORDS.len(), 0..6)
            .prop_map(|ix| ix.iter().map(|i| WORDS[*i]).collect::<Vec<_>>().join(" "))
    }

    proptest! {
        #[test]
        fn incremental_equals_batch(
            ops in proptest::collection::vec((0usize..5, text_strategy()), 1..25)
        ) {
            let s = schema();
            let attrs = vec!["title".to_string()];
            let mut incremental = CorpusIndex::default();
            let mut last: BTreeMap<String, String> = BTreeMap::new();
            for (id, text) in &ops {
                let id = format!("e{id}");
                incremental.upsert(&id, term_counts(&s, &record(&id, text), &attrs).unwrap());
                last.insert(id, text.clone());
            }
            let mut batch = CorpusIndex::default();
            for (id, text) in &last {
                batch.upsert(id, term_counts(&s, &record(id, text), &attrs).unwrap());
            }
            prop_assert_eq!(&incremental, &batch);
            for id in last.keys() {
                let (a, b) = (incremental.vector(id).unwrap(), batch.vector(id).unwrap());
                for (t, w) in &a.weights {
                    prop_assert!((w - b.weights[t]).abs() < 1e-9);
                    prop_assert!(w.is_finite() && *w > 0.0);
                }
            }
            for (_, df) in incremental.terms() {
                prop_assert!(df >= 1 && df <= incremental.doc_count());
            }
        }

        #[test]
        fn cosine_bounds_and_self_similarity(
            texts in proptest::collection::vec(text_strategy(), 2..8)
        ) {
            let docs: Vec<(String, String)> =
                texts.iter().enumerate().map(|(i, t)| (format!("e{i}"), t.clone())).collect();
            let refs: Vec<(&str, &str)> = docs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            let c = corpus(&refs);
            for (id, _) in &docs {
                let Some(v) = c.vector(id) else { continue };
                if v.weights.is_empty() {
                    continue;
                }
                let norm: f64 = v.weights.values().map(|w| w * w).sum::<f64>().sqrt();
                let self_sim = v.weights.values().map(|w| w * w).sum::<f64>() / (norm * norm);
                prop_assert!((self_sim - 1.0).abs() < 1e-9);
                let seq = c.similar_entities(id, 100, Exec::Sequential).unwrap();
                let par = c.similar_entities(id, 100, Exec::Parallel).unwrap();
                prop_assert_eq!(&seq, &par);
                for s in &seq.items {
                    prop_assert!(s.score > 0.0 && s.score <= 1.0);
                }
            }
        }
    }
}
