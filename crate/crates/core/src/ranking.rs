use std::cmp::Ordering;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ids::ScenarioId;

/// A candidate with its engine score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub id: Arc<str>,
    pub score: f64,
}

impl Scored {
    pub fn new(id: impl AsRef<str>, score: f64) -> Self {
        Self { id: Arc::from(id.as_ref()), score }
    }
}

/// Descending score, ties by ascending id.
pub fn rank_order(a: &Scored, b: &Scored) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id))
}

/// Sorts candidates into ranking order and keeps the first `k`.
pub fn top_k(mut candidates: Vec<Scored>, k: usize) -> Vec<Scored> {
    if candidates.len() > k && k > 0 {
        candidates.select_nth_unstable_by(k - 1, rank_order);
        candidates.truncate(k);
    }
    candidates.sort_unstable_by(rank_order);
    candidates.truncate(k);
    candidates
}

/// Ordered recommendation result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub items: Vec<Scored>,
    pub scenario_id: Option<ScenarioId>,
    pub as_of_sequence: u64,
}

impl RankedList {
    pub fn ids(&self) -> Vec<&str> {
        self.items.iter().map(|s| &*s.id).collect()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Checks the ordering invariants: non-increasing scores, ascending ids
    /// within ties, no duplicates.
    pub fn is_well_formed(&self) -> bool {
        let ordered = self
            .items
            .windows(2)
            .all(|w| rank_order(&w[0], &w[1]) == Ordering::Less);
        let mut ids: Vec<&str> = self.ids();
        ids.sort_unstable();
        ids.dedup();
        ordered && ids.len() == self.items.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ties_break_by_id() {
        let out = top_k(
            vec![Scored::new("b", 1.0), Scored::new("a", 1.0), Scored::new("c", 2.0)],
            10,
        );
        let ids: Vec<&str> = out.iter().map(|s| &*s.id).collect();
        assert_eq!(ids, ["c", "a", "b"]);
    }

    proptest! {
        #[test]
        fn top_k_is_prefix_of_full_sort(
            scores in proptest::collection::vec(0u8..5, 0..40),
            k in 1usize..50,
        ) {
            let cands: Vec<Scored> = scores
                .iter()
                .enumerate()
                .map(|(i, s)| Scored::new(format!("e{i:02}"), *s as f64))
                .collect();
            let mut full = cands.clone();
            full.sort_by(rank_order);
            let top = top_k(cands, k);
            prop_assert_eq!(&top[..], &full[..k.min(full.len())]);
            let list = RankedList { items: top, scenario_id: None, as_of_sequence: 0 };
            prop_assert!(list.is_well_formed());
        }
    }
}
