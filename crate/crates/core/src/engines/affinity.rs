use std::sync::Arc;

use super::EngineError;
use crate::catalog::{Contribs, Row};
use crate::registry::{DomainConfig, Explicitness, InteractionSelection};

/// Resolved per-type weights for one scenario.
///
/// `affinity(u, i) = Σ weight(t) · count` over implicit types and
/// `Σ weight(t) · Σ value` over explicit types, restricted to the selected
/// interaction types.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinityWeights {
    // sorted by type name
    entries: Vec<(Arc<str>, f64, Explicitness)>,
}

impl AffinityWeights {
    pub fn resolve(config: &DomainConfig, selection: &InteractionSelection) -> Result<Self, EngineError> {
        let mut entries = Vec::with_capacity(selection.interaction_subset.len());
        for name in &selection.interaction_subset {
            let ty = config
                .interaction_types
                .get(name)
                .ok_or_else(|| EngineError::Misconfigured(format!("unknown interaction type {name:?}")))?;
            let weight = selection.interaction_weights.get(name).copied().unwrap_or(ty.default_weight);
            entries.push((Arc::from(name.as_str()), weight, ty.explicitness));
        }
        Ok(Self { entries })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Same types, every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|(n, w, e)| (n.clone(), w * factor, *e)).collect(),
        }
    }

    pub fn affinity(&self, contribs: &Contribs) -> f64 {
        let mut total = 0.0;
        for (kind, tally) in &contribs.0 {
            if let Ok(pos) = self.entries.binary_search_by(|(n, _, _)| n.cmp(kind)) {
                let (_, weight, explicitness) = &self.entries[pos];
                total += match explicitness {
                    Explicitness::Implicit => weight * tally.count as f64,
                    Explicitness::Explicit => weight * tally.value_sum,
                };
            }
        }
        total
    }

    /// Non-zero affinities of one actor row, in ascending target order.
    pub fn row(&self, row: Option<&Row>) -> Vec<(Arc<str>, f64)> {
        let Some(row) = row else { return Vec::new() };
        row.iter()
            .filter_map(|(target, c)| {
                let a = self.affinity(c);
                (a != 0.0).then(|| (target.clone(), a))
            })
            .collect()
    }

    pub fn row_norm(&self, row: Option<&Row>) -> f64 {
        let Some(row) = row else { return 0.0 };
        row.values()
            .map(|c| {
                let a = self.affinity(c);
                a * a
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Affinity lookup in a sorted row.
pub(crate) fn lookup(row: &[(Arc<str>, f64)], target: &str) -> f64 {
    row.binary_search_by(|(t, _)| (**t).cmp(target)).map_or(0.0, |p| row[p].1)
}
