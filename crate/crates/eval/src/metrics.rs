//! Top-k ranking metrics with binary relevance.

use std::collections::BTreeSet;

use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Metrics {
    pub recall_at_k: f64,
    pub precision_at_k: f64,
    pub ndcg_at_k: f64,
}

fn discount(rank: usize) -> f64 {
    1.0 / ((rank + 2) as f64).log2()
}

/// Metrics of one ranked list against the relevant set. Only the first `k`
/// entries of `ranked` count; precision divides by `k` even when fewer were
/// returned.
pub fn score_list(ranked: &[&str], relevant: &BTreeSet<&str>, k: usize) -> Metrics {
    if relevant.is_empty() || k == 0 {
        return Metrics::default();
    }
    let top = &ranked[..ranked.len().min(k)];
    let hits: Vec<usize> = top.iter().enumerate().filter(|(_, id)| relevant.contains(**id)).map(|(i, _)| i).collect();
    let dcg: f64 = hits.iter().map(|&i| discount(i)).sum();
    let idcg: f64 = (0..relevant.len().min(k)).map(discount).sum();
    Metrics {
        recall_at_k: hits.len() as f64 / relevant.len() as f64,
        precision_at_k: hits.len() as f64 / k as f64,
        ndcg_at_k: dcg / idcg,
    }
}

/// Running mean over evaluated queries.
#[derive(Clone, Debug, Default)]
pub struct Mean {
    sum: Metrics,
    pub count: usize,
}

impl Mean {
    pub fn add(&mut self, m: Metrics) {
        self.sum.recall_at_k += m.recall_at_k;
        self.sum.precision_at_k += m.precision_at_k;
        self.sum.ndcg_at_k += m.ndcg_at_k;
        self.count += 1;
    }

    pub fn mean(&self) -> Metrics {
        if self.count == 0 {
            return Metrics::default();
        }
        let n = self.count as f64;
        Metrics {
            recall_at_k: self.sum.recall_at_k / n,
            precision_at_k: self.sum.precision_at_k / n,
            ndcg_at_k: self.sum.ndcg_at_k / n,
        }
    }
}
