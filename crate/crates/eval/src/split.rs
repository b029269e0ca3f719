//! Temporal per-user train/test split.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::movielens::Rating;

/// Users with fewer ratings than this stay entirely in the training set.
pub const MIN_RATINGS_FOR_TEST: usize = 5;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Split {
    /// Training ratings in global timestamp order; this is the ingest order.
    pub train: Vec<Rating>,
    /// Held-out ratings per test user, oldest first.
    pub test: BTreeMap<String, Vec<Rating>>,
}

impl Split {
    pub fn test_users(&self) -> usize {
        self.test.len()
    }

    pub fn test_events(&self) -> usize {
        self.test.values().map(Vec::len).sum()
    }
}

/// Number of ratings held out from a user with `n` ratings.
pub fn holdout_len(n: usize, fraction: f64) -> usize {
    if n < MIN_RATINGS_FOR_TEST {
        return 0;
    }
    ((fraction * n as f64).round() as usize).clamp(1, n - 1)
}

/// Holds out the latest `fraction` of every eligible user's ratings. Equal
/// timestamps are ordered by a seeded shuffle, so the split is a pure
/// function of the ratings and the seed.
pub fn temporal_split(ratings: &[Rating], fraction: f64, seed: u64) -> Split {
    let mut order: Vec<usize> = (0..ratings.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.sort_by_key(|&i| ratings[i].timestamp);

    let mut per_user: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for &i in &order {
        per_user.entry(ratings[i].user.as_str()).or_default().push(i);
    }
    let mut held_out = vec![false; ratings.len()];
    let mut test = BTreeMap::new();
    for (user, rows) in per_user {
        let h = holdout_len(rows.len(), fraction);
        if h == 0 {
            continue;
        }
        let tail = &rows[rows.len() - h..];
        tail.iter().for_each(|&i| held_out[i] = true);
        test.insert(user.to_string(), tail.iter().map(|&i| ratings[i].clone()).collect());
    }
    let train = order.into_iter().filter(|&i| !held_out[i]).map(|i| ratings[i].clone()).collect();
    Split { train, test }
}
