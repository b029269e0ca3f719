//! Offline evaluation of the walkthrough scenarios on a temporal split.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use uptrendz_core::gateway::{run_scenario_at_depth, RecommendationRequest, ServeError};
use uptrendz_core::ids::DomainId;
use uptrendz_core::{Exec, Platform};

use crate::metrics::{score_list, Mean};
use crate::movielens::{self, Counts, Dataset, LoadError};
use crate::split::{temporal_split, Split};
use crate::walkthrough::{self, Loaded};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Metric {
    Recall,
    Precision,
    #[serde(rename = "NDCG")]
    Ndcg,
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "recall" => Ok(Metric::Recall),
            "precision" => Ok(Metric::Precision),
            "ndcg" => Ok(Metric::Ndcg),
            other => Err(format!("unknown metric {other:?}")),
        }
    }
}

pub const ALL_METRICS: [Metric; 3] = [Metric::Recall, Metric::Precision, Metric::Ndcg];

/// Scenarios evaluated by `--scenarios all`: the five walkthrough scenarios
/// plus the unfiltered most-popular baseline.
pub fn all_scenarios() -> Vec<String> {
    let mut all: Vec<String> = walkthrough::WALKTHROUGH.iter().map(|s| s.to_string()).collect();
    all.push(walkthrough::POPULAR.to_string());
    all
}

#[derive(Clone, Debug)]
pub struct EvalConfig {
    pub data_path: PathBuf,
    pub holdout_fraction: f64,
    pub k: usize,
    pub metrics: BTreeSet<Metric>,
    pub scenarios: Vec<String>,
    pub seed: u64,
    pub exec: Exec,
}

impl EvalConfig {
    pub fn new(data_path: impl Into<PathBuf>) -> Self {
        Self {
            data_path: data_path.into(),
            holdout_fraction: 0.2,
            k: 10,
            metrics: ALL_METRICS.into(),
            scenarios: all_scenarios(),
            seed: 42,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Platform(#[from] uptrendz_core::Error),
    #[error("scenario {scenario}: {source}")]
    Serve { scenario: String, source: ServeError },
    #[error("holdout fraction must be in (0, 1), got {0}")]
    BadHoldout(f64),
    #[error("k must be positive")]
    BadK,
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("no user has enough ratings for the test set")]
    NoTestUsers,
    #[error("loader summary {loaded:?} differs from raw file counts {raw:?}")]
    CountMismatch { loaded: Counts, raw: Counts },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMetrics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recall_at_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_at_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ndcg_at_k: Option<f64>,
    /// Evaluated queries: test users, or test items for user recommenders.
    pub queries: usize,
    /// Queries answered by the most-popular fallback.
    pub fallbacks: usize,
}

impl ScenarioMetrics {
    fn new(mean: &Mean, fallbacks: usize, selected: &BTreeSet<Metric>) -> Self {
        let m = mean.mean();
        let pick = |metric, v| selected.contains(&metric).then_some(v);
        Self {
            recall_at_k: pick(Metric::Recall, m.recall_at_k),
            precision_at_k: pick(Metric::Precision, m.precision_at_k),
            ndcg_at_k: pick(Metric::Ndcg, m.ndcg_at_k),
            queries: mean.count,
            fallbacks,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitStats {
    pub train_events: usize,
    pub test_users: usize,
    pub test_events: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub k: usize,
    pub holdout_fraction: f64,
    pub seed: u64,
    /// Counts of the full walkthrough load, checked against the raw files.
    pub dataset: Counts,
    pub split: SplitStats,
    pub scenarios: BTreeMap<String, ScenarioMetrics>,
    /// Seconds per phase.
    pub wall_clock: BTreeMap<String, f64>,
}

impl MetricsReport {
    /// JSON without the wall-clock section; equal for equal inputs.
    pub fn deterministic_json(&self) -> String {
        let mut copy = self.clone();
        copy.wall_clock.clear();
        serde_json::to_string_pretty(&copy).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn recall(&self, scenario: &str) -> Option<f64> {
        self.scenarios.get(scenario)?.recall_at_k
    }

    pub fn table(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        let k = self.k;
        let mut out = format!(
            "{:<24} {:>10} {:>13} {:>10} {:>8} {:>9}\n",
            "scenario",
            format!("recall@{k}"),
            format!("precision@{k}"),
            format!("ndcg@{k}"),
            "queries",
            "fallback"
        );
        for (name, m) in &self.scenarios {
            out.push_str(&format!(
                "{:<24} {:>10} {:>13} {:>10} {:>8} {:>9}\n",
                name,
                fmt(m.recall_at_k),
                fmt(m.precision_at_k),
                fmt(m.ndcg_at_k),
                m.queries,
                m.fallbacks
            ));
        }
        out.push_str(&format!(
            "dataset: {} users, {} items, {} events; train {} events, {} test users, {} held-out\n",
            self.dataset.users,
            self.dataset.items,
            self.dataset.events,
            self.split.train_events,
            self.split.test_users,
            self.split.test_events
        ));
        let phases: Vec<String> = self.wall_clock.iter().map(|(p, s)| format!("{p} {s:.2}s")).collect();
        out.push_str(&format!("wall clock: {}\n", phases.join(", ")));
        out
    }
}

struct Timer(BTreeMap<String, f64>);

impl Timer {
    fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let started = Instant::now();
        let out = f();
        self.0.insert(phase.to_string(), started.elapsed().as_secs_f64());
        out
    }
}

fn check_config(config: &EvalConfig) -> Result<(), EvalError> {
    if !(config.holdout_fraction > 0.0 && config.holdout_fraction < 1.0) {
        return Err(EvalError::BadHoldout(config.holdout_fraction));
    }
    if config.k == 0 {
        return Err(EvalError::BadK);
    }
    let known = all_scenarios();
    if let Some(s) = config.scenarios.iter().find(|s| !known.contains(s)) {
        return Err(EvalError::UnknownScenario(s.clone()));
    }
    Ok(())
}

/// Loads the full dataset into the walkthrough domain and checks the
/// platform's counts against the raw files.
pub fn load_checked(platform: &Platform, config: &EvalConfig, data: &Dataset) -> Result<Loaded, EvalError> {
    let raw = movielens::raw_counts(&config.data_path)?;
    let loaded = walkthrough::load_all(platform, data)?;
    if loaded.summary != raw {
        return Err(EvalError::CountMismatch { loaded: loaded.summary, raw });
    }
    Ok(loaded)
}

/// Loads the dataset, ingests the training split into a second domain and
/// evaluates every requested scenario against the held-out ratings.
pub fn run_eval(platform: &Platform, config: &EvalConfig) -> Result<MetricsReport, EvalError> {
    check_config(config)?;
    let mut timer = Timer(BTreeMap::new());
    let data = timer.time("parse", || movielens::load(&config.data_path))?;
    let loaded = timer.time("load", || load_checked(platform, config, &data))?;
    let split = temporal_split(&data.ratings, config.holdout_fraction, config.seed);
    if split.test.is_empty() {
        return Err(EvalError::NoTestUsers);
    }
    let domain = timer.time("ingest_train", || -> Result<DomainId, EvalError> {
        let d = walkthrough::configure_named(platform, &format!("{} holdout", walkthrough::DOMAIN_NAME))?;
        walkthrough::ingest_catalog(platform, &d, &data)?;
        walkthrough::ingest_ratings(platform, &d, &split.train)?;
        Ok(d)
    })?;
    let mut scenarios = BTreeMap::new();
    for scenario in &config.scenarios {
        let metrics = timer.time(&format!("eval:{scenario}"), || evaluate(platform, &domain, &split, scenario, config))?;
        scenarios.insert(scenario.clone(), metrics);
    }
    Ok(MetricsReport {
        k: config.k,
        holdout_fraction: config.holdout_fraction,
        seed: config.seed,
        dataset: loaded.summary,
        split: SplitStats {
            train_events: split.train.len(),
            test_users: split.test_users(),
            test_events: split.test_events(),
        },
        scenarios,
        wall_clock: timer.0,
    })
}

/// Evaluates one scenario on an already ingested training domain.
pub fn evaluate(
    platform: &Platform,
    domain: &DomainId,
    split: &Split,
    scenario: &str,
    config: &EvalConfig,
) -> Result<ScenarioMetrics, EvalError> {
    let snapshot = platform.snapshot(domain.as_str())?;
    let k = config.k;
    let serve_err = |source| EvalError::Serve { scenario: scenario.to_string(), source };
    let mut mean = Mean::default();
    let mut fallbacks = 0;

    if scenario == walkthrough::USERS_FOR_MOVIE {
        let mut holders: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (user, held) in &split.test {
            for r in held {
                holders.entry(r.item.as_str()).or_default().insert(user.as_str());
            }
        }
        for (item, relevant) in &holders {
            let req = RecommendationRequest::for_session("offline-eval").item(*item);
            let outcome = match run_scenario_at_depth(&snapshot, scenario, &req, k, config.exec) {
                Err(ServeError::UnknownEntity(_)) => continue,
                other => other.map_err(serve_err)?,
            };
            fallbacks += usize::from(outcome.fallback_used);
            mean.add(score_list(&outcome.list.ids(), relevant, k));
        }
        return Ok(ScenarioMetrics::new(&mean, fallbacks, &config.metrics));
    }

    let mut seen: HashMap<&str, (BTreeSet<&str>, &str)> = HashMap::new();
    for r in &split.train {
        let entry = seen.entry(r.user.as_str()).or_insert_with(|| (BTreeSet::new(), r.item.as_str()));
        entry.0.insert(r.item.as_str());
        entry.1 = r.item.as_str();
    }
    let empty = (BTreeSet::new(), "");
    for (user, held) in &split.test {
        let (train_items, latest) = seen.get(user.as_str()).unwrap_or(&empty);
        let mut req = RecommendationRequest::for_user(user.as_str());
        if !latest.is_empty() {
            req = req.item(*latest);
        }
        let depth = k + train_items.len();
        let outcome = run_scenario_at_depth(&snapshot, scenario, &req, depth, config.exec).map_err(serve_err)?;
        fallbacks += usize::from(outcome.fallback_used);
        let ranked: Vec<&str> = outcome.list.ids().into_iter().filter(|id| !train_items.contains(id)).take(k).collect();
        let relevant: BTreeSet<&str> = held.iter().map(|r| r.item.as_str()).collect();
        mean.add(score_list(&ranked, &relevant, k));
    }
    Ok(ScenarioMetrics::new(&mean, fallbacks, &config.metrics))
}
