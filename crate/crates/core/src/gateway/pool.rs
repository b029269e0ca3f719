use std::collections::HashMap;
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Instant;

use crossbeam_channel::{bounded, Sender, TrySendError};
use parking_lot::Mutex;

use super::dispatch::{run_scenario, to_response};
use super::{RecommendationRequest, RecommendationResponse, ServeError};
use crate::exec::Exec;
use crate::ids::DomainId;
use crate::platform::Platform;
use crate::sched::CpuGate;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GatewayOptions {
    pub workers_per_domain: usize,
    pub queue_depth: usize,
    /// Concurrent engine executions across all domains; defaults to the
    /// number of cores.
    pub cpu_permits: usize,
}

impl Default for GatewayOptions {
    fn default() -> Self {
        Self {
            workers_per_domain: 4,
            queue_depth: 64,
            cpu_permits: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl GatewayOptions {
    /// Defaults overridden by `UPTRENDZ_WORKERS_PER_DOMAIN`,
    /// `UPTRENDZ_QUEUE_DEPTH` and `UPTRENDZ_CPU_PERMITS`.
    pub fn from_env() -> Self {
        let mut options = Self::default();
        let read = |name: &str| std::env::var(name).ok().and_then(|v| v.parse::<usize>().ok()).filter(|n| *n > 0);
        if let Some(n) = read("UPTRENDZ_WORKERS_PER_DOMAIN") {
            options.workers_per_domain = n;
        }
        if let Some(n) = read("UPTRENDZ_QUEUE_DEPTH") {
            options.queue_depth = n;
        }
        if let Some(n) = read("UPTRENDZ_CPU_PERMITS") {
            options.cpu_permits = n;
        }
        options
    }
}

type Job = Box<dyn FnOnce() + Send>;

struct Pool {
    tx: Sender<Job>,
    workers: Vec<JoinHandle<()>>,
}

/// Serves recommendation requests on dedicated per-domain worker pools.
///
/// Each domain gets its own threads and its own bounded queue, so a flood
/// on one domain fills only that domain's queue and is rejected with
/// [`ServeError::Busy`]. Engine work runs inside a shared [`CpuGate`] that
/// hands CPU to the least-served domain first.
pub struct Gateway {
    platform: Arc<Platform>,
    gate: Arc<CpuGate>,
    options: GatewayOptions,
    pools: Mutex<HashMap<DomainId, Pool>>,
}

impl Gateway {
    pub fn new(platform: Arc<Platform>, options: GatewayOptions) -> Self {
        Self {
            gate: CpuGate::new(options.cpu_permits),
            platform,
            options,
            pools: Mutex::new(HashMap::new()),
        }
    }

    pub fn platform(&self) -> &Arc<Platform> {
        &self.platform
    }

    pub fn options(&self) -> &GatewayOptions {
        &self.options
    }

    fn sender(&self, domain: &DomainId) -> Sender<Job> {
        let mut pools = self.pools.lock();
        let pool = pools.entry(domain.clone()).or_insert_with(|| {
            let (tx, rx) = bounded::<Job>(self.options.queue_depth);
            let workers = (0..self.options.workers_per_domain)
                .map(|i| {
                    let rx = rx.clone();
                    std::thread::Builder::new()
                        .name(format!("serve-{domain}-{i}"))
                        .spawn(move || {
                            for job in rx {
                                job();
                            }
                        })
                        .expect("spawn worker thread")
                })
                .collect();
            Pool { tx, workers }
        });
        pool.tx.clone()
    }

    /// Queues a request on the domain's pool; `reply` is invoked on a worker
    /// thread with the result. Fails fast with `Busy` when the queue is full.
    pub fn submit(
        &self,
        domain: &str,
        scenario: &str,
        req: RecommendationRequest,
        reply: impl FnOnce(Result<RecommendationResponse, ServeError>) + Send + 'static,
    ) -> Result<(), ServeError> {
        let config = self
            .platform
            .domain_config(domain)
            .map_err(|_| ServeError::UnknownDomain(domain.to_string()))?;
        if config.scenario(scenario).is_none() {
            return Err(ServeError::UnknownScenario(scenario.to_string()));
        }
        let id = config.domain.id.clone();
        let started = Instant::now();
        let platform = self.platform.clone();
        let gate = self.gate.clone();
        let scenario = scenario.to_string();
        let job: Job = Box::new(move || {
            let result = gate.run(&id, || {
                let snapshot = platform
                    .snapshot(id.as_str())
                    .map_err(|_| ServeError::UnknownDomain(id.to_string()))?;
                let outcome = run_scenario(&snapshot, &scenario, &req, Exec::Sequential)?;
                let latency = started.elapsed().as_secs_f64() * 1e3;
                Ok(to_response(&snapshot, &scenario, outcome, latency))
            });
            reply(result);
        });
        match self.sender(&config.domain.id).try_send(job) {
            Ok(()) => Ok(()),
            Err(TrySendError::Full(_)) => Err(ServeError::Busy),
            Err(TrySendError::Disconnected(_)) => Err(ServeError::Unavailable),
        }
    }

    /// Blocking variant of [`Gateway::submit`].
    pub fn recommend(
        &self,
        domain: &str,
        scenario: &str,
        req: RecommendationRequest,
    ) -> Result<RecommendationResponse, ServeError> {
        let (tx, rx) = bounded(1);
        self.submit(domain, scenario, req, move |r| {
            let _ = tx.send(r);
        })?;
        rx.recv().unwrap_or(Err(ServeError::Unavailable))
    }
}

impl Drop for Gateway {
    fn drop(&mut self) {
        let pools: Vec<Pool> = self.pools.lock().drain().map(|(_, p)| p).collect();
        for pool in pools {
            drop(pool.tx);
            for worker in pool.workers {
                let _ = worker.join();
            }
        }
    }
}
