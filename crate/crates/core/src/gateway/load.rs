use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use serde::Serialize;

use super::{Gateway, RecommendationRequest};

/// Closed-loop client load against one scenario.
#[derive(Clone, Debug)]
pub struct LoadProfile {
    pub domain: String,
    pub scenario: String,
    /// Cycled through by every client.
    pub requests: Vec<RecommendationRequest>,
    pub clients: usize,
    /// Requests per client; `None` keeps the clients running until every
    /// counted profile has finished.
    pub count: Option<usize>,
    /// Client back-off after a `Busy` rejection.
    pub busy_backoff: Duration,
    /// Pause between a response and the client's next request.
    pub think_time: Duration,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LoadReport {
    pub domain: String,
    pub ok: usize,
    pub busy: usize,
    pub client_errors: usize,
    pub server_errors: usize,
    /// Client-observed latency of successful requests, sorted ascending.
    pub latencies_ms: Vec<f64>,
}

impl LoadReport {
    /// Nearest-rank percentile over successful requests.
    pub fn percentile(&self, p: f64) -> f64 {
        percentile(&self.latencies_ms, p)
    }

    pub fn total(&self) -> usize {
        self.ok + self.busy + self.client_errors + self.server_errors
    }
}

/// Nearest-rank percentile of an ascending slice; 0 for an empty slice.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Runs all profiles concurrently against one gateway and reports per
/// profile, in input order.
pub fn serve_isolated(gateway: &Gateway, profiles: &[LoadProfile]) -> Vec<LoadReport> {
    let counted = profiles.iter().filter(|p| p.count.is_some()).count();
    let remaining = AtomicUsize::new(profiles.iter().filter(|p| p.count.is_some()).map(|p| p.clients).sum());
    let stop = AtomicBool::new(counted == 0);
    std::thread::scope(|scope| {
        let handles: Vec<Vec<_>> = profiles
            .iter()
            .map(|profile| {
                (0..profile.clients)
                    .map(|c| {
                        let (stop, remaining) = (&stop, &remaining);
                        scope.spawn(move || {
                            let report = drive(gateway, profile, c, stop);
                            if profile.count.is_some() && remaining.fetch_sub(1, Ordering::SeqCst) == 1 {
                                stop.store(true, Ordering::SeqCst);
                            }
                            report
                        })
                    })
                    .collect()
            })
            .collect();
        profiles
            .iter()
            .zip(handles)
            .map(|(profile, clients)| {
                let mut merged = LoadReport { domain: profile.domain.clone(), ..LoadReport::default() };
                for handle in clients {
                    let r = handle.join().expect("load client panicked");
                    merged.ok += r.ok;
                    merged.busy += r.busy;
                    merged.client_errors += r.client_errors;
                    merged.server_errors += r.server_errors;
                    merged.latencies_ms.extend(r.latencies_ms);
                }
                merged.latencies_ms.sort_by(f64::total_cmp);
                merged
            })
            .collect()
    })
}

fn drive(gateway: &Gateway, profile: &LoadProfile, client: usize, stop: &AtomicBool) -> LoadReport {
    let mut report = LoadReport::default();
    if profile.requests.is_empty() {
        return report;
    }
    let stride = profile.clients.max(1);
    let mut i = client;
    loop {
        match profile.count {
            Some(n) if report.total() >= n => break,
            None if stop.load(Ordering::SeqCst) => break,
            _ => {}
        }
        let req = profile.requests[i % profile.requests.len()].clone();
        i += stride;
        let started = Instant::now();
        match gateway.recommend(&profile.domain, &profile.scenario, req) {
            Ok(_) => {
                report.ok += 1;
                report.latencies_ms.push(started.elapsed().as_secs_f64() * 1e3);
                if !profile.think_time.is_zero() {
                    std::thread::sleep(profile.think_time);
                }
            }
            Err(e) if e.status() == 429 => {
                report.busy += 1;
                std::thread::sleep(profile.busy_backoff);
            }
            Err(e) if e.status() < 500 => report.client_errors += 1,
            Err(_) => report.server_errors += 1,
        }
    }
    report
}
