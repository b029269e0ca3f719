//! Cross-domain CPU admission.
//!
//! Every request worker holds a CPU permit while it computes. When permits
//! are contended, the domain with the least recently attained CPU time gets
//! the next one. Engines call [`checkpoint`] inside long loops; a worker that
//! reaches a checkpoint while a less-served domain is waiting hands its
//! permit over and queues again. A saturated domain therefore delays a
//! lightly loaded one by at most one checkpoint interval, even on a
//! single core.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use parking_lot::{Condvar, Mutex};

use crate::ids::DomainId;

/// Decay time constant for attained-service accounting.
const USAGE_HALF_LIFE: Duration = Duration::from_millis(500);
/// Checkpoints between contention checks.
const CHECK_EVERY: u32 = 32;

#[derive(Default)]
struct Tenant {
    usage: f64,
    updated: Option<Instant>,
    waiting: usize,
}

impl Tenant {
    fn decayed(&self, now: Instant) -> f64 {
        match self.updated {
            Some(t) => {
                let dt = now.saturating_duration_since(t).as_secs_f64();
                self.usage * (-dt * std::f64::consts::LN_2 / USAGE_HALF_LIFE.as_secs_f64()).exp()
            }
            None => 0.0,
        }
    }

    fn charge(&mut self, now: Instant, seconds: f64) {
        self.usage = self.decayed(now) + seconds;
        self.updated = Some(now);
    }
}

#[derive(Default)]
struct GateState {
    running: usize,
    tenants: HashMap<DomainId, Tenant>,
}

impl GateState {
    /// The waiting tenant with the least decayed usage.
    fn most_deserving(&self, now: Instant) -> Option<(&DomainId, f64)> {
        self.tenants
            .iter()
            .filter(|(_, t)| t.waiting > 0)
            .map(|(id, t)| (id, t.decayed(now)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)))
    }
}

pub struct CpuGate {
    permits: usize,
    state: Mutex<GateState>,
    released: Condvar,
    waiting: AtomicUsize,
}

impl CpuGate {
    pub fn new(permits: usize) -> Arc<Self> {
        Arc::new(Self {
            permits: permits.max(1),
            state: Mutex::new(GateState::default()),
            released: Condvar::new(),
            waiting: AtomicUsize::new(0),
        })
    }

    /// One permit per available core.
    pub fn per_core() -> Arc<Self> {
        Self::new(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn permits(&self) -> usize {
        self.permits
    }

    fn acquire(&self, domain: &DomainId) {
        let mut state = self.state.lock();
        state.tenants.entry(domain.clone()).or_default().waiting += 1;
        self.waiting.fetch_add(1, Ordering::SeqCst);
        loop {
            let now = Instant::now();
            let free = state.running < self.permits;
            if free && state.most_deserving(now).is_some_and(|(d, _)| d == domain) {
                break;
            }
            self.released.wait(&mut state);
        }
        state.running += 1;
        state.tenants.get_mut(domain).expect("registered above").waiting -= 1;
        let others = self.waiting.fetch_sub(1, Ordering::SeqCst) > 1;
        if others && state.running < self.permits {
            // the next most deserving waiter may now be eligible
            self.released.notify_all();
        }
    }

    fn release(&self, domain: &DomainId, used: Duration) {
        let mut state = self.state.lock();
        state.running -= 1;
        state
            .tenants
            .entry(domain.clone())
            .or_default()
            .charge(Instant::now(), used.as_secs_f64());
        drop(state);
        self.released.notify_all();
    }

    /// Whether some other domain with less attained service is waiting.
    fn should_yield(&self, domain: &DomainId, running_for: Duration) -> bool {
        if self.waiting.load(Ordering::SeqCst) == 0 {
            return false;
        }
        let state = self.state.lock();
        let now = Instant::now();
        let mine = state
            .tenants
            .get(domain)
            .map_or(0.0, |t| t.decayed(now))
            + running_for.as_secs_f64();
        state
            .most_deserving(now)
            .is_some_and(|(d, usage)| d != domain && usage < mine)
    }

    /// Runs `f` holding a CPU permit on behalf of `domain`. Checkpoints
    /// reached inside `f` on this thread may temporarily give the permit up.
    pub fn run<R>(self: &Arc<Self>, domain: &DomainId, f: impl FnOnce() -> R) -> R {
        self.acquire(domain);
        let slot = Slot { gate: self.clone(), domain: domain.clone(), since: Instant::now(), ticks: 0 };
        let previous = CURRENT.with(|c| c.borrow_mut().replace(slot));
        struct Restore(Option<Slot>);
        impl Drop for Restore {
            fn drop(&mut self) {
                let mine = CURRENT.with(|c| std::mem::replace(&mut *c.borrow_mut(), self.0.take()));
                if let Some(slot) = mine {
                    slot.gate.release(&slot.domain, slot.since.elapsed());
                }
            }
        }
        let _restore = Restore(previous);
        f()
    }
}

struct Slot {
    gate: Arc<CpuGate>,
    domain: DomainId,
    since: Instant,
    ticks: u32,
}

thread_local! {
    static CURRENT: RefCell<Option<Slot>> = const { RefCell::new(None) };
}

/// Yield point for long-running engine loops. A no-op unless the current
/// thread runs inside [`CpuGate::run`].
#[inline]
pub fn checkpoint() {
    CURRENT.with(|c| {
        let mut guard = c.borrow_mut();
        let Some(slot) = guard.as_mut() else { return };
        slot.ticks += 1;
        if slot.ticks < CHECK_EVERY {
            return;
        }
        slot.ticks = 0;
        let running_for = slot.since.elapsed();
        if slot.gate.should_yield(&slot.domain, running_for) {
            slot.gate.release(&slot.domain, running_for);
            slot.gate.acquire(&slot.domain);
            slot.since = Instant::now();
        }
    });
}
