use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Source of simulation time. Blocking waits go through `sleep_ms` so a
/// simulated clock can advance instantly.
pub trait Clock {
    fn now_ms(&self) -> u64;
    fn sleep_ms(&self, ms: u64);
}

/// Shared, manually advanced millisecond clock. Clones observe the same time.
#[derive(Debug, Clone, Default)]
pub struct SimClock(Arc<AtomicU64>);

impl SimClock {
    pub fn new(start_ms: u64) -> Self {
        SimClock(Arc::new(AtomicU64::new(start_ms)))
    }

    /// Moves the clock forward to `t_ms`; never moves it backwards.
    pub fn advance_to(&self, t_ms: u64) {
        self.0.fetch_max(t_ms, Ordering::SeqCst);
    }
}

impl Clock for SimClock {
    fn now_ms(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }

    fn sleep_ms(&self, ms: u64) {
        self.0.fetch_add(ms, Ordering::SeqCst);
    }
}
