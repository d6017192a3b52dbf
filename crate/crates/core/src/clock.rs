//! Injectable time sources for measured overheads.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

/// Monotonic time source reporting seconds since an arbitrary origin.
pub trait Clock: Sync {
    fn now(&self) -> f64;

    /// Seconds elapsed since an earlier reading of this clock.
    fn elapsed_since(&self, start: f64) -> f64 {
        (self.now() - start).max(0.0)
    }
}

/// Runs `f` and returns its result with the elapsed seconds.
pub fn measure<T>(clock: &dyn Clock, f: impl FnOnce() -> T) -> (T, f64) {
    let start = clock.now();
    let out = f();
    (out, clock.elapsed_since(start))
}

/// Wall clock backed by [`Instant`].
#[derive(Debug)]
pub struct SystemClock {
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}

/// Deterministic clock that advances by a fixed step on every reading.
///
/// A start/stop measurement therefore always reports exactly one step.
#[derive(Debug)]
pub struct FixedClock {
    step: f64,
    ticks: AtomicU64,
}

impl FixedClock {
    pub const DEFAULT_STEP: f64 = 1.0e-6;

    pub fn new(step: f64) -> Self {
        Self {
            step,
            ticks: AtomicU64::new(0),
        }
    }
}

impl Default for FixedClock {
    fn default() -> Self {
        Self::new(Self::DEFAULT_STEP)
    }
}

impl Clock for FixedClock {
    fn now(&self) -> f64 {
        self.ticks.fetch_add(1, Ordering::SeqCst) as f64 * self.step
    }

    fn elapsed_since(&self, _start: f64) -> f64 {
        self.now();
        self.step
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_clock_measures_one_step() {
        let clock = FixedClock::new(0.5);
        let (v, dt) = measure(&clock, || 7);
        assert_eq!((v, dt), (7, 0.5));
        let (_, dt) = measure(&clock, || ());
        assert_eq!(dt, 0.5);
    }

    #[test]
    fn system_clock_is_monotone() {
        let c = SystemClock::new();
        let a = c.now();
        let b = c.now();
        assert!(b >= a);
    }
}
