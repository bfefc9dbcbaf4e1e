use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

/// Spaces call starts at least `min_interval` apart and caps the number of
/// calls in flight. Shared by every caller of one provider instance.
#[derive(Debug)]
pub struct RateLimiter {
    min_interval: Duration,
    max_concurrent: usize,
    last_start: Mutex<Option<Instant>>,
    in_flight: Mutex<usize>,
    released: Condvar,
}

/// Held while a call is in flight.
pub struct Permit<'a> {
    limiter: &'a RateLimiter,
}

impl RateLimiter {
    pub fn new(min_interval: Duration, max_concurrent: usize) -> Self {
        Self {
            min_interval,
            max_concurrent: max_concurrent.max(1),
            last_start: Mutex::new(None),
            in_flight: Mutex::new(0),
            released: Condvar::new(),
        }
    }

    pub fn unlimited() -> Self {
        Self::new(Duration::ZERO, usize::MAX)
    }

    pub fn min_interval(&self) -> Duration {
        self.min_interval
    }

    pub fn max_concurrent(&self) -> usize {
        self.max_concurrent
    }

    /// Blocks until a concurrency slot is free and the interval since the
    /// previous start has elapsed.
    pub fn acquire(&self) -> Permit<'_> {
        {
            let mut in_flight = self.in_flight.lock().expect("rate limiter poisoned");
            while *in_flight >= self.max_concurrent {
                in_flight = self.released.wait(in_flight).expect("rate limiter poisoned");
            }
            *in_flight += 1;
        }
        {
            // Held across the sleep so each start is measured from the
            // previous call's actual start, not its scheduled one.
            let mut last = self.last_start.lock().expect("rate limiter poisoned");
            if let Some(prev) = *last {
                let ready = prev + self.min_interval;
                let now = Instant::now();
                if ready > now {
                    std::thread::sleep(ready - now);
                }
            }
            *last = Some(Instant::now());
        }
        Permit { limiter: self }
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut in_flight = self.limiter.in_flight.lock().expect("rate limiter poisoned");
        *in_flight -= 1;
        self.limiter.released.notify_one();
    }
}
