use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

/// Counting semaphore bounding the number of requests in flight.
#[derive(Debug)]
pub(crate) struct InFlightLimit {
    max: usize,
    used: Mutex<usize>,
    freed: Condvar,
}

pub(crate) struct Permit<'a> {
    limit: &'a InFlightLimit,
}

impl InFlightLimit {
    pub(crate) fn new(max: usize) -> Self {
        Self {
            max: max.max(1),
            used: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    pub(crate) fn acquire(&self) -> Permit<'_> {
        let mut used = self.used.lock().unwrap_or_else(|e| e.into_inner());
        while *used >= self.max {
            used = self.freed.wait(used).unwrap_or_else(|e| e.into_inner());
        }
        *used += 1;
        Permit { limit: self }
    }

    #[cfg(test)]
    pub(crate) fn in_use(&self) -> usize {
        *self.used.lock().unwrap()
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut used = self.limit.used.lock().unwrap_or_else(|e| e.into_inner());
        *used -= 1;
        self.limit.freed.notify_one();
    }
}

/// Spaces consecutive requests to one host at least `min_interval` apart.
#[derive(Debug)]
pub(crate) struct RateLimit {
    min_interval: Duration,
    next_slot: Mutex<Option<Instant>>,
}

impl RateLimit {
    pub(crate) fn per_second(requests: f64) -> Self {
        let min_interval = if requests > 0.0 {
            Duration::from_secs_f64(1.0 / requests)
        } else {
            Duration::ZERO
        };
        Self {
            min_interval,
            next_slot: Mutex::new(None),
        }
    }

    pub(crate) fn wait(&self) {
        if self.min_interval.is_zero() {
            return;
        }
        let wake = {
            let mut slot = self.next_slot.lock().unwrap_or_else(|e| e.into_inner());
            let now = Instant::now();
            let start = match *slot {
                Some(t) if t > now => t,
                _ => now,
            };
            *slot = Some(start + self.min_interval);
            start
        };
        let now = Instant::now();
        if wake > now {
            std::thread::sleep(wake - now);
        }
    }
}

/// Maps `f` over `items` on up to `parallelism` scoped threads. `emit` sees
/// each result in input order as soon as its predecessors are done; the
/// returned vector is in input order too.
pub(crate) fn ordered_map<T, R, F, E>(items: &[T], parallelism: usize, f: F, mut emit: E) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
    E: FnMut(usize, &R),
{
    use std::collections::BTreeMap;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::mpsc;

    let workers = parallelism.max(1).min(items.len().max(1));
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, R)>();
    let mut out: Vec<R> = Vec::with_capacity(items.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, f) = (&next, &f);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                if tx.send((i, f(i, &items[i]))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        for (i, r) in rx {
            pending.insert(i, r);
            while let Some(r) = pending.remove(&out.len()) {
                emit(out.len(), &r);
                out.push(r);
            }
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn limit_never_exceeds_cap() {
        let limit = Arc::new(InFlightLimit::new(2));
        let peak = Arc::new(Mutex::new(0usize));
        std::thread::scope(|s| {
            for _ in 0..8 {
                let limit = limit.clone();
                let peak = peak.clone();
                s.spawn(move || {
                    let _p = limit.acquire();
                    let now = limit.in_use();
                    let mut pk = peak.lock().unwrap();
                    *pk = (*pk).max(now);
                    drop(pk);
                    std::thread::sleep(Duration::from_millis(5));
                });
            }
        });
        assert!(*peak.lock().unwrap() <= 2);
        assert_eq!(limit.in_use(), 0);
    }

    #[test]
    fn rate_limit_spaces_requests() {
        let rl = RateLimit::per_second(200.0);
        let start = Instant::now();
        for _ in 0..4 {
            rl.wait();
        }
        assert!(start.elapsed() >= Duration::from_millis(14));
    }

    #[test]
    fn ordered_map_keeps_input_order() {
        let items: Vec<u64> = (0..40).collect();
        let mut seen = Vec::new();
        let out = ordered_map(
            &items,
            6,
            |_, x| {
                std::thread::sleep(Duration::from_micros((40 - x) * 50));
                x * 2
            },
            |i, r| seen.push((i, *r)),
        );
        assert_eq!(out, items.iter().map(|x| x * 2).collect::<Vec<_>>());
        assert_eq!(seen, out.iter().copied().enumerate().collect::<Vec<_>>());
        assert!(ordered_map(&Vec::<u8>::new(), 4, |_, x| *x, |_, _| {}).is_empty());
    }
}
