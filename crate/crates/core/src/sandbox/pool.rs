use std::sync::{Condvar, Mutex};

/// Counting semaphore bounding how many child processes run at once.
#[derive(Debug)]
pub struct WorkerPool {
    capacity: usize,
    available: Mutex<usize>,
    freed: Condvar,
}

impl WorkerPool {
    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(1);
        WorkerPool {
            capacity,
            available: Mutex::new(capacity),
            freed: Condvar::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Blocks until a slot is free.
    pub fn acquire(&self) -> PoolPermit<'_> {
        let mut available = self.available.lock().unwrap_or_else(|e| e.into_inner());
        while *available == 0 {
            available = self.freed.wait(available).unwrap_or_else(|e| e.into_inner());
        }
        *available -= 1;
        PoolPermit { pool: self }
    }

    pub fn in_use(&self) -> usize {
        self.capacity - *self.available.lock().unwrap_or_else(|e| e.into_inner())
    }
}

pub struct PoolPermit<'a> {
    pool: &'a WorkerPool,
}

impl Drop for PoolPermit<'_> {
    fn drop(&mut self) {
        let mut available = self.pool.available.lock().unwrap_or_else(|e| e.into_inner());
        *available += 1;
        self.pool.freed.notify_one();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;
    use std::thread;
    use std::time::Duration;

    #[test]
    fn never_exceeds_capacity() {
        let pool = Arc::new(WorkerPool::new(2));
        let peak = Arc::new(AtomicUsize::new(0));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let pool = Arc::clone(&pool);
                let peak = Arc::clone(&peak);
                thread::spawn(move || {
                    let _permit = pool.acquire();
                    peak.fetch_max(pool.in_use(), Ordering::SeqCst);
                    thread::sleep(Duration::from_millis(10));
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(peak.load(Ordering::SeqCst) <= 2);
        assert_eq!(pool.in_use(), 0);
    }

    #[test]
    fn zero_capacity_is_clamped() {
        assert_eq!(WorkerPool::new(0).capacity(), 1);
    }
}
