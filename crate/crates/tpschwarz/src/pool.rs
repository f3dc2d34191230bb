//! Worker-pool plumbing: a rayon executor implementing the solver's map
//! interface, plus the policy resolving how many workers to use.

use rayon::prelude::*;
use tpschwarz_core::pint::ParallelMap;

/// Rayon-backed executor for window solves, with its own thread pool so
/// worker sizing is per-invocation instead of process-global.
pub struct WorkerPool {
    pool: rayon::ThreadPool,
    workers: usize,
}

impl WorkerPool {
    pub fn new(workers: usize) -> Result<Self, String> {
        let workers = workers.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| format!("worker pool construction failed: {e}"))?;
        Ok(Self { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

impl ParallelMap for WorkerPool {
    fn map<T: Send>(&self, count: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
        let f = &f;
        self.pool.install(|| (0..count).into_par_iter().map(move |i| f(i)).collect())
    }
}

/// Worker-count policy: an explicit request (flag first, then the
/// `TPS_WORKERS` variable) wins, otherwise all available cores; the result
/// is capped by the window count since one sweep has no finer parallelism.
pub fn resolve_workers(explicit: Option<usize>, windows: usize) -> Result<usize, String> {
    let requested = match explicit {
        Some(w) => Some(w),
        None => match std::env::var("TPS_WORKERS") {
            Ok(raw) => Some(
                raw.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("TPS_WORKERS must be a nonnegative integer, got {raw:?}"))?,
            ),
            Err(std::env::VarError::NotPresent) => None,
            Err(e) => return Err(format!("TPS_WORKERS is unreadable: {e}")),
        },
    };
    if requested == Some(0) {
        return Err("worker count must be at least 1".into());
    }
    let base = requested
        .unwrap_or_else(|| std::thread::available_parallelism().map(usize::from).unwrap_or(1));
    Ok(base.min(windows.max(1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_index_order() {
        let pool = WorkerPool::new(3).unwrap();
        let out = pool.map(17, |i| 2 * i + 1);
        assert_eq!(out, (0..17).map(|i| 2 * i + 1).collect::<Vec<_>>());
        assert_eq!(pool.workers(), 3);
    }

    #[test]
    fn map_handles_empty_and_single() {
        let pool = WorkerPool::new(2).unwrap();
        assert!(pool.map(0, |i| i).is_empty());
        assert_eq!(pool.map(1, |i| i + 5), vec![5]);
    }

    /// One test covers every env-dependent branch: set_var is process-wide
    /// and parallel tests would race on it.
    #[test]
    fn worker_resolution_precedence_and_cap() {
        std::env::remove_var("TPS_WORKERS");
        assert_eq!(resolve_workers(Some(3), 8).unwrap(), 3);
        assert_eq!(resolve_workers(Some(12), 8).unwrap(), 8, "capped by window count");
        assert!(resolve_workers(Some(0), 8).is_err());
        let default = resolve_workers(None, 1024).unwrap();
        assert!(default >= 1);

        std::env::set_var("TPS_WORKERS", "5");
        assert_eq!(resolve_workers(None, 8).unwrap(), 5);
        assert_eq!(resolve_workers(None, 2).unwrap(), 2, "env capped by window count");
        assert_eq!(resolve_workers(Some(1), 8).unwrap(), 1, "flag beats env");

        std::env::set_var("TPS_WORKERS", "zero");
        assert!(resolve_workers(None, 8).is_err());
        std::env::set_var("TPS_WORKERS", "0");
        assert!(resolve_workers(None, 8).is_err());
        std::env::remove_var("TPS_WORKERS");
    }
}
