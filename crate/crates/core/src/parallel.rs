//! Worker pool for replica-parallel experiments.
//!
//! The `DLE_THREADS` environment variable caps the number of workers. Results
//! are always collected in replica order, so outputs do not depend on the
//! worker count.

use std::sync::OnceLock;

use rayon::prelude::*;
use rayon::ThreadPool;

pub const THREADS_ENV: &str = "DLE_THREADS";

/// Worker count: `DLE_THREADS` when set to a positive integer, otherwise the
/// available parallelism.
pub fn thread_count() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(available)
}

fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(thread_count())
            .build()
            .expect("thread pool")
    })
}

/// `(0..count).map(f)` evaluated on the pool, in order.
pub fn par_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    pool().install(|| (0..count).into_par_iter().map(f).collect())
}

/// Like [`par_map`] for fallible work; the first error in replica order wins.
pub fn try_par_map<T, E, F>(count: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    par_map(count, f).into_iter().collect()
}
