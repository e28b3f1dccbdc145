//! Worker pool and order-preserving parallel maps.
//!
//! Every trial is a pure function of its index, results are collected in
//! index order and all reductions happen afterwards on one thread, so
//! outputs do not depend on the number of workers.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Result, RunError};

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "OPUC_THREADS";

/// Worker count requested through [`THREADS_ENV`], if any.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(RunError::Config(format!(
                "{THREADS_ENV} must be a positive integer, got `{raw}`"
            ))),
        },
    }
}

/// Pool with `threads` workers, or rayon's default when `None`.
pub fn build_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| RunError::Config(format!("cannot start worker pool: {e}")))
}

/// `f(i)` for every `i` in `range`, in index order.
pub fn ordered_map<T, F>(range: Range<u64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    range.into_par_iter().map(f).collect()
}

/// Like [`ordered_map`], stopping at the first error in index order.
pub fn try_ordered_map<T, E, F>(range: Range<u64>, f: F) -> std::result::Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> std::result::Result<T, E> + Sync + Send,
{
    ordered_map(range, f).into_iter().collect()
}
