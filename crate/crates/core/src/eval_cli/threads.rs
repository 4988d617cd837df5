use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};

pub const THREADS_VAR: &str = "ZEROCLASS_THREADS";

/// Worker pool sized by `ZEROCLASS_THREADS`; unset or 0 means one per core.
pub fn thread_pool() -> Result<ThreadPool> {
    let n = match std::env::var(THREADS_VAR) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::param(format!("{THREADS_VAR} must be a non-negative integer, got {v:?}")))?,
        Err(_) => 0,
    };
    ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::param(format!("cannot start {n} worker threads: {e}")))
}
