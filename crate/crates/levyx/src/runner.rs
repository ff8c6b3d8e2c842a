//! Parallel map over path indices with ordered, thread-count independent results.

use anyhow::{Context, Result};
use rayon::prelude::*;

pub const THREADS_VAR: &str = "LEVYX_THREADS";

pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    pub fn with_threads(n: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().context("cannot build thread pool")?;
        Ok(Runner { pool })
    }

    /// Uses `LEVYX_THREADS` when set, otherwise rayon's default.
    pub fn from_env() -> Result<Self> {
        let n = match std::env::var(THREADS_VAR) {
            Ok(v) => v.trim().parse::<usize>().with_context(|| format!("{THREADS_VAR} must be a positive integer"))?,
            Err(_) => 0,
        };
        Self::with_threads(n)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// `f(0), …, f(n−1)` in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
