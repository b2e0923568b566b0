//! Fan-out of independent path computations.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};

/// Runs per-path closures, serially or on a private worker pool.
///
/// Results always come back in path-index order, so anything reduced from
/// them is independent of the worker count.
pub struct Executor {
    pool: Option<ThreadPool>,
}

impl Executor {
    pub fn sequential() -> Self {
        Executor { pool: None }
    }

    pub fn new(jobs: usize) -> Result<Self> {
        if jobs <= 1 {
            return Ok(Self::sequential());
        }
        let pool = ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;
        Ok(Executor { pool: Some(pool) })
    }

    pub fn jobs(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    pub fn map_paths<R, F>(&self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64) -> R + Sync + Send,
    {
        match &self.pool {
            None => (0..n as u64).map(f).collect(),
            Some(pool) => pool.install(|| (0..n as u64).into_par_iter().map(f).collect()),
        }
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::sequential()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_independent_of_jobs() {
        let f = |i: u64| i * i + 1;
        let a = Executor::sequential().map_paths(1000, f);
        let b = Executor::new(4).unwrap().map_paths(1000, f);
        assert_eq!(a, b);
        assert_eq!(Executor::new(4).unwrap().jobs(), 4);
    }
}
