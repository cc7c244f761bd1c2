// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Data-parallel execution of independent work items.
//!
//! Results always come back in index order, so any reduction performed by
//! the caller is independent of the number of workers.

/// How independent work items are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    /// A dedicated pool with `workers` threads; `0` picks the machine default.
    /// Without the `parallel` feature this runs sequentially.
    Parallel { workers: usize },
}

impl Execution {
    /// Parallel with the default worker count when the `parallel` feature is
    /// enabled, sequential otherwise.
    pub fn auto() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel { workers: 0 }
        } else {
            Execution::Sequential
        }
    }

    pub fn with_threads(threads: Option<usize>) -> Self {
        match threads {
            Some(1) => Execution::Sequential,
            Some(n) => Execution::Parallel { workers: n },
            None => Self::auto(),
        }
    }

    /// Evaluates `f(0), …, f(n − 1)` and returns the results in order.
    pub fn map<R, F>(&self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match *self {
            Execution::Sequential => (0..n).map(f).collect(),
            Execution::Parallel { workers } => parallel_map(workers, n, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<R, F>(workers: usize, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
        Err(_) => (0..n).map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<R, F>(_workers: usize, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = Execution::Sequential.map(100, |i| i * i);
        for workers in [1, 3, 0] {
            let par = Execution::Parallel { workers }.map(100, |i| i * i);
            assert_eq!(seq, par);
        }
    }

    #[test]
    fn thread_option() {
        assert_eq!(Execution::with_threads(Some(1)), Execution::Sequential);
        assert_eq!(
            Execution::with_threads(Some(4)),
            Execution::Parallel { workers: 4 }
        );
    }
}
