//! Parallel/sequential execution switch.
//!
//! Every data-parallel loop in the crate goes through [`map_indices`], so
//! switching modes never changes results, only wall time. Without the
//! `parallel` feature [`Execution::Parallel`] quietly runs sequentially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Evaluates `f(0..n)` and returns results in index order.
///
/// `threads` bounds the worker count in parallel mode; `None` uses the
/// global rayon pool.
pub fn map_indices<R, F>(n: usize, mode: Execution, threads: Option<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match mode {
        Execution::Sequential => (0..n).map(f).collect(),
        Execution::Parallel => parallel_map(n, threads, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<R, F>(n: usize, threads: Option<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;

    let run = || (0..n).into_par_iter().map(&f).collect();
    match threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(run),
            Err(_) => (0..n).map(&f).collect(),
        },
        None => run(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<R, F>(n: usize, _threads: Option<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}
