//! Order-preserving parallel map with a sequential fallback.
//!
//! With the `parallel` feature disabled every call runs on the current thread.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parallelism {
    #[default]
    Sequential,
    /// Worker count; 0 uses every available core.
    Threads(usize),
}

impl Parallelism {
    pub fn from_workers(workers: usize) -> Self {
        if workers == 1 {
            Parallelism::Sequential
        } else {
            Parallelism::Threads(workers)
        }
    }
}

/// Apply `f` to every item and return results in input order.
pub fn par_map<T, R, F>(mode: Parallelism, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Send + Sync,
{
    match mode {
        Parallelism::Sequential => items.into_iter().map(f).collect(),
        Parallelism::Threads(n) => threaded(n, items, f),
    }
}

#[cfg(feature = "parallel")]
fn threaded<T, R, F>(n: usize, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Send + Sync,
{
    use rayon::prelude::*;
    let run = || items.into_par_iter().map(&f).collect();
    if n == 0 {
        return run();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

#[cfg(not(feature = "parallel"))]
fn threaded<T, R, F>(_n: usize, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Send + Sync,
{
    items.into_iter().map(f).collect()
}
