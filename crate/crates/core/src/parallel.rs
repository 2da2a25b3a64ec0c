//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (on by default) work is spread over a rayon
//! pool; without it everything runs on the calling thread. Results always come
//! back in index order, so reductions over them are deterministic.

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Execution {
    Sequential,
    /// `workers = None` uses the global rayon pool.
    Parallel { workers: Option<usize> },
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel { workers: None }
        } else {
            Execution::Sequential
        }
    }
}

/// `(0..count).map(f)` collected in order, stopping at the first error.
pub fn try_map_indexed<T, F>(count: u64, execution: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    match execution {
        Execution::Sequential => (0..count).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel { workers } => {
            use rayon::prelude::*;
            let run = || (0..count).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
            match workers {
                None => run(),
                Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build() {
                    Ok(pool) => pool.install(run),
                    Err(_) => (0..count).map(&f).collect(),
                },
            }
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel { .. } => (0..count).map(f).collect(),
    }
}

/// Infallible variant of [`try_map_indexed`] over a slice.
pub fn map_slice<A, T, F>(items: &[A], execution: Execution, f: F) -> Vec<T>
where
    A: Sync,
    T: Send,
    F: Fn(&A) -> T + Sync + Send,
{
    try_map_indexed(items.len() as u64, execution, |i| Ok(f(&items[i as usize])))
        .expect("infallible map")
}
