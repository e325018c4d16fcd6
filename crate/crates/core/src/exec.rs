//! Ordered map over independent work items, parallel when the `parallel`
//! feature is enabled.

use crate::error::{CfpError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Worker pool with the given thread count, or rayon's default.
    #[default]
    Parallel,
    ParallelWith(usize),
}

impl Execution {
    /// `threads == Some(1)` is sequential; `None` uses the default pool.
    pub fn from_threads(threads: Option<usize>) -> Self {
        match threads {
            Some(1) => Execution::Sequential,
            Some(0) | None => Execution::Parallel,
            Some(t) => Execution::ParallelWith(t),
        }
    }
}

/// Applies `f` to every item and returns the results in input order,
/// independent of scheduling.
pub fn map_ordered<T, R, F>(exec: Execution, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        Execution::Sequential => Ok(items.iter().map(f).collect()),
        Execution::Parallel => parallel(None, items, f),
        Execution::ParallelWith(t) => parallel(Some(t), items, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel<T, R, F>(threads: Option<usize>, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match threads {
        None => Ok(items.par_iter().map(f).collect()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CfpError::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(|| items.par_iter().map(f).collect()))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel<T, R, F>(threads: Option<usize>, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if threads == Some(0) {
        return Err(CfpError::InvalidConfig("zero threads".into()));
    }
    Ok(items.iter().map(f).collect())
}
