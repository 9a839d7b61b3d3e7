//! Trial dispatch: rayon when the `parallel` feature is on, a plain loop otherwise.
//!
//! Results never depend on the mode. Per-trial outputs are collected in index
//! order, and count reductions are integer sums.

use std::ops::{Add, Range};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
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

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f` on every index and returns the results in index order.
pub fn map_collect<T, F>(exec: Execution, range: Range<u64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return range.into_par_iter().map(f).collect();
    }
    let _ = exec;
    range.map(f).collect()
}

/// Sums per-trial counters.
pub fn sum<T, F>(exec: Execution, range: Range<u64>, f: F) -> T
where
    T: Send + Default + Add<Output = T>,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return range.into_par_iter().map(f).reduce(T::default, |a, b| a + b);
    }
    let _ = exec;
    range.map(f).fold(T::default(), |a, b| a + b)
}

/// Fallible variant of [`map_collect`]; the first error by index wins.
pub fn try_map_collect<T, E, F>(exec: Execution, range: Range<u64>, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    map_collect(exec, range, f).into_iter().collect()
}
