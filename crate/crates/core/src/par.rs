//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers dispatch to rayon when
//! asked to; without it everything runs on the calling thread. Results are
//! always collected in index order, so callers see identical output either
//! way.

/// Whether parallel execution is compiled in.
pub const PARALLEL_AVAILABLE: bool = cfg!(feature = "parallel");

/// Execution strategy for the data-parallel inner loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Parallel,
    Sequential,
}

impl Default for Execution {
    fn default() -> Self {
        if PARALLEL_AVAILABLE {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Map `f` over `0..n`, returning results in index order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Map `f` over a slice, returning results in slice order.
pub fn map_slice<I, T, F>(exec: Execution, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_indexed(exec, items.len(), |i| f(&items[i]))
}
