//! Execution policy for the data-parallel loops.
//!
//! Every parallel loop in the crate has a sequential twin with identical
//! floating-point evaluation order, so results are bit-identical whichever
//! policy is selected. Reductions go through [`chunked_sum`], which fixes the
//! partial-sum boundaries independently of the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Number of elements per partial sum in deterministic reductions.
const REDUCE_CHUNK: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon-backed; identical to `Sequential` when the `parallel` feature is off.
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

/// Sets the global rayon pool size. Returns false when the pool was already
/// initialised or the crate was built without the `parallel` feature.
pub fn configure_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

/// Sum of `f` over `items`, with partial sums taken over fixed-size chunks.
pub fn chunked_sum<T, F>(exec: Execution, items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync,
{
    let partial = |chunk: &[T]| chunk.iter().map(&f).sum::<f64>();
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        let parts: Vec<f64> = items.par_chunks(REDUCE_CHUNK).map(partial).collect();
        return parts.iter().sum();
    }
    let _ = exec;
    items.chunks(REDUCE_CHUNK).map(partial).sum()
}

/// Indexed sum over `0..n`, one partial per index, combined in index order.
pub fn indexed_sum<F>(exec: Execution, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        let parts: Vec<f64> = (0..n).into_par_iter().map(&f).collect();
        return parts.iter().sum();
    }
    let _ = exec;
    (0..n).map(f).sum()
}
