//! Order-preserving map helpers with a rayon path behind the `parallel`
//! feature. Both paths return results in input index order, so any fold
//! over the output is reproducible regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn map_indexed_seq<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed_par<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Dispatching entry point: parallel when the feature is enabled.
pub(crate) fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_indexed_par(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_seq(n, f)
    }
}
