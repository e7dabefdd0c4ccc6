//! Deterministic chunked map/reduce that runs on rayon when the `parallel`
//! feature is on and sequentially otherwise. Results are always collected in
//! chunk order, so the outcome never depends on the thread count.

use std::ops::Range;

pub(crate) fn chunk_ranges(total: u64, chunk: u64) -> Vec<Range<u64>> {
    let chunk = chunk.max(1);
    (0..total.div_ceil(chunk))
        .map(|c| c * chunk..((c + 1) * chunk).min(total))
        .collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn map_chunks<T, F>(total: u64, chunk: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync + Send,
{
    use rayon::prelude::*;
    chunk_ranges(total, chunk).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_chunks<T, F>(total: u64, chunk: u64, f: F) -> Vec<T>
where
    F: Fn(Range<u64>) -> T,
{
    chunk_ranges(total, chunk).into_iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn map_items<I, T, F>(items: Vec<I>, f: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_items<I, T, F>(items: Vec<I>, f: F) -> Vec<T>
where
    F: Fn(I) -> T,
{
    items.into_iter().map(f).collect()
}
