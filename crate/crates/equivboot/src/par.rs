//! Data-parallel map with a sequential fallback.
//!
//! All hot loops in this crate are index-driven maps whose work items own
//! path-derived random streams, so results never depend on scheduling. With
//! the `parallel` feature (the default) they run on the rayon pool;
//! without it they run as plain iterator chains.

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
