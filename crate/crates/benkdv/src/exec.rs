//! Data-parallel map helpers.
//!
//! Everything parallel in this crate is map-shaped: results are collected in
//! index order and reduced sequentially afterwards, so parallel and
//! sequential execution produce bit-identical output. With the `parallel`
//! feature disabled both entry points run sequentially.

/// Applies `f` to `0..len` and collects results in index order, in parallel
/// when the `parallel` feature is enabled.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_seq(len, f)
    }
}

/// Sequential reference implementation of [`map_indexed`].
pub fn map_indexed_seq<T, F>(len: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..len).map(f).collect()
}

/// Runs `f` inside a rayon pool of exactly `workers` threads; with one worker
/// or without the `parallel` feature it just calls `f`.
pub fn with_workers<T, F>(workers: usize, f: F) -> T
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("rayon pool construction cannot fail with these settings");
            return pool.install(f);
        }
        f()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}
