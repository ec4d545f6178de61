//! Ordered maps over independent jobs.
//!
//! Results come back in input order regardless of scheduling, so outputs do
//! not depend on the worker count. Without the `parallel` feature every map
//! runs sequentially.

/// Sequential map.
pub fn map_seq<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Data-parallel map on a pool of `workers` threads (`0` uses the global
/// pool).
#[cfg(feature = "parallel")]
pub fn map_par<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    if workers == 0 {
        return items.par_iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(f).collect()),
        Err(_) => map_seq(items, f),
    }
}

/// Parallel when built with `parallel` and `workers != 1`, else sequential.
pub fn map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        if workers != 1 {
            return map_par(items, workers, f);
        }
    }
    let _ = workers;
    map_seq(items, f)
}
