//! Order-preserving fan-out for enumeration and seed sweeps.
//!
//! With the `parallel` feature (on by default) [`par_map`] runs on the rayon
//! pool, otherwise it is [`map_sequential`]. Both return results in input
//! order, so sweeps produce identical output either way.

pub fn map_sequential<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    F: Fn(T) -> R,
{
    items.into_iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn par_map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    map_sequential(items, f)
}

/// Whether [`par_map`] uses a thread pool in this build.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
