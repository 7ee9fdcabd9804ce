//! Grid construction and (optionally data-parallel) grid mapping.
//!
//! With the default `parallel` feature, [`map_grid`] fans work out over a
//! rayon thread pool; results always come back in input order, so output is
//! identical either way. [`map_grid_seq`] is the always-sequential path the
//! benchmark suite compares against.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "a grid needs at least two points");
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
        .collect()
}

/// Maps `f` over the grid, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map_grid<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Maps `f` over the grid, in parallel when the `parallel` feature is on.
#[cfg(not(feature = "parallel"))]
pub fn map_grid<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    map_grid_seq(items, f)
}

/// Sequential grid map; the fallback used without the `parallel` feature.
pub fn map_grid_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}
