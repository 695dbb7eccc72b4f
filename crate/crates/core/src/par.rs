//! Ordered parallel maps. Each index is computed independently and the
//! results are collected in index order, so downstream reductions see the
//! same sequence regardless of scheduling.

use crate::prelude::*;

#[cfg(feature = "std")]
pub(crate) fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "std"))]
pub(crate) fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
