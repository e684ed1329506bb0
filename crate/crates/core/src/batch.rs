//! Solving many independent LPs at once.
//!
//! With the `parallel` feature (on by default) jobs run on a rayon pool
//! whose size can be pinned with `EXACTLP_THREADS`. Without it, every
//! entry point runs sequentially.

use crate::boost::{solve_exact, ExactResult, SolveConfig};
use crate::rational::RationalLp;

pub const THREADS_ENV: &str = "EXACTLP_THREADS";

/// Worker count requested through `EXACTLP_THREADS`, if any.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Solves every LP in `lps`, in parallel when available. Results keep the
/// input order.
pub fn solve_batch(lps: &[RationalLp], config: &SolveConfig) -> Vec<ExactResult> {
    map_jobs(lps, |lp| solve_exact(lp, config))
}

pub fn solve_batch_sequential(lps: &[RationalLp], config: &SolveConfig) -> Vec<ExactResult> {
    lps.iter().map(|lp| solve_exact(lp, config)).collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn map_jobs<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    let run = || items.par_iter().map(&f).collect();
    match threads_from_env() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_jobs<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}
