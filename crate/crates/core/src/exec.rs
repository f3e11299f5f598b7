//! Execution-mode plumbing: data-parallel loops with a sequential fallback.
//!
//! Ensemble runs, sweep points and solver multi-starts are independent
//! computations. With the `parallel` feature (default) they fan out over a
//! rayon pool; without it, or with [`ExecMode::Sequential`], they run in
//! order on the calling thread. Results are always collected in index order,
//! so outputs are identical across modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How to run a batch of independent tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl Default for ExecMode {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        ExecMode::Parallel
    }

    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        ExecMode::Sequential
    }
}

/// Runs `task` for every index in `0..n`, returning results in index order.
pub fn run_indexed<T, F>(mode: ExecMode, n: usize, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(task).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..n).into_par_iter().map(task).collect(),
        #[cfg(not(feature = "parallel"))]
        ExecMode::Parallel => (0..n).map(task).collect(),
    }
}

/// Caps the rayon worker count for this process. No-op when `workers` is 0
/// or the pool was already initialized; without the `parallel` feature it
/// does nothing at all.
pub fn configure_workers(workers: usize) {
    #[cfg(feature = "parallel")]
    {
        if workers > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
}
