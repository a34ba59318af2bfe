//! Task execution and random-stream policy.
//!
//! Every Monte Carlo style loop in the crate is split into fixed-size tasks.
//! Task `i` draws from its own ChaCha stream (master seed, stream id `i`), so
//! the values each task sees do not depend on how tasks are scheduled. With
//! the `parallel` feature the tasks run on the rayon pool; without it they run
//! in order on the calling thread. Either way the results are identical.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of samples handled by one task in the chunked samplers.
pub const TASK_CHUNK: usize = 1024;

/// Deterministic generator for task `task` under `master_seed`.
///
/// The stream id is the task index, so tasks never share key-stream words.
pub fn task_rng(master_seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(task);
    rng
}

/// Runs `f` for every task index in `0..n_tasks` and collects the results in
/// task order.
pub fn map_tasks<T, F>(n_tasks: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n_tasks).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n_tasks).map(f).collect()
    }
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Splits `n` samples into chunks of [`TASK_CHUNK`] and runs `f(task, start, len)`
/// for each chunk.
pub fn map_chunks<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, usize, usize) -> T + Sync + Send,
{
    let n_tasks = n.div_ceil(TASK_CHUNK);
    map_tasks(n_tasks, |task| {
        let start = task * TASK_CHUNK;
        let len = TASK_CHUNK.min(n - start);
        f(task, start, len)
    })
}

/// Caps the global pool size from `HD_THREADS`, if set. Has no effect when
/// the pool has already been initialised or the crate is built sequentially.
pub fn init_threads_from_env() {
    #[cfg(feature = "parallel")]
    if let Some(n) = std::env::var("HD_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| task_rng(7, 3).random()).collect();
        let b: Vec<u64> = (0..4).map(|_| task_rng(7, 3).random()).collect();
        assert_eq!(a, b);
        let x: u64 = task_rng(7, 3).random();
        let y: u64 = task_rng(7, 4).random();
        assert_ne!(x, y);
    }

    #[test]
    fn chunks_cover_range_in_order() {
        let parts = map_chunks(2500, |_, start, len| (start, len));
        assert_eq!(parts, vec![(0, 1024), (1024, 1024), (2048, 452)]);
    }
}
