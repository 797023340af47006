//! Seed splitting for reproducible parallel Monte Carlo.
//!
//! Worker `w` of a run seeded with `seed` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `w`. Shots are dealt in
//! contiguous blocks: every worker gets `shots / workers`, and the first
//! `shots % workers` workers get one extra. Results are concatenated in
//! worker order, so the output depends only on `(seed, shots, workers)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const DEFAULT_WORKERS: usize = 8;

pub fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64);
    rng
}

pub fn split_shots(shots: usize, workers: usize) -> Vec<usize> {
    let workers = workers.max(1);
    let (base, extra) = (shots / workers, shots % workers);
    (0..workers).map(|w| base + usize::from(w < extra)).collect()
}

/// Runs `draw` `shots` times across `workers` seeded streams.
pub fn par_sample<T, F>(shots: usize, seed: u64, workers: usize, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    split_shots(shots, workers)
        .into_par_iter()
        .enumerate()
        .map(|(w, n)| {
            let mut rng = worker_rng(seed, w);
            (0..n).map(|_| draw(&mut rng)).collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
