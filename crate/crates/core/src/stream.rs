//! Seeded random streams and the deterministic replicate runner.
//!
//! Replicates are grouped into fixed-size chunks; chunk `k` always draws from
//! ChaCha stream `k` of the run seed, whatever the worker count. Results are
//! gathered in chunk order, so every reduction is bit-identical across thread
//! counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type SeededStream = ChaCha8Rng;

/// Replicates per chunk. Changing it changes every seeded result.
pub const CHUNK: usize = 1024;

/// Independent stream `index` derived from `seed`.
pub fn stream(seed: u64, index: u64) -> SeededStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `n` replicates of `f`, chunk-parallel, and returns their outputs in
/// replicate order. `f` receives the chunk's stream and may keep scratch
/// state in `S` across the replicates of one chunk.
pub fn replicate<T, S, E>(
    seed: u64,
    n: usize,
    init: impl Fn() -> S + Sync,
    f: impl Fn(&mut S, &mut SeededStream) -> Result<T, E> + Sync,
) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<T>, E>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let len = CHUNK.min(n - k * CHUNK);
            let mut rng = stream(seed, k as u64);
            let mut scratch = init();
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                out.push(f(&mut scratch, &mut rng)?);
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::with_capacity(n);
    for p in parts {
        all.extend(p?);
    }
    Ok(all)
}

/// Runs `f` on a dedicated pool with `threads` workers (0 = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
