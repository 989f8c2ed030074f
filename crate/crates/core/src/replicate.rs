//! Deterministic random streams and parallel replication.
//!
//! Replicate `i` of a run with master seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i` (`set_stream(i)`).
//! `seed_from_u64` expands the 64-bit seed into the 256-bit ChaCha key with
//! PCG32 as specified by `rand_core`; the stream id is the 64-bit ChaCha
//! nonce. Streams never overlap, so results depend only on `(s, i)` and not
//! on how replicates are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type Stream = ChaCha8Rng;

/// The random stream owned by replicate `index`.
pub fn stream(master_seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Runs `f(index, stream)` for `index` in `0..count`, in parallel, and returns
/// results in index order. `workers == 0` uses rayon's global pool.
pub fn run_replicates<T, F>(master_seed: u64, count: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut Stream) -> T + Sync + Send,
{
    run_replicate_range(master_seed, 0..count, workers, f)
}

/// [`run_replicates`] over an arbitrary index range, for extending a run.
pub fn run_replicate_range<T, F>(
    master_seed: u64,
    indices: std::ops::Range<u64>,
    workers: usize,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut Stream) -> T + Sync + Send,
{
    let job = || {
        indices
            .clone()
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(master_seed, i);
                f(i, &mut rng)
            })
            .collect()
    };
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(job))
}
