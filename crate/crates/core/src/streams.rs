//! Deterministic fan-out of per-sample work across threads.
//!
//! Work is cut into fixed-size chunks and each chunk gets its own generator,
//! seeded from the caller's generator in chunk order. Results therefore do not
//! depend on the number of worker threads.

use rand::Rng;
use rayon::prelude::*;

use crate::{seeded_rng, SeededRng};

pub(crate) const CHUNK: usize = 4096;

/// Runs `work` over `CHUNK`-sized slices of `items` in parallel and returns the
/// per-chunk results in chunk order.
pub(crate) fn for_each_chunk<T, R, Out, F>(items: &mut [T], rng: &mut R, work: F) -> Vec<Out>
where
    T: Send,
    R: Rng + ?Sized,
    Out: Send,
    F: Fn(&mut SeededRng, &mut [T]) -> Out + Sync,
{
    let seeds: Vec<u64> = (0..items.len().div_ceil(CHUNK))
        .map(|_| rng.random())
        .collect();
    items
        .par_chunks_mut(CHUNK)
        .zip(seeds.par_iter())
        .map(|(chunk, &seed)| work(&mut seeded_rng(seed), chunk))
        .collect()
}
