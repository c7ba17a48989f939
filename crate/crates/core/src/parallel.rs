//! Deterministic sharding of Monte Carlo work.
//!
//! Work of size `n` is cut into fixed-size blocks; block `k` draws from its
//! own ChaCha8 stream `(seed, k)`. Results come back in block order, so the
//! output depends on the seed and block size but not on the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const DEFAULT_BLOCK: usize = 2_000;

/// Generator for block `block` of the run seeded by `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Independent seed for the sub-run `tag` of a run with master `seed`.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(tag.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dispatch {
    /// Worker threads; 0 uses all available cores.
    pub workers: usize,
    pub block: usize,
}

impl Default for Dispatch {
    fn default() -> Self {
        Dispatch {
            workers: 1,
            block: DEFAULT_BLOCK,
        }
    }
}

impl Dispatch {
    pub fn new(workers: usize) -> Self {
        Dispatch {
            workers,
            ..Default::default()
        }
    }

    /// Calls `f(count, rng)` once per block of `n` items and returns the
    /// per-block results in block order.
    pub fn run<T, F>(&self, n: usize, seed: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, &mut ChaCha8Rng) -> Result<T> + Sync,
    {
        if self.block == 0 {
            return Err(Error::InvalidParam("block size must be positive".into()));
        }
        let blocks = n.div_ceil(self.block);
        let job = |k: usize| {
            let count = self.block.min(n - k * self.block);
            f(count, &mut block_rng(seed, k as u64))
        };
        if self.workers == 1 {
            return (0..blocks).map(job).collect();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
        pool.install(|| (0..blocks).into_par_iter().map(job).collect())
    }

    /// `run` for blocks that return vectors, concatenated.
    pub fn collect<T, F>(&self, n: usize, seed: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, &mut ChaCha8Rng) -> Result<Vec<T>> + Sync,
    {
        Ok(self.run(n, seed, f)?.into_iter().flatten().collect())
    }
}
