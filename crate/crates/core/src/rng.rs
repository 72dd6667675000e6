//! Seedable, splittable random streams on top of ChaCha.
//!
//! `split(i)` derives a child stream from the parent's seed and `i` alone,
//! so children do not depend on how much of the parent was consumed. That
//! is what keeps chunked parallel sampling reproducible.

use num_bigint::BigUint;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Environment variable read by [`StreamRng::from_env_or`].
pub const SEED_ENV: &str = "BINSAMP_SEED";

#[derive(Clone, Debug)]
pub struct StreamRng {
    seed: [u8; 32],
    rng: ChaCha12Rng,
}

impl StreamRng {
    pub fn from_seed_bytes(seed: [u8; 32]) -> Self {
        StreamRng { seed, rng: ChaCha12Rng::from_seed(seed) }
    }

    pub fn seed_from_u64(seed: u64) -> Self {
        let mut bytes = [0u8; 32];
        ChaCha12Rng::seed_from_u64(seed).fill_bytes(&mut bytes);
        StreamRng::from_seed_bytes(bytes)
    }

    /// Seed from `BINSAMP_SEED` (decimal u64) when set, else `default`.
    pub fn from_env_or(default: u64) -> Result<Self, String> {
        Ok(StreamRng::seed_from_u64(seed_from_env(default)?))
    }

    /// Independent child stream number `stream`.
    pub fn split(&self, stream: u64) -> StreamRng {
        let mut gen = ChaCha12Rng::from_seed(self.seed);
        // stream 0 of the parent key is the parent's own sequence
        gen.set_stream(stream.wrapping_add(1));
        let mut bytes = [0u8; 32];
        gen.fill_bytes(&mut bytes);
        StreamRng::from_seed_bytes(bytes)
    }
}

/// Reads `BINSAMP_SEED`, falling back to `default` when unset.
pub fn seed_from_env(default: u64) -> Result<u64, String> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse::<u64>().map_err(|_| format!("{SEED_ENV} must be a decimal u64, got '{s}'")),
        Err(_) => Ok(default),
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Uniform integer in `[0, 2^bits)`.
pub fn draw_bits<R: RngCore + ?Sized>(rng: &mut R, bits: u32) -> BigUint {
    let words = bits.div_ceil(64) as usize;
    let mut digits: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
    let spare = words as u32 * 64 - bits;
    if spare > 0 {
        if let Some(top) = digits.last_mut() {
            *top >>= spare;
        }
    }
    let mut limbs = Vec::with_capacity(words * 2);
    for d in digits {
        limbs.push(d as u32);
        limbs.push((d >> 32) as u32);
    }
    BigUint::new(limbs)
}
