//! Counter-based random streams.
//!
//! Every random quantity in the crate is drawn from a `CounterRng`, which is
//! a keyed SplitMix64 finalizer applied to an incrementing counter. A stream
//! is fully determined by `(seed, stream)`, and any draw index can be
//! generated on any worker without shared state, so parallel sampling is
//! bit-reproducible regardless of thread layout.

use crate::error::{Result, SimError};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    stream: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let key = mix(mix(seed ^ GOLDEN).wrapping_add(mix(stream)));
        CounterRng {
            key,
            stream,
            counter: 0,
        }
    }

    /// Position in the stream; exposed so shot outcomes can record where
    /// they came from.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn checked_next_u64(&mut self) -> Result<u64> {
        let c = self.counter;
        self.counter = c.checked_add(1).ok_or(SimError::RngExhausted)?;
        Ok(mix(self.key.wrapping_add(c.wrapping_mul(GOLDEN))))
    }

    /// Convenience for test code where exhaustion is structurally impossible.
    pub fn next_f64(&mut self) -> f64 {
        self.checked_next_f64().expect("rng exhausted")
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn checked_next_f64(&mut self) -> Result<f64> {
        Ok((self.checked_next_u64()? >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0))
    }

    pub fn bernoulli(&mut self, p: f64) -> Result<bool> {
        Ok(self.checked_next_f64()? < p)
    }

    /// Uniform integer in [0, n) via the 128-bit multiply reduction.
    pub fn below(&mut self, n: u64) -> Result<u64> {
        debug_assert!(n > 0);
        let x = self.checked_next_u64()?;
        Ok(((x as u128 * n as u128) >> 64) as u64)
    }
}

/// Derive a stream identifier from nested context labels. Used to give each
/// (order, sample) pair its own independent stream.
pub fn substream(labels: &[u64]) -> u64 {
    let mut acc = 0u64;
    for &l in labels {
        acc = mix(acc.wrapping_mul(GOLDEN) ^ l);
    }
    acc
}
