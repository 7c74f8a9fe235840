//! Seeded RNG contract shared by every sampler and generator.
//!
//! All stochastic code in this crate draws from a [`ChaCha8Rng`] seeded
//! with a caller-supplied 64-bit seed. The algorithm identifier is
//! recorded in snapshot metadata so results stay reproducible across
//! machines and versions.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Identifier written into snapshot metadata next to the seed.
pub const RNG_ALGORITHM: &str = "chacha8";

/// The chain RNG. Same (seed, algorithm) → identical sample stream.
pub type ChainRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> ChainRng {
    ChainRng::seed_from_u64(seed)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent child seed for a sub-task (fold-in doc, chain,
/// sweep job) without correlating streams.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    splitmix64(base ^ splitmix64(salt))
}

/// Draw an index with probability `weights[k] / Σ weights`.
///
/// Weights must be finite and non-negative with a positive sum.
pub fn sample_categorical<R: Rng>(weights: &[f64], rng: &mut R) -> Result<usize> {
    let mut total = 0.0f64;
    for &w in weights {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "categorical weight must be finite and non-negative, got {w}"
            )));
        }
        total += w;
    }
    if total <= 0.0 {
        return Err(Error::InvalidArgument(
            "categorical weights sum to zero".into(),
        ));
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0f64;
    let mut last_positive = None;
    for (k, &w) in weights.iter().enumerate() {
        acc += w;
        if w > 0.0 {
            last_positive = Some(k);
            if u < acc {
                return Ok(k);
            }
        }
    }
    // u landed on the rounding sliver at the top of the cumulative sum.
    Ok(last_positive.expect("positive total implies a positive weight"))
}
