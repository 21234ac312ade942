//! Seed derivation and counter-based Gaussian streams.
//!
//! Every random quantity in the crate is a pure function of a 64-bit key, so
//! results do not depend on scheduling or worker counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `index` of `master`. Distinct indices give
/// statistically independent streams.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_mul(GOLDEN) ^ 0xD1B5_4A32_D192_ED03))
}

#[inline]
fn unit_open(bits: u64) -> f64 {
    // (0, 1]
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn unit_half_open(bits: u64) -> f64 {
    // [0, 1)
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal deviate addressed by `(seed, stream, counter)`.
///
/// Box-Muller on two hashed uniforms; the cosine branch only, so each key
/// maps to exactly one deviate.
pub fn keyed_normal(seed: u64, stream: u64, counter: u64) -> f64 {
    let h1 = splitmix64(derive_seed(seed, stream) ^ splitmix64(counter));
    let h2 = splitmix64(h1 ^ GOLDEN);
    let u1 = unit_open(h1);
    let u2 = unit_half_open(h2);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Deterministic block RNG for chunked Monte Carlo.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, chunk))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyed_normal_is_reproducible_and_key_sensitive() {
        assert_eq!(keyed_normal(7, 1, 2).to_bits(), keyed_normal(7, 1, 2).to_bits());
        assert_ne!(keyed_normal(7, 1, 2), keyed_normal(7, 2, 1));
        assert_ne!(keyed_normal(7, 1, 2), keyed_normal(8, 1, 2));
    }

    #[test]
    fn keyed_normal_moments() {
        let n = 200_000u64;
        let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let x = keyed_normal(42, 3, i);
            s1 += x;
            s2 += x * x;
            s4 += x.powi(4);
        }
        let nf = n as f64;
        assert!((s1 / nf).abs() < 4.0 / nf.sqrt());
        assert!((s2 / nf - 1.0).abs() < 4.0 * (2.0 / nf).sqrt());
        assert!((s4 / nf - 3.0).abs() < 4.0 * (96.0 / nf).sqrt());
    }

    #[test]
    fn derived_seeds_do_not_collide() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..10_000 {
            assert!(seen.insert(derive_seed(1, i)));
        }
    }
}
