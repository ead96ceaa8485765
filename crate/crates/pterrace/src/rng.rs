//! Seeded, portable random streams.
//!
//! All generators in this crate draw from ChaCha8 streams keyed by
//! SHA-256(seed || label). The label separates call sites so that, e.g.,
//! the angle stream and the noise stream of a circle generator are
//! independent, and adding a new consumer never shifts existing streams.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive an independent ChaCha8 stream from a user seed and a call-site label.
pub fn stream(seed: u64, label: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}
