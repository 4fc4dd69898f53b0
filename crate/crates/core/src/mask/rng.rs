//! Pinned randomness. Every stream is ChaCha8 (`rand_chacha`, whose output
//! is fixed across platforms and releases) seeded with a 64-bit value
//! derived from the run seed and a stream label. Index shuffling is our own
//! Fisher–Yates so results do not depend on `rand` internals.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// First 8 bytes (little endian) of SHA-256 over `"{seed}:{label}"`.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let digest = Sha256::digest(format!("{seed}:{label}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

pub fn stream(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, label))
}

/// Fisher–Yates from the back; the swap partner for position `i` is
/// `(next_u64 · (i + 1)) >> 64`.
pub fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = ((u128::from(rng.next_u64()) * (i as u128 + 1)) >> 64) as usize;
        items.swap(i, j);
    }
}
