//! Seed derivation and the deterministic generator used across the toolkit.
//!
//! Every randomized operation takes a single `u64` seed. Pipelines hold one
//! root seed and derive an independent child seed per stage by hashing the
//! root together with a stable domain string (`derive_seed(root, "sampler/rus")`,
//! `derive_seed(root, "cell/smote/dt")`, ...). Because children are keyed by
//! name rather than by draw order, adding or removing a stage never perturbs
//! the randomness of the others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a root seed and a domain label.
pub fn derive_seed(root: u64, domain: &str) -> u64 {
    splitmix64(root ^ fnv1a(domain.as_bytes()))
}

/// Builds the deterministic generator for a seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shorthand for `seeded_rng(derive_seed(root, domain))`.
pub fn child_rng(root: u64, domain: &str) -> ChaCha8Rng {
    seeded_rng(derive_seed(root, domain))
}
