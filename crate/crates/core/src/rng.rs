//! Seeded random streams.
//!
//! A run has one user-facing seed. Each consumer (shuffling, initialization,
//! wave generation, ...) draws from its own named ChaCha stream derived from
//! that seed, so adding draws in one place never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub const SHUFFLE: &str = "shuffle";
pub const INIT: &str = "init";
pub const WAVES: &str = "waves";
pub const WORLD: &str = "world";
pub const DATA: &str = "data";

/// FNV-1a, used only to turn stream names into stream ids.
fn fnv1a(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// The generator for stream `name` under `seed`.
pub fn stream(seed: u64, name: &str) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(name));
    rng
}
