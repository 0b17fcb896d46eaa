//! Counter-based seed derivation for reproducible replica parallelism.
//!
//! Replica `k` of stream `stream` under experiment seed `seed` owns an
//! independent generator derived from the triple, so replicas can run in
//! any order on any number of threads and still reproduce bit for bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Stream labels separating the independent uses of one experiment seed.
pub mod stream {
    pub const INSTANCE: u64 = 1;
    pub const LIMIT: u64 = 2;
    pub const ATOMS: u64 = 3;
    pub const BRIDGE: u64 = 4;
    pub const STABLE: u64 = 5;
    pub const EVENTS: u64 = 6;
    pub const MOMENT: u64 = 7;
    pub const MERGE: u64 = 8;
    pub const PERMUTATION: u64 = 9;
    pub const LENGTHS: u64 = 10;
}

/// Generator for replica `k` of the given stream.
pub fn replica_rng(seed: u64, stream: u64, k: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&k.to_le_bytes());
    key[24..32].copy_from_slice(&0x6361_7261_7661_6e5fu64.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

/// Single-stream generator, shorthand for replica 0.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    replica_rng(seed, stream, 0)
}
