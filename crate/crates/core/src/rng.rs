//! Counter-based RNG streams.
//!
//! Every Monte Carlo replica draws from its own ChaCha stream identified by
//! `(seed, replica, role)`, so results are independent of worker count and
//! evaluation order, and path `role` within a replica is stable across
//! estimators (path 0 of replica k is the same for a 1-path and a 3-path
//! model run with the same seed).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Maximum number of distinct roles (paths, auxiliary draws) per replica.
pub const ROLES_PER_REPLICA: u64 = 16;

/// RNG for a given `(seed, replica, role)` triple.
pub fn stream(seed: u64, replica: u64, role: u64) -> ChaCha8Rng {
    assert!(role < ROLES_PER_REPLICA, "role {role} out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica * ROLES_PER_REPLICA + role);
    rng
}

/// Single-stream RNG for fixture generation.
pub fn fixture_stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
