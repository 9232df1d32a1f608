//! Seed derivation.
//!
//! Every random quantity is drawn from a ChaCha stream selected by
//! `(seed, domain, index)`, so results never depend on how work is split
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains. They keep sub-computations of one seeded run independent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    State = 1,
    Sampling = 2,
    HigherMoment = 3,
    Scatter = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a seed with a domain tag.
pub fn derive_seed(seed: u64, domain: Domain) -> u64 {
    splitmix64(seed ^ splitmix64(domain as u64))
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, domain));
    rng.set_stream(index);
    rng
}
