//! Counter-based random streams.
//!
//! Every draw comes from ChaCha8 keyed by the master seed, with the 64-bit
//! stream id derived from `(replicate, purpose)`. Work units that own
//! distinct streams can run in any order, serially or in parallel, and
//! produce identical numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for; part of the stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    SampleSplit = 1,
    Covariates = 2,
    Assignment = 3,
    Outcomes = 4,
    Truth = 5,
    Fixture = 6,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream id for `(replicate, purpose)`.
pub fn stream_id(replicate: u64, purpose: Purpose) -> u64 {
    splitmix64(splitmix64(replicate) ^ (purpose as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Independent generator for one `(master seed, replicate, purpose)` triple.
pub fn stream(master_seed: u64, replicate: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id(replicate, purpose));
    rng
}

/// Derives a child master seed, e.g. per grid point of a sweep.
pub fn child_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}
