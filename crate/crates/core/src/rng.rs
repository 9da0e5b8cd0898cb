//! Named, reproducible random streams split from one master seed.
//!
//! Every consumer of randomness asks for a stream by `(label, index)`, so
//! adding an agent or a day never shifts the numbers another stream sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream type used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Stream label for the movement simulator (indexed by agent id).
pub const SIMULATE: &str = "simulate";
/// Stream label for the sensor layer (indexed by day).
pub const OBSERVE: &str = "observe";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Derives the seed of sub-stream `(label, index)` from `master`.
pub fn stream_seed(master: u64, label: &str, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a(label)) ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

pub fn stream(master: u64, label: &str, index: u64) -> SimRng {
    SimRng::seed_from_u64(stream_seed(master, label, index))
}
