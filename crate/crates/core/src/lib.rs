//! Boundary state pair search for lane-keeping driving models.
//!
//! A boundary state pair is two nearby vehicle states on a track where the
//! driving model recovers from one and leaves the lane from the other. The
//! crate simulates a small vehicle, trains imitation controllers of varying
//! quality, searches for such pairs, measures them and retrains on them.

pub mod boundary_states;
pub mod controllers;
pub mod dynamics;
pub mod geometry;
pub mod metrics;
pub mod pipeline;
pub mod search;

/// Mixes `stream` into `base` (splitmix64 finalizer) so that derived seeds
/// of neighbouring streams are unrelated.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
