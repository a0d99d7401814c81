//! Reproducible random streams.
//!
//! Every random quantity is drawn from ChaCha8, keyed by the user seed mixed
//! with a purpose tag, with the ChaCha stream id used as a counter (for
//! example the noise refresh interval index). Any value can therefore be
//! regenerated from `(seed, purpose, counter)` alone, independent of the
//! order in which the integrator asks for it, and the stream is identical on
//! every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    InitialPhases = 0x01,
    Noise = 0x02,
    Delay = 0x03,
    Topology = 0x04,
}

fn key(seed: u64, purpose: Purpose) -> u64 {
    // splitmix64 finalizer over seed ^ tag
    let mut z = seed ^ (purpose as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for the `counter`-th block of the `(seed, purpose)` stream.
pub fn stream(seed: u64, purpose: Purpose, counter: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(key(seed, purpose));
    rng.set_stream(counter);
    rng
}

/// Fills `out` with uniform samples on `[0, 1)`.
pub fn fill_uniform(seed: u64, purpose: Purpose, counter: u64, out: &mut [f64]) {
    let mut rng = stream(seed, purpose, counter);
    for v in out.iter_mut() {
        *v = rng.random::<f64>();
    }
}
