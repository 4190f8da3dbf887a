//! Reproducible random streams.
//!
//! Every simulation draws from a ChaCha8 stream keyed by `(seed, stream)`.
//! ChaCha is counter based, so stream `r` of a seed is independent of how
//! many other streams exist or in which order they are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
