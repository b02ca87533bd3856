//! Named random sub-streams derived from a single run seed.
//!
//! Every consumer of randomness asks for its own stream so that changing
//! one part of an experiment (say the batch order) never shifts the random
//! numbers seen by another (say the mask initialisation).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Split,
    Init,
    BatchOrder,
    Pca,
    Synth,
    GradCheck,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Split => 1,
            Stream::Init => 2,
            Stream::BatchOrder => 3,
            Stream::Pca => 4,
            Stream::Synth => 5,
            Stream::GradCheck => 6,
        }
    }
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}
