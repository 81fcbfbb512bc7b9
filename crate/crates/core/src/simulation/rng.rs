//! Counter-based derivation of independent random streams.
//!
//! Every random quantity in a study comes from its own ChaCha8 generator
//! whose 256-bit key is derived from `(master seed, stream tag, repetition,
//! index)`. Work can therefore be split across any number of threads without
//! changing a single draw. Within a dataset stream the strata are sampled in
//! order, `a_1, b_1, a_2, b_2, …`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const RNG_ALGORITHM: &str =
    "ChaCha8Rng (rand_chacha 0.9); key = SplitMix64 chain over (seed, stream, repetition, index)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Stratum proportions `p1_i` of one repetition (index unused).
    P1Draw = 1,
    /// One simulated dataset (index = dataset number).
    Dataset = 2,
    /// One convergence replicate (repetition = scale position).
    Convergence = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Streams { seed }
    }

    pub fn rng(&self, stream: Stream, rep: u64, index: u64) -> ChaCha8Rng {
        let mut h = splitmix64(self.seed);
        for word in [stream as u64, rep, index] {
            h = splitmix64(h ^ word);
        }
        let mut key = [0u8; 32];
        for (j, chunk) in key.chunks_exact_mut(8).enumerate() {
            let w = splitmix64(h.wrapping_add((j as u64).wrapping_mul(GOLDEN_GAMMA)));
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
