//! Counter-based random streams.
//!
//! Every draw is addressed by `(master seed, ensemble, substream, path)`.
//! The first three select a ChaCha8 key, the path index selects the ChaCha
//! stream under that key, so paths can be simulated in any order on any
//! number of workers and still see the same numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Brownian increments.
pub const DIFFUSION: u64 = 0;
/// Jump epochs and displacement uniforms.
pub const JUMPS: u64 = 1;
/// Anything else a consumer needs (initial-state resampling and the like).
pub const AUXILIARY: u64 = 2;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Master seed of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct StreamSeed(pub u64);

impl StreamSeed {
    pub fn new(seed: u64) -> Self {
        StreamSeed(seed)
    }

    /// Generator for one `(ensemble, substream, path)` address.
    pub fn rng(&self, ensemble: u64, substream: u64, path: u64) -> ChaCha8Rng {
        let mut state = self.0;
        // absorb the address one word at a time
        for word in [ensemble, substream] {
            state = splitmix64(&mut state) ^ word;
        }
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(path);
        rng
    }

    pub fn path_streams(&self, ensemble: u64, path: u64) -> PathStreams {
        PathStreams {
            diffusion: self.rng(ensemble, DIFFUSION, path),
            jumps: self.rng(ensemble, JUMPS, path),
        }
    }
}

/// The two disjoint substreams that drive one trajectory.
#[derive(Debug, Clone)]
pub struct PathStreams {
    pub diffusion: ChaCha8Rng,
    pub jumps: ChaCha8Rng,
}

impl PathStreams {
    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.diffusion.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)` from the jump substream.
    #[inline]
    pub fn jump_uniform(&mut self) -> f64 {
        self.jumps.random::<f64>()
    }
}
