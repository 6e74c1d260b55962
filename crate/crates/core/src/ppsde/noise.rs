//! Counter-addressed standard-normal deviates.
//!
//! Each trajectory owns one ChaCha8 stream selected by its index; step `k` reads
//! the 32-bit words `[16k, 16k + 16)` of that stream, i.e. eight `u64`, and turns
//! them into eight normals with Box–Muller. The deviate for
//! `(seed, trajectory, step, noise)` is therefore a pure function of those four
//! numbers and does not depend on which thread integrates the trajectory.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::system::N_NOISES;

const WORDS_PER_STEP: u128 = 2 * N_NOISES as u128;

/// Expands a 64-bit master seed into a 256-bit ChaCha key (splitmix64).
fn expand_seed(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    key
}

#[derive(Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
    step: u64,
}

impl NoiseStream {
    pub fn new(seed: u64, trajectory: u64) -> Self {
        let mut rng = ChaCha8Rng::from_seed(expand_seed(seed));
        rng.set_stream(trajectory);
        NoiseStream { rng, step: 0 }
    }

    /// Index of the step whose deviates the next call to [`Self::next_step`] returns.
    pub fn step(&self) -> u64 {
        self.step
    }

    /// Repositions the stream at `step`.
    pub fn seek(&mut self, step: u64) {
        self.rng.set_word_pos(step as u128 * WORDS_PER_STEP);
        self.step = step;
    }

    /// The eight deviates of the current step; advances to the next step.
    pub fn next_step(&mut self, out: &mut [f64; N_NOISES]) {
        for pair in out.chunks_exact_mut(2) {
            let u1 = open_unit(self.rng.next_u64());
            let u2 = half_open_unit(self.rng.next_u64());
            let r = (-2.0 * u1.ln()).sqrt();
            let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
            pair[0] = r * c;
            pair[1] = r * s;
        }
        self.step += 1;
    }
}

/// Uniform on `(0, 1]`.
fn open_unit(x: u64) -> f64 {
    ((x >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on `[0, 1)`.
fn half_open_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
