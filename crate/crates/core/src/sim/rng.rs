//! Counter-based random streams: one ChaCha8 stream per `(seed, domain,
//! path_id)`, with a fixed number of words consumed per step so that a draw is
//! a pure function of `(seed, domain, path_id, step)`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Independent purposes get disjoint stream ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Domain {
    Decay = 0,
    ReturnTime = 1,
    Bootstrap = 2,
    Law = 3,
}

/// `u64` draws per base step.
pub const WORDS_PER_STEP: usize = 4;

/// Step index reserved for the initial-state draw.
pub const INIT_STEP: u64 = 1 << 60;

#[derive(Debug, Clone)]
pub struct PathRng {
    inner: ChaCha8Rng,
    step: u64,
}

impl PathRng {
    pub fn new(seed: u64, domain: Domain, path_id: u64) -> Self {
        assert!(path_id < 1 << 56, "path id out of range");
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(((domain as u64) << 56) | path_id);
        PathRng { inner, step: 0 }
    }

    /// Positions the stream at `step`.
    pub fn seek(&mut self, step: u64) {
        // Each u64 is two 32-bit words.
        self.inner.set_word_pos(step as u128 * (2 * WORDS_PER_STEP) as u128);
        self.step = step;
    }

    /// The `WORDS_PER_STEP` words of the current step, then advance.
    pub fn next_step(&mut self) -> [u64; WORDS_PER_STEP] {
        let mut out = [0u64; WORDS_PER_STEP];
        for w in &mut out {
            *w = self.inner.next_u64();
        }
        self.step += 1;
        out
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// Uniform on the open interval `(0, 1)`.
pub fn open01(w: u64) -> f64 {
    ((w >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Standard normal from two words (Box–Muller, cosine branch).
pub fn std_normal(w1: u64, w2: u64) -> f64 {
    let u1 = open01(w1);
    let u2 = open01(w2);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
