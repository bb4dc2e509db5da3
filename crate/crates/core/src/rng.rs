//! Deterministic random streams.
//!
//! Every consumer draws from its own ChaCha8 stream. The key is the master
//! seed (expanded with `seed_from_u64`), and the 64-bit stream id is
//! `trial_index * 64 + purpose`. Two purposes never share a stream, so adding
//! a scheme or changing the IRS size never shifts any other draw.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    BsUserChannels,
    BsIrsChannels,
    IrsUserChannels,
    Symbols,
    IrsInit,
    /// Rounding draws or random phases of one scheme kind (by stable tag).
    Scheme(u8),
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::BsUserChannels => 0,
            Purpose::BsIrsChannels => 1,
            Purpose::IrsUserChannels => 2,
            Purpose::Symbols => 3,
            Purpose::IrsInit => 4,
            Purpose::Scheme(k) => 16 + u64::from(k % 48),
        }
    }
}

pub fn stream(seed: u64, trial_index: u64, purpose: Purpose) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index.wrapping_mul(64).wrapping_add(purpose.tag()));
    rng
}

/// One draw from `CN(0, 1)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}
