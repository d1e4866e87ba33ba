//! Seeded sampling helpers. Every stream is a ChaCha8 generator seeded from a
//! `u64`, so results are reproducible across platforms.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::signal::Signal;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for the `index`-th independent sub-stream of `base`.
pub fn substream(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// A standard Gaussian signal.
pub fn gaussian_signal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<Signal> {
    Signal::new(gaussian_vector(rng, dim))
}

/// Uniform draw from the unit sphere `S^{d−1}` (normalized Gaussian).
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<Signal> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    loop {
        let s = gaussian_signal(rng, dim)?;
        if s.norm() > 0.0 {
            return Ok(s.normalized());
        }
    }
}
