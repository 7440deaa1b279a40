//! Measurement noise.
//!
//! Samples come from a ChaCha8 stream (`rand_chacha`, seeded through
//! `SeedableRng::seed_from_u64`) mapped to a standard normal with the cosine
//! branch of the Box-Muller transform. Each normal consumes two uniform
//! draws `u = (next_u64 >> 11) * 2^-53`, so the stream can be reproduced
//! outside Rust.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One standard normal draw from two uniforms.
pub fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Zero-mean Gaussian noise source with a fixed standard deviation.
#[derive(Debug, Clone)]
pub struct GaussianNoise {
    rng: ChaCha8Rng,
    std: f64,
}

impl GaussianNoise {
    pub fn new(seed: u64, std: f64) -> Self {
        GaussianNoise {
            rng: ChaCha8Rng::seed_from_u64(seed),
            std,
        }
    }

    pub fn sample(&mut self) -> f64 {
        // the stream advances even for std = 0 so runs differ only in scale
        let z = standard_normal(&mut self.rng);
        self.std * z
    }
}
