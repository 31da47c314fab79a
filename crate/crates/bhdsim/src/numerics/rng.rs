//! Counter-seeded random sampling.
//!
//! ChaCha12 exposes independent streams selectable by a 64-bit stream id, so
//! a `(seed, substream)` pair pins the exact sample sequence. Monte Carlo
//! shots each get their own substream, which makes the aggregate result a
//! pure function of the seed and shot count, independent of how the shots
//! are scheduled across threads.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Poisson};

pub struct RngStream {
    seed: u64,
    substream: u64,
    draws: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_substream(seed, 0)
    }

    pub fn with_substream(seed: u64, substream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(substream);
        Self {
            seed,
            substream,
            draws: 0,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn substream(&self) -> u64 {
        self.substream
    }

    /// Number of distribution samples taken so far (not raw words).
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Normal draw. A zero width returns `mean` exactly and consumes no
    /// randomness, so degenerate scenario parameters do not shift the
    /// sequence of the remaining draws within a shot.
    pub fn sample_gaussian(&mut self, mean: f64, std_dev: f64) -> Result<f64> {
        if !mean.is_finite() || !std_dev.is_finite() {
            return Err(Error::domain(format!(
                "gaussian parameters must be finite, got mean {mean}, std dev {std_dev}"
            )));
        }
        if std_dev < 0.0 {
            return Err(Error::domain(format!(
                "gaussian std dev must be >= 0, got {std_dev}"
            )));
        }
        if std_dev == 0.0 {
            return Ok(mean);
        }
        let dist = Normal::new(mean, std_dev).expect("parameters validated");
        self.draws += 1;
        Ok(dist.sample(&mut self.rng))
    }

    /// Poisson draw; a zero mean returns 0 without consuming randomness.
    pub fn sample_poisson(&mut self, mean: f64) -> Result<u64> {
        if !mean.is_finite() || mean < 0.0 {
            return Err(Error::domain(format!(
                "poisson mean must be finite and >= 0, got {mean}"
            )));
        }
        if mean == 0.0 {
            return Ok(0);
        }
        let dist = Poisson::new(mean).expect("parameters validated");
        self.draws += 1;
        Ok(dist.sample(&mut self.rng) as u64)
    }

    /// Uniform draw on [0, 1).
    pub fn sample_uniform(&mut self) -> f64 {
        self.draws += 1;
        self.rng.gen::<f64>()
    }
}
