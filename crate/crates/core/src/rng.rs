//! Counter-keyed random streams.
//!
//! Every random draw in the crate comes from a stream identified by
//! `(seed, domain, index)`. The ChaCha key holds `seed` and `domain`; the
//! ChaCha stream id is `index`. Any worker can therefore regenerate the draws
//! for item `index` without touching the draws of other items, which makes
//! results independent of how work is partitioned.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Separates the random streams used by different procedures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Lines = 1,
    Surface = 2,
    Directions = 3,
    Hyperplanes = 4,
    Restarts = 5,
    Cloud = 6,
    Test = 7,
    Regions = 8,
    Centers = 9,
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Uniform point on the unit sphere of ℝⁿ.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let len = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-12 {
            return g.into_iter().map(|x| x / len).collect();
        }
    }
}

pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
