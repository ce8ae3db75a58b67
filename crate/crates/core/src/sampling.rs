//! Seeded random draws shared by the oracle, the generators and the verification
//! suites. Every draw flows from an explicit seed.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SeededRng = ChaCha8Rng;

/// Largest magnitude produced by [`heavy_tailed`].
pub const HEAVY_TAIL_CAP: f64 = 1e6;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent seed for the `index`-th worker of a run seeded with `seed`
/// (splitmix64 finalizer).
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn normal(rng: &mut SeededRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normal_vector(rng: &mut SeededRng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| normal(rng))
}

pub fn normal_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| normal(rng))
}

/// Componentwise Cauchy draws truncated to `|x_i| ≤ 1e6`; about one entry in eight
/// is set to exactly zero so that sparse inputs are exercised.
pub fn heavy_tailed(rng: &mut SeededRng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| {
        if rng.random_bool(0.125) {
            return 0.0;
        }
        let u: f64 = rng.random_range(-0.5..0.5);
        (std::f64::consts::PI * u)
            .tan()
            .clamp(-HEAVY_TAIL_CAP, HEAVY_TAIL_CAP)
    })
}

/// `10^e` with `e` uniform in `[lo_exp, hi_exp]`.
pub fn log_uniform(rng: &mut SeededRng, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.random_range(lo_exp..=hi_exp))
}
