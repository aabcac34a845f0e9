//! Shared input builders for the benchmarks.

use attn_core::fitting::GainSample;
use attn_core::model::{gain_probability, presets, AttentionState};
use rand::SeedableRng;
use rand_distr::{Distribution, LogNormal, Uniform};
use rand_pcg::Pcg64;

/// A heavy-tailed nonnegative sample of the given size.
pub fn heavy_tailed_values(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let dist = LogNormal::new(2.0, 1.8).unwrap();
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

/// Clean gain observations generated from the bundled Q1 constants.
pub fn q1_gain_samples(seed: u64, n: usize) -> Vec<GainSample> {
    let params = presets::q1(5600);
    let mut rng = Pcg64::seed_from_u64(seed);
    let dist = Uniform::new((1.0f64).ln(), (300.0f64).ln()).unwrap();
    (0..n)
        .map(|_| {
            let r = dist.sample(&mut rng).exp();
            let m = dist.sample(&mut rng).exp() * 0.4;
            let p_plus = gain_probability(
                &params,
                &AttentionState {
                    f0: 0,
                    r,
                    m,
                    p: 0.0,
                },
            );
            GainSample { r, m, p_plus }
        })
        .collect()
}
