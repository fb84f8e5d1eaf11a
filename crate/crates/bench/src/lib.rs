//! Shared fixtures for the benchmarks.

use marginloss::datagen::{generate, FeatureLaw, GenConfig};
use marginloss::Dataset;

/// A logistic-link dataset with three standard Gaussian features.
pub fn logistic_data(n: usize, seed: u64) -> Dataset {
    generate(&GenConfig::new(n, vec![0.5, -1.0, 0.25], FeatureLaw::StandardGaussian, seed)).expect("valid config")
}

/// `n` equally spaced margins in `[lo, hi]`.
pub fn margin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
