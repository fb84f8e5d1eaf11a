//! Scores, hard classifications, and probability estimates from a fitted model.

use super::ModelSpec;
use crate::distributions::{logistic_cdf, SymmetricCdf};
use crate::error::Result;
use crate::label::Classification;

/// `f(x; beta)`.
pub fn predict(spec: &ModelSpec, beta: &[f64], x: &[f64]) -> Result<f64> {
    spec.score(beta, x)
}

/// `sign(f(x; beta))`, with `f = 0` mapped to `+1` and flagged.
pub fn classify(spec: &ModelSpec, beta: &[f64], x: &[f64]) -> Result<Classification> {
    Ok(Classification::from_score(predict(spec, beta, x)?))
}

/// Logistic-scale confidence `F(f(x; beta))`.
pub fn soft_probability(spec: &ModelSpec, beta: &[f64], x: &[f64]) -> Result<f64> {
    Ok(logistic_cdf(predict(spec, beta, x)?))
}

/// `G(f)` for a score fitted under a loss conformable to `G`.
pub fn g_scale_probability(dist: SymmetricCdf, f: f64) -> Result<f64> {
    dist.cdf(f)
}
