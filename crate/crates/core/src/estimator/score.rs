//! Per-observation estimating scores and their moments under the model
//! `Pr(y* = 1 | x) = G(f(x; beta))`.

use super::ModelSpec;
use crate::distributions::SymmetricCdf;
use crate::error::Result;
use crate::label::Label;
use crate::loss_factory::{ConformableLoss, MarginLoss};

/// Dense row-major square matrix.
pub type Matrix = Vec<Vec<f64>>;

fn outer(scale: f64, z: &[f64]) -> Matrix {
    z.iter().map(|a| z.iter().map(|b| scale * a * b).collect()).collect()
}

/// `d/dbeta phi(y* f(x; beta))` for one observation.
pub fn score_at(loss: &dyn MarginLoss, spec: &ModelSpec, beta: &[f64], x: &[f64], y_star: Label) -> Result<Vec<f64>> {
    let f = spec.score(beta, x)?;
    let y = y_star.sign();
    let scale = loss.derivative(y * f)? * y;
    Ok(spec.gradient_of_score(x).into_iter().map(|z| scale * z).collect())
}

/// `E[score | x]` with `y* = +1` drawn with probability `G(f(x; beta))`:
/// `(phi'(f) G(f) - phi'(-f) (1 - G(f))) df/dbeta`.
pub fn conditional_expected_score(
    loss: &dyn MarginLoss,
    dist: SymmetricCdf,
    spec: &ModelSpec,
    beta: &[f64],
    x: &[f64],
) -> Result<Vec<f64>> {
    let f = spec.score(beta, x)?;
    let scale = loss.derivative(f)? * dist.cdf(f)? - loss.derivative(-f)? * dist.survival(f)?;
    Ok(spec.gradient_of_score(x).into_iter().map(|z| scale * z).collect())
}

/// `Var[score | x] = g(f)^2 (df/dbeta)(df/dbeta)^T`.
pub fn score_variance(loss: &ConformableLoss, spec: &ModelSpec, beta: &[f64], x: &[f64]) -> Result<Matrix> {
    let f = spec.score(beta, x)?;
    let g = loss.weight().eval(loss.dist(), f)?;
    Ok(outer(g * g, &spec.gradient_of_score(x)))
}

/// `E[d^2/dbeta^2 phi | x] = G'(f) g(f) / sqrt(G(f)(1 - G(f))) (df/dbeta)(df/dbeta)^T`.
pub fn score_sensitivity(loss: &ConformableLoss, spec: &ModelSpec, beta: &[f64], x: &[f64]) -> Result<Matrix> {
    let f = spec.score(beta, x)?;
    let dist = loss.dist();
    let g = loss.weight().eval(dist, f)?;
    let factor = dist.density(f)? * g / (dist.cdf(f)? * dist.survival(f)?).sqrt();
    Ok(outer(factor, &spec.gradient_of_score(x)))
}
