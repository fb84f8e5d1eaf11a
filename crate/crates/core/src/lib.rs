//! Margin-based loss functions conformable to symmetric CDFs.
//!
//! The crate builds losses `phi(v) = k - int_0^v q(w)^{-1/2} g(w) dw` from a
//! symmetric CDF `G` (through its odds `q = G / (1 - G)`) and an even weight
//! `g`, checks that they are conformable and convex, fits linear and
//! basis-expansion scores by empirical risk minimization, and exposes the
//! standardized logistic residual view of the margin, including an
//! instrumented AdaBoost.

// `!(x <= tol)` style comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boosting;
pub mod datagen;
pub mod distributions;
pub mod error;
pub mod estimator;
pub mod io;
pub mod label;
pub mod loss_factory;
pub mod quadrature;
pub mod residuals;
mod sum;
pub mod weights;

pub use distributions::SymmetricCdf;
pub use error::{Error, Result};
pub use estimator::{Dataset, FitOptions, FitResult, FitStatus, ModelSpec};
pub use label::{Classification, Label};
pub use loss_factory::{make_loss, AnyLoss, ConformableLoss, ExponentialMargin, MarginLoss, NamedLoss};
pub use weights::{Evenness, WeightFn};
