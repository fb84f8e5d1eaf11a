use serde::{Deserialize, Serialize};

use crate::distributions::{logistic_cdf, normal_cdf, normal_pdf, softplus};

/// Closed-form antiderivatives for the registered `(G, g)` pairs.
///
/// Each form is stated for its reference weight (the one that reproduces
/// the tabulated loss exactly); `natural_k` is its value at `v = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ClosedForm {
    /// `e^{-v/2}`, weight `1/2`.
    Exponential,
    /// `ln(1 + e^{-v})`, weight `sqrt(F(1 - F))`.
    Logistic,
    /// `(1 + e^v)^{-2}`, weight `2 (F(1 - F))^{3/2}`.
    Savage,
    /// `1 - Phi((v + m/2) / sqrt(m))`.
    Gaussian { m: f64 },
    /// Piecewise exponential, weight `((m + 1)/2) e^{-m|w|/2}`.
    Laplace { m: f64 },
    /// `(1 - v)^2` under the uniform CDF on (-1, 1).
    Squared,
}

impl ClosedForm {
    pub fn name(&self) -> String {
        match self {
            ClosedForm::Exponential => "exponential".into(),
            ClosedForm::Logistic => "logistic".into(),
            ClosedForm::Savage => "savage".into(),
            ClosedForm::Gaussian { m } => format!("gaussian:{m}"),
            ClosedForm::Laplace { m } => format!("laplace:{m}"),
            ClosedForm::Squared => "squared".into(),
        }
    }

    pub fn natural_k(&self) -> f64 {
        match self {
            ClosedForm::Exponential => 1.0,
            ClosedForm::Logistic => std::f64::consts::LN_2,
            ClosedForm::Savage => 0.25,
            ClosedForm::Gaussian { m } => normal_cdf(-0.5 * m.sqrt()),
            ClosedForm::Laplace { .. } => 1.0,
            ClosedForm::Squared => 1.0,
        }
    }

    pub fn value(&self, v: f64) -> f64 {
        match *self {
            ClosedForm::Exponential => (-0.5 * v).exp(),
            ClosedForm::Logistic => softplus(-v),
            ClosedForm::Savage => {
                let s = logistic_cdf(-v);
                s * s
            }
            ClosedForm::Gaussian { m } => normal_cdf(-(v + 0.5 * m) / m.sqrt()),
            ClosedForm::Laplace { m } => {
                if v > 0.0 {
                    (-0.5 * v * (1.0 + m)).exp()
                } else if m == 1.0 {
                    1.0 - v
                } else {
                    1.0 - (m + 1.0) / (m - 1.0) * (0.5 * v * (m - 1.0)).exp_m1()
                }
            }
            ClosedForm::Squared => (1.0 - v) * (1.0 - v),
        }
    }

    pub fn derivative(&self, v: f64) -> f64 {
        match *self {
            ClosedForm::Exponential => -0.5 * (-0.5 * v).exp(),
            ClosedForm::Logistic => -logistic_cdf(-v),
            ClosedForm::Savage => {
                let s = logistic_cdf(-v);
                -2.0 * logistic_cdf(v) * s * s
            }
            ClosedForm::Gaussian { m } => -normal_pdf((v + 0.5 * m) / m.sqrt()) / m.sqrt(),
            ClosedForm::Laplace { m } => {
                if v > 0.0 {
                    -0.5 * (m + 1.0) * (-0.5 * v * (1.0 + m)).exp()
                } else {
                    -0.5 * (m + 1.0) * (0.5 * v * (m - 1.0)).exp()
                }
            }
            ClosedForm::Squared => -2.0 * (1.0 - v),
        }
    }
}
