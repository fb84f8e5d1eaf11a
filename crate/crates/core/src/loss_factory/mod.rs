//! Conformable margin losses `phi(v) = k - int_0^v q(w)^{-1/2} g(w) dw`.
//!
//! A [`ConformableLoss`] pairs a [`SymmetricCdf`] with a [`WeightFn`] and a
//! level `k = phi(0)`. Evaluation uses a registered closed form when the
//! pair has one and adaptive quadrature otherwise; the derivative is always
//! the exact integrand `-q(v)^{-1/2} g(v)`.

mod checks;
mod closed_form;
mod named;
mod reparam;

pub use checks::{
    conformability_check, convexity_check, default_check_grid, odds_ratio_check, ConformabilityReport, ConvexityReport,
    CONFORMABILITY_TOLERANCE,
};
pub use closed_form::ClosedForm;
pub use named::{build_loss, AnyLoss, NamedLoss};
pub use reparam::reparameterize;

use crate::distributions::SymmetricCdf;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::weights::{check_even, default_even_grid, WeightFn};

/// Distance from a bounded support edge at which quadrature bounds are clamped.
pub const SUPPORT_CLAMP: f64 = 1e-12;

/// A differentiable margin-based loss `phi(v)` with `v = y* f(x)`.
pub trait MarginLoss: Send + Sync {
    fn name(&self) -> String;

    fn eval(&self, v: f64) -> Result<f64>;

    fn derivative(&self, v: f64) -> Result<f64>;

    /// Open interval of admissible margins.
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn is_convex(&self) -> bool;

    /// `phi' < 0` everywhere on the domain, so scaling a separating
    /// score always lowers the risk.
    fn is_strictly_decreasing(&self) -> bool {
        true
    }

    fn in_domain(&self, v: f64) -> bool {
        let (lo, hi) = self.domain();
        v.is_finite() && v > lo && v < hi
    }
}

/// A loss in the conformable class of `dist`, indexed by `weight`.
#[derive(Debug, Clone)]
pub struct ConformableLoss {
    name: String,
    dist: SymmetricCdf,
    weight: WeightFn,
    k: f64,
    closed: Option<(ClosedForm, f64)>,
    convex: bool,
    quadrature: QuadratureOptions,
}

/// Builds the loss `k - int_0^v q(w)^{-1/2} g(w) dw`.
///
/// Custom weights must pass the evenness gate and be nonnegative on the
/// default grid of `dist`; `k` must be positive.
pub fn make_loss(dist: SymmetricCdf, weight: WeightFn, k: f64) -> Result<ConformableLoss> {
    weight.validate()?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Parameter { name: "k", value: k, reason: "must be positive and finite" });
    }
    if weight.is_custom() {
        let grid = default_even_grid(dist);
        let report = check_even(&weight, dist, &grid);
        if !report.even {
            return Err(Error::NotEven { max_asymmetry: report.max_asymmetry });
        }
        for &w in grid.iter().chain(std::iter::once(&0.0)) {
            let g = weight.eval(dist, w)?;
            if !(g >= 0.0) {
                return Err(Error::NegativeWeight { at: w, value: g });
            }
        }
    }

    let closed = registered_closed_form(dist, &weight);
    let name = match closed {
        Some((cf, 1.0)) => cf.name(),
        _ => format!("{}/{}", dist.name(), weight.identifier()),
    };
    let mut loss = ConformableLoss {
        name,
        dist,
        weight,
        k,
        closed,
        convex: false,
        quadrature: QuadratureOptions::default(),
    };
    loss.convex = convexity_check(&loss, &default_check_grid(dist)).map(|r| r.convex).unwrap_or(false);
    Ok(loss)
}

/// Closed form and multiplier for `(dist, weight)`, if registered.
fn registered_closed_form(dist: SymmetricCdf, weight: &WeightFn) -> Option<(ClosedForm, f64)> {
    use SymmetricCdf::*;
    match (dist, weight) {
        (Logistic, WeightFn::Constant(c)) => Some((ClosedForm::Exponential, 2.0 * c)),
        (Logistic, WeightFn::Likelihood) => Some((ClosedForm::Logistic, 1.0)),
        (Logistic, WeightFn::Savage) => Some((ClosedForm::Savage, 0.5)),
        (Logistic, WeightFn::GaussianKernel { m }) => Some((ClosedForm::Gaussian { m: *m }, 1.0)),
        (Logistic, WeightFn::LaplaceKernel { m }) => Some((ClosedForm::Laplace { m: *m }, 1.0)),
        (UniformPm1, WeightFn::Semicircle) => Some((ClosedForm::Squared, 1.0)),
        (_, WeightFn::Scaled { factor, base }) => {
            registered_closed_form(dist, base).map(|(cf, s)| (cf, s * factor))
        }
        _ => None,
    }
}

impl ConformableLoss {
    pub fn dist(&self) -> SymmetricCdf {
        self.dist
    }

    pub fn weight(&self) -> &WeightFn {
        &self.weight
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// The registered closed form and the multiplier applied to it.
    pub fn closed_form(&self) -> Option<(ClosedForm, f64)> {
        self.closed
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_quadrature(mut self, opts: QuadratureOptions) -> Self {
        self.quadrature = opts;
        self
    }

    fn check_domain(&self, v: f64) -> Result<()> {
        if self.dist.contains(v) {
            Ok(())
        } else {
            Err(Error::Domain {
                context: "loss",
                value: v,
                domain: if self.dist.is_bounded() { "(-1, 1)" } else { "finite reals" },
            })
        }
    }

    /// `h(w) = q(w)^{-1/2} g(w)`, assembled in log space.
    pub fn integrand(&self, w: f64) -> Result<f64> {
        let ln_g = self.weight.ln_eval(self.dist, w)?;
        if ln_g == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        Ok((ln_g - 0.5 * self.dist.ln_odds(w)?).exp())
    }

    /// `phi(v)`: the closed form when registered, quadrature otherwise.
    pub fn eval(&self, v: f64) -> Result<f64> {
        self.check_domain(v)?;
        match self.closed {
            Some((cf, scale)) => {
                let offset = self.k - scale * cf.natural_k();
                Ok(if offset == 0.0 { scale * cf.value(v) } else { scale * cf.value(v) + offset })
            }
            None => self.eval_quadrature(v),
        }
    }

    /// `phi(v)` by adaptive quadrature, ignoring any closed form.
    pub fn eval_quadrature(&self, v: f64) -> Result<f64> {
        self.check_domain(v)?;
        let upper = if self.dist.is_bounded() {
            v.clamp(-1.0 + SUPPORT_CLAMP, 1.0 - SUPPORT_CLAMP)
        } else {
            v
        };
        let est = integrate(|w| self.integrand(w).unwrap_or(f64::NAN), 0.0, upper, self.quadrature)?;
        Ok(self.k - est.value)
    }

    /// `phi'(v) = -q(v)^{-1/2} g(v)`.
    pub fn derivative(&self, v: f64) -> Result<f64> {
        self.check_domain(v)?;
        match self.closed {
            Some((cf, scale)) => Ok(scale * cf.derivative(v)),
            None => Ok(-self.integrand(v)?),
        }
    }

    /// `phi'(v)` from the weight and odds, ignoring any closed form.
    pub fn derivative_from_weight(&self, v: f64) -> Result<f64> {
        self.check_domain(v)?;
        Ok(-self.integrand(v)?)
    }
}

impl MarginLoss for ConformableLoss {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn eval(&self, v: f64) -> Result<f64> {
        ConformableLoss::eval(self, v)
    }

    fn derivative(&self, v: f64) -> Result<f64> {
        ConformableLoss::derivative(self, v)
    }

    fn domain(&self) -> (f64, f64) {
        self.dist.support()
    }

    fn is_convex(&self) -> bool {
        self.convex
    }

    fn is_strictly_decreasing(&self) -> bool {
        // every named weight is strictly positive; custom ones may vanish
        !self.weight.is_custom() && !matches!(self.weight, WeightFn::Constant(c) if c == 0.0)
    }
}

/// `phi(v) = e^{-rate v}`.
///
/// With `rate = 1` this is the unit-exponent exponential loss whose value
/// is exactly the squared standardized logistic residual; `rate = p/2`
/// gives the `p`-th power of the residual magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialMargin {
    pub rate: f64,
}

impl ExponentialMargin {
    pub const UNIT: ExponentialMargin = ExponentialMargin { rate: 1.0 };

    pub fn new(rate: f64) -> Result<Self> {
        if rate > 0.0 && rate.is_finite() {
            Ok(ExponentialMargin { rate })
        } else {
            Err(Error::Parameter { name: "rate", value: rate, reason: "must be positive and finite" })
        }
    }
}

impl MarginLoss for ExponentialMargin {
    fn name(&self) -> String {
        if self.rate == 1.0 {
            "exp-unit".into()
        } else {
            format!("exp-rate:{}", self.rate)
        }
    }

    fn eval(&self, v: f64) -> Result<f64> {
        if !v.is_finite() {
            return Err(Error::Domain { context: "loss", value: v, domain: "finite reals" });
        }
        Ok((-self.rate * v).exp())
    }

    fn derivative(&self, v: f64) -> Result<f64> {
        Ok(-self.rate * self.eval(v)?)
    }

    fn is_convex(&self) -> bool {
        true
    }
}

/// Loss values and derivatives on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTable {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
}

impl LossTable {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }
}

/// Tabulates `phi` and `phi'` on `n_points` equally spaced margins in `[v_min, v_max]`.
pub fn tabulate(loss: &dyn MarginLoss, v_min: f64, v_max: f64, n_points: usize) -> Result<LossTable> {
    if n_points < 2 {
        return Err(Error::Parameter { name: "n_points", value: n_points as f64, reason: "must be at least 2" });
    }
    if !(v_min < v_max) {
        return Err(Error::InvalidConfig(format!("empty range {v_min}:{v_max}")));
    }
    for v in [v_min, v_max] {
        if !loss.in_domain(v) {
            let (lo, hi) = loss.domain();
            return Err(Error::Domain {
                context: "tabulate",
                value: v,
                domain: if lo.is_finite() || hi.is_finite() { "(-1, 1)" } else { "finite reals" },
            });
        }
    }
    let step = (v_max - v_min) / (n_points - 1) as f64;
    let grid: Vec<f64> = (0..n_points)
        .map(|i| if i == n_points - 1 { v_max } else { v_min + step * i as f64 })
        .collect();
    let values = grid.iter().map(|&v| loss.eval(v)).collect::<Result<Vec<_>>>()?;
    let derivatives = grid.iter().map(|&v| loss.derivative(v)).collect::<Result<Vec<_>>>()?;
    Ok(LossTable { grid, values, derivatives })
}
