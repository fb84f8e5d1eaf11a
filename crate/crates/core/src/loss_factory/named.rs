use std::fmt;
use std::str::FromStr;

use super::{make_loss, registered_closed_form, ConformableLoss, ExponentialMargin, MarginLoss};
use crate::distributions::SymmetricCdf;
use crate::error::{Error, Result};
use crate::weights::WeightFn;

pub const GAUSSIAN_DEFAULT_M: f64 = 1.0;
pub const LAPLACE_DEFAULT_M: f64 = 2.0;

/// The losses addressable by name on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedLoss {
    /// `e^{-v/2}`.
    Exponential,
    /// `ln(1 + e^{-v})`.
    Logistic,
    /// `(1 + e^v)^{-2}`.
    Savage,
    Gaussian { m: f64 },
    Laplace { m: f64 },
    /// `(1 - v)^2` on (-1, 1).
    Squared,
    /// `e^{-v}`; not conformable to the logistic CDF, but equal to the
    /// squared standardized logistic residual.
    ExpUnit,
}

impl NamedLoss {
    pub fn identifier(&self) -> String {
        match self {
            NamedLoss::Exponential => "exponential".into(),
            NamedLoss::Logistic => "logistic".into(),
            NamedLoss::Savage => "savage".into(),
            NamedLoss::Gaussian { m } => format!("gaussian:{m}"),
            NamedLoss::Laplace { m } => format!("laplace:{m}"),
            NamedLoss::Squared => "squared".into(),
            NamedLoss::ExpUnit => "exp-unit".into(),
        }
    }

    /// The `(G, g, k)` triple behind a conformable named loss.
    pub fn triple(&self) -> Option<(SymmetricCdf, WeightFn, f64)> {
        use SymmetricCdf::*;
        Some(match *self {
            NamedLoss::Exponential => (Logistic, WeightFn::Constant(0.5), 1.0),
            NamedLoss::Logistic => (Logistic, WeightFn::Likelihood, std::f64::consts::LN_2),
            NamedLoss::Savage => (Logistic, WeightFn::Savage.scaled(2.0), 0.25),
            NamedLoss::Gaussian { m } => {
                (Logistic, WeightFn::GaussianKernel { m }, crate::distributions::normal_cdf(-0.5 * m.sqrt()))
            }
            NamedLoss::Laplace { m } => (Logistic, WeightFn::LaplaceKernel { m }, 1.0),
            NamedLoss::Squared => (UniformPm1, WeightFn::Semicircle, 1.0),
            NamedLoss::ExpUnit => return None,
        })
    }

    pub fn build(&self) -> Result<AnyLoss> {
        match self.triple() {
            Some((dist, weight, k)) => Ok(AnyLoss::Conformable(
                make_loss(dist, weight, k)?.with_name(self.identifier()),
            )),
            None => Ok(AnyLoss::Exponential(ExponentialMargin::UNIT)),
        }
    }

    /// Builds a conformable named loss; `exp-unit` is rejected.
    pub fn conformable(&self) -> Result<ConformableLoss> {
        match self.build()? {
            AnyLoss::Conformable(loss) => Ok(loss),
            AnyLoss::Exponential(_) => Err(Error::Unsupported(format!(
                "`{}` is not conformable to a symmetric CDF in the odds parameterization",
                self.identifier()
            ))),
        }
    }
}

impl fmt::Display for NamedLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.identifier())
    }
}

impl FromStr for NamedLoss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let m = |default: f64| -> Result<f64> {
            let m = match arg {
                None => default,
                Some(raw) => raw
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidConfig(format!("cannot parse loss parameter `{raw}`")))?,
            };
            if m > 0.0 && m.is_finite() {
                Ok(m)
            } else {
                Err(Error::Parameter { name: "m", value: m, reason: "must be positive and finite" })
            }
        };
        let plain = |loss: NamedLoss| match arg {
            None => Ok(loss),
            Some(_) => Err(Error::InvalidConfig(format!("loss `{head}` takes no parameter"))),
        };
        match head {
            "exponential" => plain(NamedLoss::Exponential),
            "logistic" => plain(NamedLoss::Logistic),
            "savage" => plain(NamedLoss::Savage),
            "gaussian" => Ok(NamedLoss::Gaussian { m: m(GAUSSIAN_DEFAULT_M)? }),
            "laplace" => Ok(NamedLoss::Laplace { m: m(LAPLACE_DEFAULT_M)? }),
            "squared" => plain(NamedLoss::Squared),
            "exp-unit" => plain(NamedLoss::ExpUnit),
            other => Err(Error::InvalidConfig(format!(
                "unknown loss `{other}` (expected exponential, logistic, savage, gaussian[:m], laplace[:m], squared, exp-unit)"
            ))),
        }
    }
}

/// Builds a loss from CDF and weight identifiers. Without an explicit `k`
/// the level is taken from the registered closed form, or 1.
pub fn build_loss(dist: SymmetricCdf, weight: WeightFn, k: Option<f64>) -> Result<ConformableLoss> {
    let k = match k {
        Some(k) => k,
        None => registered_closed_form(dist, &weight)
            .map(|(cf, scale)| scale * cf.natural_k())
            .filter(|k| *k > 0.0)
            .unwrap_or(1.0),
    };
    make_loss(dist, weight, k)
}

/// Either a conformable loss or the unit-exponent exponential loss.
#[derive(Debug, Clone)]
pub enum AnyLoss {
    Conformable(ConformableLoss),
    Exponential(ExponentialMargin),
}

impl AnyLoss {
    pub fn as_conformable(&self) -> Option<&ConformableLoss> {
        match self {
            AnyLoss::Conformable(loss) => Some(loss),
            AnyLoss::Exponential(_) => None,
        }
    }
}

impl MarginLoss for AnyLoss {
    fn name(&self) -> String {
        match self {
            AnyLoss::Conformable(l) => l.name(),
            AnyLoss::Exponential(l) => l.name(),
        }
    }

    fn eval(&self, v: f64) -> Result<f64> {
        match self {
            AnyLoss::Conformable(l) => l.eval(v),
            AnyLoss::Exponential(l) => l.eval(v),
        }
    }

    fn derivative(&self, v: f64) -> Result<f64> {
        match self {
            AnyLoss::Conformable(l) => l.derivative(v),
            AnyLoss::Exponential(l) => l.derivative(v),
        }
    }

    fn domain(&self) -> (f64, f64) {
        match self {
            AnyLoss::Conformable(l) => MarginLoss::domain(l),
            AnyLoss::Exponential(l) => l.domain(),
        }
    }

    fn is_convex(&self) -> bool {
        match self {
            AnyLoss::Conformable(l) => l.is_convex(),
            AnyLoss::Exponential(l) => l.is_convex(),
        }
    }

    fn is_strictly_decreasing(&self) -> bool {
        match self {
            AnyLoss::Conformable(l) => l.is_strictly_decreasing(),
            AnyLoss::Exponential(l) => l.is_strictly_decreasing(),
        }
    }
}
