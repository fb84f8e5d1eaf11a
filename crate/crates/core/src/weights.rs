//! Even, nonnegative weight functions `g(w)` that index a loss within the
//! conformable class of a symmetric CDF.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::distributions::{ln_logistic_cdf, ln_normal_cdf, logistic_cdf, logistic_variance, SymmetricCdf};
use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default scale for the measurement-error weight.
pub const BUZAS2009_DEFAULT_M: f64 = 1.0;

/// Relative tolerance used by [`check_even`].
pub const EVEN_TOLERANCE: f64 = 1e-9;

/// How a user-supplied weight satisfies evenness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evenness {
    /// The caller claims `g(w) = g(-w)`; loss construction verifies it on a grid.
    Asserted,
    /// Evaluate `(g(w) + g(-w)) / 2` instead of `g`.
    Symmetrize,
}

#[derive(Clone)]
pub struct CustomWeight {
    name: String,
    eval: ScalarFn,
    log_derivative: Option<ScalarFn>,
    evenness: Evenness,
}

impl fmt::Debug for CustomWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomWeight")
            .field("name", &self.name)
            .field("log_derivative", &self.log_derivative.is_some())
            .field("evenness", &self.evenness)
            .finish()
    }
}

impl CustomWeight {
    pub fn evenness(&self) -> Evenness {
        self.evenness
    }

    fn eval(&self, w: f64) -> f64 {
        match self.evenness {
            Evenness::Asserted => (self.eval)(w),
            Evenness::Symmetrize => 0.5 * ((self.eval)(w) + (self.eval)(-w)),
        }
    }

    fn log_derivative(&self, w: f64) -> Option<f64> {
        let ld = self.log_derivative.as_ref()?;
        Some(match self.evenness {
            Evenness::Asserted => ld(w),
            Evenness::Symmetrize => {
                let (gp, gm) = ((self.eval)(w), (self.eval)(-w));
                (gp * ld(w) - gm * ld(-w)) / (gp + gm)
            }
        })
    }
}

/// A weight function `g(w)`.
///
/// The named kinds cover the rows of the logistic loss table plus the
/// likelihood weight `G'(w) / sqrt(G(w)(1 - G(w)))`. `Scaled` and `Power`
/// build new weights from old ones; `Custom` wraps a closure.
#[derive(Debug, Clone)]
pub enum WeightFn {
    Constant(f64),
    Likelihood,
    /// `(F(w)(1 - F(w)))^{3/2}` with `F` logistic.
    Savage,
    /// `(2 pi m)^{-1/2} exp(-w^2 / (2m) - m/8)`.
    GaussianKernel { m: f64 },
    /// `((m + 1)/2) exp(-m|w|/2)`.
    LaplaceKernel { m: f64 },
    /// `(1/m) Phi'(w/m) / sqrt(F(w)(1 - F(w)))`.
    Buzas2009 { m: f64 },
    /// `2 sqrt((1 + w)(1 - w))`; generates squared loss under the uniform CDF.
    Semicircle,
    /// `G'(w)`, the density of the target CDF.
    Density,
    Scaled { factor: f64, base: Box<WeightFn> },
    Power { base: Box<WeightFn>, exponent: f64 },
    Custom(CustomWeight),
}

impl WeightFn {
    pub fn custom<F>(name: impl Into<String>, eval: F, evenness: Evenness) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        WeightFn::Custom(CustomWeight {
            name: name.into(),
            eval: Arc::new(eval),
            log_derivative: None,
            evenness,
        })
    }

    /// Attaches `d/dw ln g(w)` to a custom weight; other kinds are returned unchanged.
    pub fn with_log_derivative<F>(self, log_derivative: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        match self {
            WeightFn::Custom(mut c) => {
                c.log_derivative = Some(Arc::new(log_derivative));
                WeightFn::Custom(c)
            }
            other => other,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        WeightFn::Scaled { factor, base: Box::new(self) }
    }

    pub fn powered(self, exponent: f64) -> Self {
        WeightFn::Power { base: Box::new(self), exponent }
    }

    /// Rejects non-positive scale parameters and the like.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Parameter { name, value: v, reason: "must be positive and finite" })
            }
        };
        match self {
            WeightFn::Constant(c) => {
                if *c >= 0.0 && c.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Parameter { name: "c", value: *c, reason: "must be nonnegative and finite" })
                }
            }
            WeightFn::GaussianKernel { m } | WeightFn::LaplaceKernel { m } | WeightFn::Buzas2009 { m } => positive("m", *m),
            WeightFn::Scaled { factor, base } => {
                positive("factor", *factor)?;
                base.validate()
            }
            WeightFn::Power { base, exponent } => {
                positive("exponent", *exponent)?;
                base.validate()
            }
            _ => Ok(()),
        }
    }

    /// `g(w)`.
    pub fn eval(&self, dist: SymmetricCdf, w: f64) -> Result<f64> {
        dist.check(w, "weight")?;
        self.validate()?;
        self.eval_unchecked(dist, w)
    }

    fn eval_unchecked(&self, dist: SymmetricCdf, w: f64) -> Result<f64> {
        Ok(match self {
            WeightFn::Constant(c) => *c,
            WeightFn::Likelihood => match dist {
                SymmetricCdf::Logistic => logistic_variance(w).sqrt(),
                _ => dist.density(w)? / (dist.cdf(w)? * dist.cdf(-w)?).sqrt(),
            },
            WeightFn::Savage => logistic_variance(w).powf(1.5),
            WeightFn::GaussianKernel { m } => (-w * w / (2.0 * m) - m / 8.0).exp() / (2.0 * PI * m).sqrt(),
            WeightFn::LaplaceKernel { m } => 0.5 * (m + 1.0) * (-0.5 * m * w.abs()).exp(),
            WeightFn::Buzas2009 { .. } => self.ln_eval_unchecked(dist, w)?.exp(),
            WeightFn::Semicircle => {
                if w.abs() >= 1.0 {
                    0.0
                } else {
                    2.0 * ((1.0 + w) * (1.0 - w)).sqrt()
                }
            }
            WeightFn::Density => dist.density(w)?,
            WeightFn::Scaled { factor, base } => factor * base.eval_unchecked(dist, w)?,
            WeightFn::Power { base, exponent } => base.eval_unchecked(dist, w)?.powf(*exponent),
            WeightFn::Custom(c) => c.eval(w),
        })
    }

    /// `ln g(w)`, evaluated without forming `g` where the named form allows,
    /// so that `q(w)^{-1/2} g(w)` stays finite for large `|w|`.
    pub fn ln_eval(&self, dist: SymmetricCdf, w: f64) -> Result<f64> {
        dist.check(w, "weight")?;
        self.validate()?;
        self.ln_eval_unchecked(dist, w)
    }

    fn ln_eval_unchecked(&self, dist: SymmetricCdf, w: f64) -> Result<f64> {
        let ln_fvar = |w: f64| ln_logistic_cdf(w) + ln_logistic_cdf(-w);
        Ok(match self {
            WeightFn::Likelihood => match dist {
                SymmetricCdf::Logistic => 0.5 * ln_fvar(w),
                SymmetricCdf::Gaussian => {
                    -0.5 * (2.0 * PI).ln() - 0.5 * w * w - 0.5 * (ln_normal_cdf(w) + ln_normal_cdf(-w))
                }
                SymmetricCdf::UniformPm1 => 0.5f64.ln() - 0.5 * (0.25 * (1.0 + w) * (1.0 - w)).ln(),
            },
            WeightFn::Savage => 1.5 * ln_fvar(w),
            WeightFn::GaussianKernel { m } => -0.5 * (2.0 * PI * m).ln() - w * w / (2.0 * m) - m / 8.0,
            WeightFn::LaplaceKernel { m } => (0.5 * (m + 1.0)).ln() - 0.5 * m * w.abs(),
            WeightFn::Buzas2009 { m } => {
                let z = w / m;
                -m.ln() - 0.5 * (2.0 * PI).ln() - 0.5 * z * z - 0.5 * ln_fvar(w)
            }
            WeightFn::Density if dist == SymmetricCdf::Gaussian => -0.5 * (2.0 * PI).ln() - 0.5 * w * w,
            WeightFn::Density if dist == SymmetricCdf::Logistic => ln_fvar(w),
            WeightFn::Scaled { factor, base } => factor.ln() + base.ln_eval_unchecked(dist, w)?,
            WeightFn::Power { base, exponent } => exponent * base.ln_eval_unchecked(dist, w)?,
            _ => self.eval_unchecked(dist, w)?.ln(),
        })
    }

    /// `d/dw ln g(w)`, analytic for every named kind.
    pub fn log_derivative(&self, dist: SymmetricCdf, w: f64) -> Result<f64> {
        dist.check(w, "weight log-derivative")?;
        self.validate()?;
        if self.eval_unchecked(dist, w)? <= 0.0 {
            return Err(Error::Domain {
                context: "weight log-derivative",
                value: w,
                domain: "points where g(w) > 0",
            });
        }
        self.log_derivative_unchecked(dist, w)
    }

    fn log_derivative_unchecked(&self, dist: SymmetricCdf, w: f64) -> Result<f64> {
        // d/dw ln(F(1 - F)) = 1 - 2F
        let dln_fvar = |w: f64| 1.0 - 2.0 * logistic_cdf(w);
        Ok(match self {
            WeightFn::Constant(_) => 0.0,
            WeightFn::Likelihood => {
                let g = dist.cdf(w)?;
                let s = dist.cdf(-w)?;
                let dens = dist.density(w)?;
                dist.density_log_derivative(w)? - 0.5 * dens / g + 0.5 * dens / s
            }
            WeightFn::Savage => 1.5 * dln_fvar(w),
            WeightFn::GaussianKernel { m } => -w / m,
            WeightFn::LaplaceKernel { m } => -0.5 * m * sign0(w),
            WeightFn::Buzas2009 { m } => -w / (m * m) - 0.5 * dln_fvar(w),
            WeightFn::Semicircle => -w / ((1.0 - w) * (1.0 + w)),
            WeightFn::Density => dist.density_log_derivative(w)?,
            WeightFn::Scaled { base, .. } => base.log_derivative_unchecked(dist, w)?,
            WeightFn::Power { base, exponent } => exponent * base.log_derivative_unchecked(dist, w)?,
            WeightFn::Custom(c) => c
                .log_derivative(w)
                .ok_or_else(|| Error::Unsupported(format!("custom weight `{}` has no log-derivative", c.name)))?,
        })
    }

    pub fn has_log_derivative(&self) -> bool {
        match self {
            WeightFn::Custom(c) => c.log_derivative.is_some(),
            WeightFn::Scaled { base, .. } | WeightFn::Power { base, .. } => base.has_log_derivative(),
            _ => true,
        }
    }

    pub fn is_custom(&self) -> bool {
        match self {
            WeightFn::Custom(_) => true,
            WeightFn::Scaled { base, .. } | WeightFn::Power { base, .. } => base.is_custom(),
            _ => false,
        }
    }

    /// Identifier in the command-line syntax (`gauss:1`, `laplace:2`, ...).
    pub fn identifier(&self) -> String {
        match self {
            WeightFn::Constant(c) => format!("constant:{c}"),
            WeightFn::Likelihood => "likelihood".into(),
            WeightFn::Savage => "savage".into(),
            WeightFn::GaussianKernel { m } => format!("gauss:{m}"),
            WeightFn::LaplaceKernel { m } => format!("laplace:{m}"),
            WeightFn::Buzas2009 { m } => format!("buzas2009:{m}"),
            WeightFn::Semicircle => "semicircle".into(),
            WeightFn::Density => "density".into(),
            WeightFn::Scaled { factor, base } => format!("{factor}*{}", base.identifier()),
            WeightFn::Power { base, exponent } => format!("{}^{exponent}", base.identifier()),
            WeightFn::Custom(c) => format!("custom:{}", c.name),
        }
    }
}

fn sign0(w: f64) -> f64 {
    if w > 0.0 {
        1.0
    } else if w < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl fmt::Display for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.identifier())
    }
}

impl FromStr for WeightFn {
    type Err = Error;

    /// Parses `constant:<c>`, `likelihood`, `savage`, `gauss:<m>`,
    /// `laplace:<m>`, `buzas2009[:<m>]`, `semicircle` and `density`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let param = |name: &str| -> Result<f64> {
            let raw = arg.ok_or_else(|| Error::InvalidConfig(format!("weight `{name}` needs a parameter, e.g. `{name}:1`")))?;
            raw.parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("cannot parse weight parameter `{raw}`")))
        };
        let no_param = |w: WeightFn| -> Result<WeightFn> {
            match arg {
                None => Ok(w),
                Some(_) => Err(Error::InvalidConfig(format!("weight `{head}` takes no parameter"))),
            }
        };
        let weight = match head {
            "constant" => WeightFn::Constant(param("constant")?),
            "likelihood" => no_param(WeightFn::Likelihood)?,
            "savage" => no_param(WeightFn::Savage)?,
            "gauss" => WeightFn::GaussianKernel { m: param("gauss")? },
            "laplace" => WeightFn::LaplaceKernel { m: param("laplace")? },
            "buzas2009" => WeightFn::Buzas2009 {
                m: if arg.is_some() { param("buzas2009")? } else { BUZAS2009_DEFAULT_M },
            },
            "semicircle" => no_param(WeightFn::Semicircle)?,
            "density" => no_param(WeightFn::Density)?,
            other => return Err(Error::InvalidConfig(format!("unknown weight identifier `{other}`"))),
        };
        weight.validate()?;
        Ok(weight)
    }
}

/// Result of [`check_even`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvenReport {
    pub even: bool,
    pub max_asymmetry: f64,
}

/// Checks `|g(w) - g(-w)| <= 1e-9 (1 + |g(w)|)` over `grid`. Points where
/// either side cannot be evaluated are ignored.
pub fn check_even(weight: &WeightFn, dist: SymmetricCdf, grid: &[f64]) -> EvenReport {
    let mut even = true;
    let mut max_asymmetry: f64 = 0.0;
    for &w in grid {
        let (Ok(a), Ok(b)) = (weight.eval(dist, w), weight.eval(dist, -w)) else {
            continue;
        };
        let diff = (a - b).abs();
        if diff.is_nan() || diff > EVEN_TOLERANCE * (1.0 + a.abs()) {
            even = false;
        }
        max_asymmetry = max_asymmetry.max(if diff.is_nan() { f64::INFINITY } else { diff });
    }
    EvenReport { even, max_asymmetry }
}

/// The grid used to gate custom weights: `±{0.1, ..., 5}` for unbounded
/// supports, `±{0.05, ..., 0.95}` on (-1, 1).
pub fn default_even_grid(dist: SymmetricCdf) -> Vec<f64> {
    let (n, step) = if dist.is_bounded() { (19, 0.05) } else { (50, 0.1) };
    (1..=n).flat_map(|j| [j as f64 * step, -(j as f64) * step]).collect()
}
