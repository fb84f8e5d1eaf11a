//! Symmetric CDFs `G` with `G(w) = 1 - G(-w)` and the odds transform
//! `q(w) = G(w) / (1 - G(w))`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetricCdf {
    /// `F(w) = 1 / (1 + e^{-w})` on the real line.
    Logistic,
    /// `G(w) = (w + 1) / 2` on the open interval (-1, 1).
    #[serde(rename = "uniform")]
    UniformPm1,
    /// Standard normal `Phi(w)` on the real line.
    Gaussian,
}

/// Numerically stable logistic CDF.
pub fn logistic_cdf(w: f64) -> f64 {
    if w >= 0.0 {
        1.0 / (1.0 + (-w).exp())
    } else {
        let e = w.exp();
        e / (1.0 + e)
    }
}

/// `F(w) (1 - F(w))`, computed from `e^{-|w|}` so it never overflows.
pub fn logistic_variance(w: f64) -> f64 {
    let e = (-w.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

/// `ln F(w) = -ln(1 + e^{-w})`.
pub fn ln_logistic_cdf(w: f64) -> f64 {
    -softplus(-w)
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn normal_pdf(w: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * w * w).exp()
}

pub fn normal_cdf(w: f64) -> f64 {
    0.5 * libm::erfc(-w * FRAC_1_SQRT_2)
}

/// `ln Phi(w)`; switches to the asymptotic tail series once `erfc` underflows.
pub fn ln_normal_cdf(w: f64) -> f64 {
    if w > -37.0 {
        normal_cdf(w).ln()
    } else {
        let z2 = 1.0 / (w * w);
        -0.5 * w * w - (-w * (2.0 * PI).sqrt()).ln() + (1.0 - z2 + 3.0 * z2 * z2 - 15.0 * z2 * z2 * z2).ln()
    }
}

impl SymmetricCdf {
    pub const ALL: [SymmetricCdf; 3] = [SymmetricCdf::Logistic, SymmetricCdf::UniformPm1, SymmetricCdf::Gaussian];

    /// Identifier used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            SymmetricCdf::Logistic => "logistic",
            SymmetricCdf::UniformPm1 => "uniform",
            SymmetricCdf::Gaussian => "gaussian",
        }
    }

    /// Closed support interval; the CDF is evaluated on its interior only.
    pub fn support(self) -> (f64, f64) {
        match self {
            SymmetricCdf::UniformPm1 => (-1.0, 1.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn is_bounded(self) -> bool {
        matches!(self, SymmetricCdf::UniformPm1)
    }

    pub fn contains(self, w: f64) -> bool {
        match self {
            SymmetricCdf::UniformPm1 => w.abs() < 1.0,
            _ => w.is_finite(),
        }
    }

    pub(crate) fn check(self, w: f64, context: &'static str) -> Result<()> {
        if self.contains(w) {
            Ok(())
        } else {
            Err(Error::Domain {
                context,
                value: w,
                domain: match self {
                    SymmetricCdf::UniformPm1 => "(-1, 1)",
                    _ => "finite reals",
                },
            })
        }
    }

    /// `G(w)`.
    pub fn cdf(self, w: f64) -> Result<f64> {
        self.check(w, "cdf")?;
        Ok(match self {
            SymmetricCdf::Logistic => logistic_cdf(w),
            SymmetricCdf::UniformPm1 => 0.5 * (w + 1.0),
            SymmetricCdf::Gaussian => normal_cdf(w),
        })
    }

    /// `1 - G(w)`, evaluated as `G(-w)` to avoid cancellation.
    pub fn survival(self, w: f64) -> Result<f64> {
        self.cdf(-w)
    }

    /// `G'(w)`.
    pub fn density(self, w: f64) -> Result<f64> {
        self.check(w, "density")?;
        Ok(match self {
            SymmetricCdf::Logistic => logistic_variance(w),
            SymmetricCdf::UniformPm1 => 0.5,
            SymmetricCdf::Gaussian => normal_pdf(w),
        })
    }

    /// `G''(w) / G'(w)`.
    pub fn density_log_derivative(self, w: f64) -> Result<f64> {
        self.check(w, "density_log_derivative")?;
        Ok(match self {
            SymmetricCdf::Logistic => 1.0 - 2.0 * logistic_cdf(w),
            SymmetricCdf::UniformPm1 => 0.0,
            SymmetricCdf::Gaussian => -w,
        })
    }

    /// `q(w) = G(w) / (1 - G(w))`.
    pub fn odds(self, w: f64) -> Result<f64> {
        Ok(self.ln_odds(w)?.exp())
    }

    /// `ln q(w)`.
    pub fn ln_odds(self, w: f64) -> Result<f64> {
        self.check(w, "odds")?;
        Ok(match self {
            SymmetricCdf::Logistic => w,
            SymmetricCdf::UniformPm1 => w.ln_1p() - (-w).ln_1p(),
            SymmetricCdf::Gaussian => ln_normal_cdf(w) - ln_normal_cdf(-w),
        })
    }

    /// `d/dw ln q(w) = G'(w) / (G(w) (1 - G(w)))`.
    pub fn ln_odds_derivative(self, w: f64) -> Result<f64> {
        self.check(w, "odds")?;
        Ok(match self {
            SymmetricCdf::Logistic => 1.0,
            SymmetricCdf::UniformPm1 => 2.0 / ((1.0 - w) * (1.0 + w)),
            SymmetricCdf::Gaussian => {
                let inv_mills = |x: f64| (ln_normal_pdf(x) - ln_normal_cdf(x)).exp();
                inv_mills(w) + inv_mills(-w)
            }
        })
    }
}

fn ln_normal_pdf(w: f64) -> f64 {
    FRAC_1_SQRT_2PI.ln() - 0.5 * w * w
}

impl fmt::Display for SymmetricCdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SymmetricCdf {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(SymmetricCdf::Logistic),
            "uniform" => Ok(SymmetricCdf::UniformPm1),
            "gaussian" => Ok(SymmetricCdf::Gaussian),
            other => Err(Error::InvalidConfig(format!("unknown CDF identifier `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn interior_grid(dist: SymmetricCdf) -> Vec<f64> {
        let (n, step) = if dist.is_bounded() { (19, 0.05) } else { (80, 0.25) };
        (1..=n).flat_map(|j| [j as f64 * step, -(j as f64) * step]).collect()
    }

    #[test]
    fn cdf_examples() {
        let l = SymmetricCdf::Logistic;
        assert_eq!(l.cdf(0.0).unwrap(), 0.5);
        assert_relative_eq!(l.cdf(3f64.ln()).unwrap(), 0.75, max_relative = 1e-15);
        assert_eq!(SymmetricCdf::UniformPm1.cdf(0.5).unwrap(), 0.75);
        assert_eq!(SymmetricCdf::Gaussian.cdf(0.0).unwrap(), 0.5);
    }

    #[test]
    fn density_examples() {
        assert_eq!(SymmetricCdf::Logistic.density(0.0).unwrap(), 0.25);
        assert_eq!(SymmetricCdf::UniformPm1.density(0.3).unwrap(), 0.5);
        // independent oracle: 1 / sqrt(2 pi)
        let oracle = 1.0 / (2.0 * PI).sqrt();
        assert_relative_eq!(SymmetricCdf::Gaussian.density(0.0).unwrap(), oracle, max_relative = 1e-15);
        assert!((oracle - 0.398942).abs() < 1e-6);
    }

    #[test]
    fn odds_examples() {
        let l = SymmetricCdf::Logistic;
        assert_eq!(l.odds(0.0).unwrap(), 1.0);
        assert_relative_eq!(l.odds(3f64.ln()).unwrap(), 3.0, max_relative = 1e-14);
        for w in [-2.0, -1.0, 1.0, 2.0] {
            assert_relative_eq!(l.odds(w).unwrap(), f64::exp(w), max_relative = 1e-15);
        }
    }

    #[test]
    fn uniform_endpoints_are_domain_errors() {
        let u = SymmetricCdf::UniformPm1;
        for w in [1.0, -1.0, 1.5] {
            assert!(matches!(u.cdf(w), Err(Error::Domain { .. })));
            assert!(matches!(u.odds(w), Err(Error::Domain { .. })));
            assert!(matches!(u.density(w), Err(Error::Domain { .. })));
        }
        assert!(SymmetricCdf::Logistic.cdf(f64::NAN).is_err());
    }

    #[test]
    fn logistic_is_stable_for_huge_arguments() {
        let l = SymmetricCdf::Logistic;
        assert_eq!(l.cdf(800.0).unwrap(), 1.0);
        assert_eq!(l.cdf(-800.0).unwrap(), 0.0);
        assert_eq!(l.density(800.0).unwrap(), 0.0);
        assert!(l.density(-750.0).unwrap().is_finite());
        assert_eq!(l.ln_odds(-800.0).unwrap(), -800.0);
    }

    #[test]
    fn symmetry_and_reciprocal_odds_on_grids() {
        for dist in SymmetricCdf::ALL {
            for w in interior_grid(dist) {
                let s = dist.cdf(w).unwrap() + dist.cdf(-w).unwrap() - 1.0;
                assert!(s.abs() < 1e-12, "{dist} {w}");
                let prod = dist.odds(w).unwrap() * dist.odds(-w).unwrap();
                assert_relative_eq!(prod, 1.0, max_relative = 1e-12);
                assert!((dist.density(w).unwrap() - dist.density(-w).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn density_matches_central_differences() {
        let h = 1e-5;
        for dist in SymmetricCdf::ALL {
            for w in interior_grid(dist) {
                if dist.is_bounded() && w.abs() + h >= 1.0 {
                    continue;
                }
                let fd = (dist.cdf(w + h).unwrap() - dist.cdf(w - h).unwrap()) / (2.0 * h);
                assert!((fd - dist.density(w).unwrap()).abs() < 1e-6, "{dist} {w}");
            }
        }
    }

    #[test]
    fn ln_odds_derivative_matches_differences() {
        let h = 1e-5;
        for dist in SymmetricCdf::ALL {
            for w in [-3.0f64, -0.7, 0.0, 0.4, 2.5] {
                let w = if dist.is_bounded() { w / 4.0 } else { w };
                let fd = (dist.ln_odds(w + h).unwrap() - dist.ln_odds(w - h).unwrap()) / (2.0 * h);
                assert_relative_eq!(fd, dist.ln_odds_derivative(w).unwrap(), max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn gaussian_tail_log_cdf_is_continuous() {
        let a = ln_normal_cdf(-36.999_999);
        let b = ln_normal_cdf(-37.000_001);
        assert!((a - b).abs() < 1e-3);
    }

    #[test]
    fn identifiers_round_trip() {
        for dist in SymmetricCdf::ALL {
            assert_eq!(dist.name().parse::<SymmetricCdf>().unwrap(), dist);
        }
        assert!("cauchy".parse::<SymmetricCdf>().is_err());
    }

    proptest! {
        #[test]
        fn cdf_is_monotone(a in -30.0f64..30.0, b in -30.0f64..30.0) {
            for dist in [SymmetricCdf::Logistic, SymmetricCdf::Gaussian] {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                prop_assert!(dist.cdf(lo).unwrap() <= dist.cdf(hi).unwrap());
            }
        }
    }
}
