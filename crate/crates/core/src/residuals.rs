//! Standardized logistic regression residuals (SLRRs) and their exact
//! relation to the margin: `S = y* e^{-y* f / 2}`, so `-ln S^2 = y* f`.

use crate::distributions::logistic_cdf;
use crate::error::{Error, Result};
use crate::label::Label;
use crate::loss_factory::MarginLoss;

/// Above this `|f|` the residual is carried in log space.
pub const LOG_SPACE_THRESHOLD: f64 = 60.0;

/// A standardized logistic residual together with the margin it encodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlrrValue {
    /// Signed residual; may overflow to ±inf for very negative margins,
    /// in which case [`SlrrValue::margin`] remains exact.
    pub s: f64,
    pub margin: f64,
    pub y_star: Label,
}

impl SlrrValue {
    /// `S^2 = e^{-margin}`.
    pub fn s_squared(&self) -> f64 {
        (-self.margin).exp()
    }

    /// `ln S^2 = -margin`.
    pub fn ln_s_squared(&self) -> f64 {
        -self.margin
    }
}

/// `S = y* e^{-y* f / 2}`.
pub fn slrr(y_star: Label, f: f64) -> Result<SlrrValue> {
    if !f.is_finite() {
        return Err(Error::NonFinite("score"));
    }
    let y = y_star.sign();
    let margin = y * f;
    let s = if f.abs() > LOG_SPACE_THRESHOLD {
        y * (-0.5 * margin).exp()
    } else {
        y * (-0.5 * y * f).exp()
    };
    Ok(SlrrValue { s, margin, y_star })
}

/// The textbook form `(y - F(f)) / sqrt(F(f)(1 - F(f)))` with `y` in {0, 1}.
/// Both `1 - F` and `F` are evaluated directly to avoid cancellation.
pub fn slrr_definitional(y_star: Label, f: f64) -> f64 {
    let p = logistic_cdf(f);
    let q = logistic_cdf(-f);
    let residual = match y_star {
        Label::Positive => q,
        Label::Negative => -p,
    };
    residual / (p * q).sqrt()
}

/// `-ln S^2` for an SLRR value; returns the stored margin, so it is exact
/// even where `s` itself overflowed.
pub fn margin_of(value: &SlrrValue) -> f64 {
    value.margin
}

/// `-ln S^2` from a bare residual.
pub fn margin_from_residual(s: f64) -> Result<f64> {
    if s == 0.0 || !s.is_finite() {
        return Err(Error::Domain { context: "margin_from_residual", value: s, domain: "finite nonzero residuals" });
    }
    Ok(-2.0 * s.abs().ln())
}

/// Multiplicative split of a squared residual across additive score components.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// `S^2(sum_m theta_m b_m)`.
    pub total_s2: f64,
    /// `S^2(theta_m b_m)` per component.
    pub factor_s2: Vec<f64>,
    /// `ln S^2` per component; these sum to `ln total_s2`.
    pub factor_ln_s2: Vec<f64>,
}

impl Partition {
    pub fn product(&self) -> f64 {
        self.factor_s2.iter().product()
    }

    /// `|prod - total| / total`.
    pub fn relative_discrepancy(&self) -> f64 {
        (self.product() - self.total_s2).abs() / self.total_s2
    }
}

/// `S^2(f) = prod_m S^2(theta_m b_m)` for `f = sum_m theta_m b_m`.
/// `components` holds `(theta_m, b_m(x))` pairs.
pub fn partition(y_star: Label, components: &[(f64, f64)]) -> Result<Partition> {
    if components.is_empty() {
        return Err(Error::EmptyComponents);
    }
    let terms = component_terms(components)?;
    let f: f64 = terms.iter().sum();
    let total = slrr(y_star, f)?;
    let factors = terms.iter().map(|&t| slrr(y_star, t)).collect::<Result<Vec<_>>>()?;
    Ok(Partition {
        total_s2: total.s_squared(),
        factor_s2: factors.iter().map(SlrrValue::s_squared).collect(),
        factor_ln_s2: factors.iter().map(SlrrValue::ln_s_squared).collect(),
    })
}

fn component_terms(components: &[(f64, f64)]) -> Result<Vec<f64>> {
    components
        .iter()
        .map(|&(theta, b)| {
            let t = theta * b;
            if t.is_finite() {
                Ok(t)
            } else {
                Err(Error::NonFinite("component"))
            }
        })
        .collect()
}

/// `ln S^2(theta_k b_k) / ln S^2(f)`, which equals `theta_k b_k / f`.
pub fn contribution_ratio(y_star: Label, components: &[(f64, f64)], k: usize) -> Result<f64> {
    if components.is_empty() {
        return Err(Error::EmptyComponents);
    }
    if k >= components.len() {
        return Err(Error::DimensionMismatch { expected: components.len(), actual: k });
    }
    let terms = component_terms(components)?;
    let total_ln: f64 = -y_star.sign() * terms.iter().sum::<f64>();
    if total_ln == 0.0 {
        return Err(Error::DegenerateMargin);
    }
    Ok(slrr(y_star, terms[k])?.ln_s_squared() / total_ln)
}

/// `ln{ S^2(theta_k b_k) / (S^2(f))^{1/M} }`: component `k` against the
/// geometric mean of all components.
pub fn geometric_mean_contrast(y_star: Label, components: &[(f64, f64)], k: usize) -> Result<f64> {
    let part = partition(y_star, components)?;
    if k >= part.factor_ln_s2.len() {
        return Err(Error::DimensionMismatch { expected: part.factor_ln_s2.len(), actual: k });
    }
    let mean_ln = part.factor_ln_s2.iter().sum::<f64>() / part.factor_ln_s2.len() as f64;
    Ok(part.factor_ln_s2[k] - mean_ln)
}

/// `phi(-ln S^2)`: a margin loss expressed on the residual scale.
pub fn loss_on_residual_scale(loss: &dyn MarginLoss, s_abs: f64) -> Result<f64> {
    if !(s_abs > 0.0 && s_abs.is_finite()) {
        return Err(Error::Domain { context: "loss_on_residual_scale", value: s_abs, domain: "positive finite |S|" });
    }
    loss.eval(-2.0 * s_abs.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss_factory::{ExponentialMargin, NamedLoss};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: Label = Label::Positive;
    const N: Label = Label::Negative;

    #[test]
    fn slrr_examples() {
        assert_eq!(slrr(P, 0.0).unwrap().s, 1.0);
        let v = slrr(N, 2.0).unwrap();
        assert_relative_eq!(v.s, -std::f64::consts::E, max_relative = 1e-15);
        assert_relative_eq!(-(v.s * v.s).ln(), -2.0, max_relative = 1e-15);
        for f in [0.5, 1.0, 3.0] {
            let pos = slrr(P, f).unwrap().s;
            let neg = slrr(N, f).unwrap().s;
            assert_relative_eq!(pos, -1.0 / neg, max_relative = 1e-15);
        }
    }

    #[test]
    fn margin_examples() {
        assert_eq!(margin_from_residual(1.0).unwrap(), 0.0);
        assert_relative_eq!(margin_from_residual(-std::f64::consts::E).unwrap(), -2.0, max_relative = 1e-15);
        assert_relative_eq!(margin_from_residual(0.1).unwrap(), 100f64.ln(), max_relative = 1e-15);
        assert!((100f64.ln() - 4.60517).abs() < 1e-5);
        assert!(margin_from_residual(0.0).is_err());
    }

    #[test]
    fn huge_scores_keep_the_margin_exact() {
        let v = slrr(N, 2000.0).unwrap();
        assert!(v.s.is_infinite());
        assert_eq!(margin_of(&v), -2000.0);
        assert_eq!(v.ln_s_squared(), 2000.0);
    }

    #[test]
    fn round_trip_on_seeded_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let y = if rng.random_bool(0.5) { P } else { N };
            let f: f64 = rng.random_range(-30.0..30.0);
            let v = slrr(y, f).unwrap();
            assert!((margin_of(&v) - y.sign() * f).abs() <= 1e-12);
            assert!((margin_from_residual(v.s).unwrap() - y.sign() * f).abs() <= 1e-12);
        }
    }

    #[test]
    fn matches_definitional_form() {
        for i in -300..=300 {
            let f = i as f64 * 0.1;
            for y in [P, N] {
                let a = slrr(y, f).unwrap().s;
                let b = slrr_definitional(y, f);
                assert_relative_eq!(a, b, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn partition_examples() {
        let p = partition(P, &[(1.0, 0.5), (1.0, -0.5)]).unwrap();
        assert_relative_eq!(p.total_s2, 1.0);
        assert_relative_eq!(p.factor_s2[0], (-0.5f64).exp());
        assert_relative_eq!(p.factor_s2[1], (0.5f64).exp());

        // S^2 = e^{-y* v} per factor
        let p = partition(N, &[(2.0, 1.0), (1.0, 1.0)]).unwrap();
        assert_relative_eq!(p.total_s2, 3f64.exp(), max_relative = 1e-15);
        assert_relative_eq!(p.factor_s2[0], 2f64.exp(), max_relative = 1e-15);
        assert_relative_eq!(p.factor_s2[1], 1f64.exp(), max_relative = 1e-15);

        let p = partition(P, &[(0.7, 2.0)]).unwrap();
        assert_eq!(p.total_s2, p.factor_s2[0]);
        assert!(matches!(partition(P, &[]), Err(Error::EmptyComponents)));
    }

    #[test]
    fn contribution_examples() {
        assert_eq!(contribution_ratio(P, &[(1.0, 1.0), (1.0, 1.0)], 0).unwrap(), 0.5);
        assert_relative_eq!(contribution_ratio(N, &[(3.0, 1.0), (1.0, 1.0)], 0).unwrap(), 0.75);
        assert!(matches!(contribution_ratio(P, &[(1.0, 1.0), (-1.0, 1.0)], 0), Err(Error::DegenerateMargin)));
    }

    #[test]
    fn geometric_mean_contrast_matches_centered_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let m = rng.random_range(2..6);
            let comps: Vec<(f64, f64)> = (0..m).map(|_| (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
            let y = if rng.random_bool(0.5) { P } else { N };
            let mean = comps.iter().map(|(t, b)| t * b).sum::<f64>() / m as f64;
            for k in 0..m {
                let expected = -y.sign() * (comps[k].0 * comps[k].1 - mean);
                let got = geometric_mean_contrast(y, &comps, k).unwrap();
                assert!((got - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn residual_scale_examples() {
        let lap = NamedLoss::Laplace { m: 2.0 }.conformable().unwrap();
        assert_relative_eq!(loss_on_residual_scale(&lap, 1.0).unwrap(), 1.0);
        assert_relative_eq!(loss_on_residual_scale(&lap, 0.5).unwrap(), 0.125, max_relative = 1e-14);
        // |S| >= 1 branch
        let s: f64 = 3.0;
        let expected = 1.0 + 3.0 * (1.0 - 1.0 / s);
        assert_relative_eq!(loss_on_residual_scale(&lap, s).unwrap(), expected, max_relative = 1e-14);

        let exp = ExponentialMargin::UNIT;
        for s in [0.3, 1.0, 2.0] {
            assert_relative_eq!(loss_on_residual_scale(&exp, s).unwrap(), s * s, max_relative = 1e-14);
        }
        assert!(loss_on_residual_scale(&exp, 0.0).is_err());
    }

    #[test]
    fn laplace_approaches_zero_one_loss() {
        let lap = NamedLoss::Laplace { m: 100.0 }.conformable().unwrap();
        assert!(loss_on_residual_scale(&lap, 0.5).unwrap() < 0.01);
        assert!((loss_on_residual_scale(&lap, 2.0).unwrap() - 2.0).abs() < 0.05);
    }

    #[test]
    fn logistic_loss_is_log_geometric_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<(Label, f64)> = (0..200)
            .map(|_| (if rng.random_bool(0.4) { P } else { N }, rng.random_range(-6.0..6.0)))
            .collect();
        let mean_loss = rows.iter().map(|&(y, f)| (1.0 + (-y.sign() * f).exp()).ln()).sum::<f64>() / 200.0;
        let log_geo = rows.iter().map(|&(y, f)| (1.0 + slrr(y, f).unwrap().s_squared()).ln()).sum::<f64>() / 200.0;
        assert!((mean_loss - log_geo).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn sign_and_reciprocal_laws(f in -30.0f64..30.0) {
            let pos = slrr(P, f).unwrap();
            let neg = slrr(N, f).unwrap();
            prop_assert!((pos.s * neg.s + 1.0).abs() <= 1e-12);
            prop_assert!(pos.s > 0.0 && neg.s < 0.0);
            prop_assert_eq!(pos.s.abs() < 1.0, pos.margin > 0.0);
        }

        #[test]
        fn partition_identity(y in prop::bool::ANY, comps in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..=8)) {
            let y = if y { P } else { N };
            let p = partition(y, &comps).unwrap();
            prop_assert!(p.relative_discrepancy() <= 1e-10);
        }
    }
}
