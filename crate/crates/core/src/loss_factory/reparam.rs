use std::sync::Arc;

use super::{make_loss, ConformableLoss};
use crate::distributions::SymmetricCdf;
use crate::error::{Error, Result};
use crate::weights::{Evenness, WeightFn};

const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Builds the loss generated by `h*(w) = q(w)^{-1/2} b(G(w)) g(w)`.
///
/// `b` must satisfy `b(x) = b(1 - x)` on (0, 1); it is checked on the
/// probability grid `{0.01, ..., 0.49}`. The composite weight
/// `b(G(w)) g(w)` is even whenever `g` is, so the result stays in the
/// conformable class of `dist`.
pub fn reparameterize<B>(dist: SymmetricCdf, b: B, weight: WeightFn, k: f64) -> Result<ConformableLoss>
where
    B: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let mut max_asymmetry: f64 = 0.0;
    for j in 1..50 {
        let x = j as f64 / 100.0;
        let (lo, hi) = (b(x), b(1.0 - x));
        let diff = (lo - hi).abs();
        max_asymmetry = max_asymmetry.max(if diff.is_nan() { f64::INFINITY } else { diff });
        if !(diff <= SYMMETRY_TOLERANCE * (1.0 + lo.abs())) {
            return Err(Error::NotSymmetric { max_asymmetry });
        }
    }
    weight.validate()?;

    let b = Arc::new(b);
    let name = format!("reparam[{}]", weight.identifier());
    let inner = weight.clone();
    let composite = WeightFn::custom(
        name.clone(),
        move |w| match (dist.cdf(w), inner.eval(dist, w)) {
            (Ok(p), Ok(g)) => b(p) * g,
            _ => f64::NAN,
        },
        Evenness::Asserted,
    );
    Ok(make_loss(dist, composite, k)?.with_name(name))
}
