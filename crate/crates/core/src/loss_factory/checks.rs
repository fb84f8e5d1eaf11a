use serde::Serialize;

use super::{ConformableLoss, MarginLoss};
use crate::distributions::SymmetricCdf;
use crate::error::{Error, Result};

/// Relative tolerance of the derivative-ratio test.
pub const CONFORMABILITY_TOLERANCE: f64 = 1e-8;

// Slack for rounding when comparing the two log-derivatives.
const CONVEXITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformabilityReport {
    pub pass: bool,
    pub max_rel_err: f64,
    pub evaluated: usize,
    /// Grid points skipped because `phi'(v)` or `phi'(-v)` vanished or
    /// `v` lay outside the loss domain.
    pub skipped: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub convex: bool,
    /// Largest `d/dv ln g(v) - (1/2) d/dv ln q(v)` over the grid, floored at 0.
    pub max_violation: f64,
    /// Where the largest violation occurred.
    pub worst_at: Option<f64>,
}

/// `v in ±{0.25 j : j = 1..40}` plus a neighbourhood of zero for unbounded
/// supports; `±{0.05 j : j = 1..19}` on (-1, 1).
pub fn default_check_grid(dist: SymmetricCdf) -> Vec<f64> {
    if dist.is_bounded() {
        (1..=19).flat_map(|j| [0.05 * j as f64, -0.05 * j as f64]).collect()
    } else {
        let mut grid: Vec<f64> = (1..=40).flat_map(|j| [0.25 * j as f64, -0.25 * j as f64]).collect();
        grid.extend([1e-3, -1e-3, 1e-2, -1e-2, 0.1, -0.1]);
        grid
    }
}

/// Tests `phi'(-v) / phi'(v) = q(v)` to relative error
/// [`CONFORMABILITY_TOLERANCE`] on every grid point.
pub fn conformability_check(loss: &ConformableLoss, grid: &[f64]) -> ConformabilityReport {
    odds_ratio_check(loss, loss.dist(), grid)
}

/// The same derivative-ratio test for any margin loss against the odds of
/// `dist`.
pub fn odds_ratio_check(loss: &dyn MarginLoss, dist: SymmetricCdf, grid: &[f64]) -> ConformabilityReport {
    let mut max_rel_err: f64 = 0.0;
    let mut evaluated = 0;
    let mut skipped = Vec::new();
    let mut pass = true;
    for &v in grid {
        let (Ok(d_pos), Ok(d_neg), Ok(ln_q)) = (loss.derivative(v), loss.derivative(-v), dist.ln_odds(v)) else {
            skipped.push(v);
            continue;
        };
        if d_pos == 0.0 || d_neg == 0.0 || !d_pos.is_finite() || !d_neg.is_finite() {
            skipped.push(v);
            continue;
        }
        // |ratio - q| / q = |ratio / q - 1|; dividing first keeps large q finite
        let rel = ((d_neg / d_pos) * (-ln_q).exp() - 1.0).abs();
        evaluated += 1;
        if !(rel <= CONFORMABILITY_TOLERANCE) {
            pass = false;
        }
        max_rel_err = max_rel_err.max(if rel.is_nan() { f64::INFINITY } else { rel });
    }
    ConformabilityReport { pass: pass && evaluated > 0, max_rel_err, evaluated, skipped }
}

/// A loss with positive, differentiable weight is convex iff
/// `d/dv ln g(v) <= (1/2) d/dv ln q(v)` everywhere.
pub fn convexity_check(loss: &ConformableLoss, grid: &[f64]) -> Result<ConvexityReport> {
    let dist = loss.dist();
    let weight = loss.weight();
    if !weight.has_log_derivative() {
        return Err(Error::Unsupported(format!("weight `{weight}` has no log-derivative")));
    }
    let mut worst: Option<(f64, f64)> = None;
    for &v in grid {
        if !dist.contains(v) || weight.eval(dist, v)? <= 0.0 {
            continue;
        }
        let violation = weight.log_derivative(dist, v)? - 0.5 * dist.ln_odds_derivative(v)?;
        if worst.is_none_or(|(_, x)| violation > x) {
            worst = Some((v, violation));
        }
    }
    Ok(match worst {
        Some((at, x)) => ConvexityReport {
            convex: x <= CONVEXITY_SLACK,
            max_violation: x.max(0.0),
            worst_at: if x > CONVEXITY_SLACK { Some(at) } else { None },
        },
        None => ConvexityReport { convex: true, max_violation: 0.0, worst_at: None },
    })
}
