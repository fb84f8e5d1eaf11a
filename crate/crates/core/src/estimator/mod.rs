//! Empirical risk minimization of `(1/n) sum_i phi(y*_i f(x_i; beta))` for
//! linear and fixed-basis models, plus estimating-score diagnostics.

mod predict;
mod score;

pub use predict::{classify, g_scale_probability, predict, soft_probability};
pub use score::{conditional_expected_score, score_at, score_sensitivity, score_variance, Matrix};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;
use crate::loss_factory::{ExponentialMargin, MarginLoss};
use crate::sum::{par_mean, par_mean_vec};

/// Labeled feature rows stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<Label>,
    p: usize,
    names: Vec<String>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let mut features = Vec::with_capacity(rows.len() * p);
        for row in &rows {
            if row.len() != p {
                return Err(Error::DimensionMismatch { expected: p, actual: row.len() });
            }
            features.extend_from_slice(row);
        }
        Self::from_flat(p, features, labels)
    }

    /// `features` holds `labels.len()` rows of length `p`.
    pub fn from_flat(p: usize, features: Vec<f64>, labels: Vec<Label>) -> Result<Self> {
        if features.len() != labels.len() * p {
            return Err(Error::DimensionMismatch { expected: labels.len() * p, actual: features.len() });
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("feature"));
        }
        let names = (1..=p).map(|j| format!("x{j}")).collect();
        Ok(Dataset { features, labels, p, names })
    }

    /// An empty dataset with `p` named features.
    pub fn empty(names: Vec<String>) -> Self {
        Dataset { features: Vec::new(), labels: Vec::new(), p: names.len(), names }
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p {
            return Err(Error::DimensionMismatch { expected: self.p, actual: names.len() });
        }
        self.names = names;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.p..(i + 1) * self.p]
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], Label)> + '_ {
        (0..self.len()).map(move |i| (self.row(i), self.labels[i]))
    }

    /// Fraction of rows labeled `+1`.
    pub fn positive_fraction(&self) -> f64 {
        self.labels.iter().filter(|&&y| y == Label::Positive).count() as f64 / self.len() as f64
    }
}

/// A fixed basis function `b(x; gamma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisFn {
    Constant,
    Feature { index: usize },
    Square { index: usize },
    Product { a: usize, b: usize },
    /// `polarity` where `x[feature] > threshold`, `-polarity` otherwise.
    Stump { feature: usize, threshold: f64, polarity: f64 },
}

impl BasisFn {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            BasisFn::Constant => 1.0,
            BasisFn::Feature { index } => x[index],
            BasisFn::Square { index } => x[index] * x[index],
            BasisFn::Product { a, b } => x[a] * x[b],
            BasisFn::Stump { feature, threshold, polarity } => {
                if x[feature] > threshold {
                    polarity
                } else {
                    -polarity
                }
            }
        }
    }

    fn max_index(&self) -> Option<usize> {
        match *self {
            BasisFn::Constant => None,
            BasisFn::Feature { index } | BasisFn::Square { index } => Some(index),
            BasisFn::Product { a, b } => Some(a.max(b)),
            BasisFn::Stump { feature, .. } => Some(feature),
        }
    }

    fn validate(&self, p: usize) -> Result<()> {
        if let Some(j) = self.max_index() {
            if j >= p {
                return Err(Error::DimensionMismatch { expected: p, actual: j + 1 });
            }
        }
        if let BasisFn::Stump { threshold, polarity, .. } = *self {
            if !threshold.is_finite() {
                return Err(Error::NonFinite("stump threshold"));
            }
            if polarity != 1.0 && polarity != -1.0 {
                return Err(Error::Parameter { name: "polarity", value: polarity, reason: "must be -1 or +1" });
            }
        }
        Ok(())
    }
}

/// The score model `f(x; beta) = sum_m beta_m b_m(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// `f(x) = [beta_0 +] sum_j beta_j x_j`; the intercept, when present,
    /// is the first coefficient.
    Linear { intercept: bool },
    BasisExpansion { basis: Vec<BasisFn> },
}

impl ModelSpec {
    pub const LINEAR: ModelSpec = ModelSpec::Linear { intercept: false };

    pub fn n_params(&self, p: usize) -> usize {
        match self {
            ModelSpec::Linear { intercept } => p + usize::from(*intercept),
            ModelSpec::BasisExpansion { basis } => basis.len(),
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        match self {
            ModelSpec::Linear { .. } => Ok(()),
            ModelSpec::BasisExpansion { basis } => {
                if basis.is_empty() {
                    return Err(Error::InvalidConfig("basis expansion needs at least one basis function".into()));
                }
                basis.iter().try_for_each(|b| b.validate(p))
            }
        }
    }

    /// Writes `df/dbeta` at `x` into `out`.
    pub fn design_row(&self, x: &[f64], out: &mut [f64]) {
        match self {
            ModelSpec::Linear { intercept: true } => {
                out[0] = 1.0;
                out[1..].copy_from_slice(x);
            }
            ModelSpec::Linear { intercept: false } => out.copy_from_slice(x),
            ModelSpec::BasisExpansion { basis } => {
                for (o, b) in out.iter_mut().zip(basis) {
                    *o = b.eval(x);
                }
            }
        }
    }

    pub fn gradient_of_score(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_params(x.len())];
        self.design_row(x, &mut out);
        out
    }

    /// `f(x; beta)`, checking dimensions.
    pub fn score(&self, beta: &[f64], x: &[f64]) -> Result<f64> {
        let d = self.n_params(x.len());
        if beta.len() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: beta.len() });
        }
        self.validate(x.len())?;
        Ok(dot(beta, &self.gradient_of_score(x)))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Optimizer settings for [`fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Convergence threshold on the gradient's infinity norm.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Random restarts run in addition to the zero start for non-convex losses.
    pub restarts: usize,
    pub seed: u64,
    /// `||beta||_inf` above which the fit is declared divergent.
    pub divergence_threshold: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { tolerance: 1e-8, max_iter: 20_000, restarts: 5, seed: 0, divergence_threshold: 1e4 }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Parameter { name: "tolerance", value: self.tolerance, reason: "must be positive" });
        }
        if self.max_iter == 0 {
            return Err(Error::Parameter { name: "max_iter", value: 0.0, reason: "must be at least 1" });
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(Error::Parameter {
                name: "divergence_threshold",
                value: self.divergence_threshold,
                reason: "must be positive",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Converged,
    MaxIterations,
    DivergedSeparable,
    /// No step satisfied the line search before the step size vanished.
    Stalled,
}

impl FitStatus {
    pub fn name(self) -> &'static str {
        match self {
            FitStatus::Converged => "converged",
            FitStatus::MaxIterations => "max_iterations",
            FitStatus::DivergedSeparable => "diverged_separable",
            FitStatus::Stalled => "stalled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub beta: Vec<f64>,
    pub status: FitStatus,
    pub iterations: usize,
    pub final_risk: f64,
    pub gradient_norm: f64,
    /// Number of starting points tried.
    pub starts: usize,
}

/// Precomputed `df/dbeta` rows and signed labels.
struct Design {
    n: usize,
    d: usize,
    z: Vec<f64>,
    y: Vec<f64>,
}

struct Evaluation {
    risk: f64,
    gradient: Vec<f64>,
    /// Every margin is strictly positive.
    separating: bool,
}

impl Design {
    fn new(spec: &ModelSpec, data: &Dataset) -> Result<Self> {
        spec.validate(data.p())?;
        let d = spec.n_params(data.p());
        let mut z = vec![0.0; data.len() * d];
        for (i, row) in z.chunks_mut(d.max(1)).enumerate().take(data.len()) {
            spec.design_row(data.row(i), row);
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("basis value"));
        }
        Ok(Design { n: data.len(), d, z, y: data.labels().iter().map(|l| l.sign()).collect() })
    }

    fn margin(&self, beta: &[f64], i: usize) -> f64 {
        self.y[i] * dot(beta, &self.z[i * self.d..(i + 1) * self.d])
    }

    fn risk(&self, loss: &dyn MarginLoss, beta: &[f64]) -> Result<f64> {
        let r = par_mean(self.n, |i| loss.eval(self.margin(beta, i)))?;
        if r.is_finite() {
            Ok(r)
        } else {
            Err(Error::NonFinite("risk"))
        }
    }

    fn evaluate(&self, loss: &dyn MarginLoss, beta: &[f64]) -> Result<Evaluation> {
        let d = self.d;
        // slot d holds the loss, slot d + 1 counts nonpositive margins
        let sums = par_mean_vec(self.n, d + 2, |i, out| {
            let v = self.margin(beta, i);
            let dphi = loss.derivative(v)?;
            let zi = &self.z[i * d..(i + 1) * d];
            for (o, &zj) in out[..d].iter_mut().zip(zi) {
                *o = dphi * self.y[i] * zj;
            }
            out[d] = loss.eval(v)?;
            out[d + 1] = if v > 0.0 { 0.0 } else { 1.0 };
            Ok::<(), Error>(())
        })?;
        let risk = sums[d];
        if !risk.is_finite() || sums[..d].iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("risk"));
        }
        Ok(Evaluation { risk, gradient: sums[..d].to_vec(), separating: sums[d + 1] == 0.0 })
    }
}

const ARMIJO_C: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const INITIAL_STEP: f64 = 1.0;
const MAX_STEP: f64 = 1e6;
const MAX_HALVINGS: usize = 100;
/// Predicted decreases below this fraction of the risk are at rounding level;
/// there the line search also accepts steps that shrink the gradient.
const ROUNDING_LEVEL: f64 = 1e-10;
const RISK_SLACK: f64 = 1e-14;

fn descend(design: &Design, loss: &dyn MarginLoss, start: Vec<f64>, opts: &FitOptions) -> Result<FitResult> {
    let unbounded_decreasing = loss.is_strictly_decreasing() && loss.domain().1 == f64::INFINITY;
    let mut beta = start;
    let mut eval = design.evaluate(loss, &beta)?;
    let mut step = INITIAL_STEP;
    let mut iterations = 0;
    let finish = |beta: Vec<f64>, eval: &Evaluation, status, iterations| FitResult {
        gradient_norm: inf_norm(&eval.gradient),
        final_risk: eval.risk,
        beta,
        status,
        iterations,
        starts: 1,
    };
    loop {
        if inf_norm(&eval.gradient) <= opts.tolerance {
            return Ok(finish(beta, &eval, FitStatus::Converged, iterations));
        }
        if eval.separating && unbounded_decreasing {
            // beta separates the sample, so the risk decreases strictly
            // along the ray s * beta and no finite minimizer exists
            while inf_norm(&beta) <= opts.divergence_threshold {
                beta.iter_mut().for_each(|b| *b *= 2.0);
            }
            let risk = design.risk(loss, &beta).unwrap_or(eval.risk);
            let eval = Evaluation { risk, ..eval };
            return Ok(finish(beta, &eval, FitStatus::DivergedSeparable, iterations));
        }
        if iterations == opts.max_iter {
            return Ok(finish(beta, &eval, FitStatus::MaxIterations, iterations));
        }
        iterations += 1;

        let g2 = dot(&eval.gradient, &eval.gradient);
        let mut t = (2.0 * step).min(MAX_STEP);
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let candidate: Vec<f64> = beta.iter().zip(&eval.gradient).map(|(b, g)| b - t * g).collect();
            if let Ok(next) = design.evaluate(loss, &candidate) {
                // below rounding level the risk cannot confirm a decrease
                // (the Armijo bound rounds to the current risk); near a
                // minimum a shrinking gradient can
                let accept = if t * g2 > ROUNDING_LEVEL * eval.risk.abs() {
                    next.risk <= eval.risk - ARMIJO_C * t * g2
                } else {
                    next.risk <= eval.risk + RISK_SLACK * eval.risk.abs()
                        && dot(&next.gradient, &next.gradient) <= (1.0 - ARMIJO_C) * g2
                };
                if accept {
                    accepted = Some((candidate, next));
                    break;
                }
            }
            t *= SHRINK;
        }
        let Some((candidate, next)) = accepted else {
            return Ok(finish(beta, &eval, FitStatus::Stalled, iterations));
        };
        step = t;
        beta = candidate;
        eval = next;
        if inf_norm(&beta) > opts.divergence_threshold {
            return Ok(finish(beta, &eval, FitStatus::DivergedSeparable, iterations));
        }
    }
}

/// Minimizes the empirical risk by gradient descent with a backtracking
/// Armijo line search. Non-convex losses are additionally started from
/// `opts.restarts` points drawn uniformly on `[-1, 1]^d`; the lowest-risk
/// run is returned.
pub fn fit(loss: &dyn MarginLoss, spec: &ModelSpec, data: &Dataset, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let design = Design::new(spec, data)?;
    let mut best = descend(&design, loss, vec![0.0; design.d], opts)?;
    let mut starts = 1;
    if !loss.is_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.restarts {
            let start: Vec<f64> = (0..design.d).map(|_| rng.random_range(-1.0..=1.0)).collect();
            starts += 1;
            // a random start may put margins outside a bounded loss domain
            if let Ok(run) = descend(&design, loss, start, opts) {
                if run.final_risk < best.final_risk {
                    best = run;
                }
            }
        }
    }
    best.starts = starts;
    Ok(best)
}

/// Fits with an explicit starting point and no restarts.
pub fn fit_from(loss: &dyn MarginLoss, spec: &ModelSpec, data: &Dataset, start: Vec<f64>, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let design = Design::new(spec, data)?;
    if start.len() != design.d {
        return Err(Error::DimensionMismatch { expected: design.d, actual: start.len() });
    }
    descend(&design, loss, start, opts)
}

fn check_beta(spec: &ModelSpec, beta: &[f64], data: &Dataset) -> Result<Design> {
    let design = Design::new(spec, data)?;
    if beta.len() != design.d {
        return Err(Error::DimensionMismatch { expected: design.d, actual: beta.len() });
    }
    Ok(design)
}

/// `(1/n) sum_i phi(y*_i f(x_i; beta))`.
pub fn empirical_risk(loss: &dyn MarginLoss, spec: &ModelSpec, beta: &[f64], data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_beta(spec, beta, data)?.risk(loss, beta)
}

/// `(1/n) sum_i phi'(y*_i f_i) y*_i df/dbeta(x_i)`.
pub fn risk_gradient(loss: &dyn MarginLoss, spec: &ModelSpec, beta: &[f64], data: &Dataset) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(check_beta(spec, beta, data)?.evaluate(loss, beta)?.gradient)
}

/// Margins `y*_i f(x_i; beta)` in row order.
pub fn margins(spec: &ModelSpec, beta: &[f64], data: &Dataset) -> Result<Vec<f64>> {
    let design = check_beta(spec, beta, data)?;
    Ok((0..design.n).map(|i| design.margin(beta, i)).collect())
}

/// `R_Emp = (1/n) sum_i e^{-y*_i f(x_i; beta)}`, the mean squared
/// standardized logistic residual.
pub fn exp_empirical_risk(spec: &ModelSpec, beta: &[f64], data: &Dataset) -> Result<f64> {
    empirical_risk(&ExponentialMargin::UNIT, spec, beta, data)
}

/// Minimizes `sum_i |S_i|^p = sum_i e^{-y*_i f_i p / 2}`.
pub fn pnorm_fit(spec: &ModelSpec, data: &Dataset, p: f64, opts: &FitOptions) -> Result<FitResult> {
    let loss = pnorm_loss(p)?;
    fit(&loss, spec, data, opts)
}

/// `sum_i |S_i|^p` at `beta`.
pub fn pnorm_objective(spec: &ModelSpec, beta: &[f64], data: &Dataset, p: f64) -> Result<f64> {
    let loss = pnorm_loss(p)?;
    Ok(empirical_risk(&loss, spec, beta, data)? * data.len() as f64)
}

fn pnorm_loss(p: f64) -> Result<ExponentialMargin> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Parameter { name: "p", value: p, reason: "must be positive and finite" });
    }
    ExponentialMargin::new(p / 2.0)
}
