//! AdaBoost with decision stumps as forward stagewise minimization of the
//! exponential loss `sum_i e^{-y*_i f(x_i)}`.
//!
//! The stage-`m` observation weights `e^{-y*_i f_{m-1}(x_i)}` are products of
//! the squared standardized logistic residuals of the earlier stages,
//! `prod_{k<m} S^2(theta_k G_k(x_i))`. Training keeps them in log space.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{exp_empirical_risk, BasisFn, Dataset, ModelSpec};
use crate::label::{Classification, Label};
use crate::residuals::slrr;
use crate::sum::sum;

/// Smallest weighted error used in `theta = 0.5 ln((1 - err) / err)`.
pub const ERROR_FLOOR: f64 = 1e-10;

/// Predicts `polarity` where `x[feature] > threshold`, `-polarity` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: f64,
}

impl Stump {
    pub fn eval(&self, x: &[f64]) -> f64 {
        if x[self.feature] > self.threshold {
            self.polarity
        } else {
            -self.polarity
        }
    }

    pub fn as_basis(&self) -> BasisFn {
        BasisFn::Stump { feature: self.feature, threshold: self.threshold, polarity: self.polarity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub theta: f64,
    pub stump: Stump,
    /// Weighted 0-1 error of the stump under the stage weights.
    pub weighted_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoostStatus {
    Completed,
    /// `R_Emp` reached the requested stopping level.
    EarlyStopped,
    /// No stump had weighted error below one half.
    NoImprovingStump,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostOptions {
    /// Stop once the training `R_Emp` is at or below this level.
    pub r_emp_stop: Option<f64>,
    /// Recorded with the model; stump search is deterministic and draws no
    /// random numbers.
    pub seed: u64,
    /// Keep the unnormalized log weights used at every stage.
    pub record_weights: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub stages: Vec<Stage>,
    /// Training `R_Emp` after `m` stages, for `m = 0..=stages.len()`.
    pub staged_r_emp: Vec<f64>,
    pub status: BoostStatus,
    /// `ln w_i` at stage `m` (before fitting stump `m`), when recorded.
    #[serde(skip)]
    pub ln_weights: Option<Vec<Vec<f64>>>,
}

impl BoostModel {
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// The first `m` stages as a basis-expansion model with coefficients.
    pub fn truncated(&self, m: usize) -> (ModelSpec, Vec<f64>) {
        let stages = &self.stages[..m.min(self.stages.len())];
        let basis = stages.iter().map(|s| s.stump.as_basis()).collect();
        (ModelSpec::BasisExpansion { basis }, stages.iter().map(|s| s.theta).collect())
    }

    pub fn as_model(&self) -> (ModelSpec, Vec<f64>) {
        self.truncated(self.stages.len())
    }
}

/// `(theta_k, G_k(x))` for every stage, the additive components of `f(x)`.
pub fn components(model: &BoostModel, x: &[f64]) -> Vec<(f64, f64)> {
    model.stages.iter().map(|s| (s.theta, s.stump.eval(x))).collect()
}

/// `f(x) = sum_m theta_m G_m(x)`.
pub fn boost_predict(model: &BoostModel, x: &[f64]) -> Result<f64> {
    if model.is_empty() {
        return Err(Error::EmptyModel);
    }
    Ok(model.stages.iter().map(|s| s.theta * s.stump.eval(x)).sum())
}

pub fn boost_classify(model: &BoostModel, x: &[f64]) -> Result<Classification> {
    Ok(Classification::from_score(boost_predict(model, x)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    error: f64,
    stump: Stump,
}

/// Best stump on one feature: thresholds at midpoints of sorted unique
/// values, ascending, polarity `+1` before `-1`; ties keep the first.
fn best_on_feature(data: &Dataset, weights: &[f64], feature: usize) -> Option<Candidate> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| data.row(a)[feature].total_cmp(&data.row(b)[feature]));
    let (mut pos_total, mut neg_total) = (0.0, 0.0);
    for (i, w) in weights.iter().enumerate() {
        match data.label(i) {
            Label::Positive => pos_total += w,
            Label::Negative => neg_total += w,
        }
    }
    let (mut pos_left, mut neg_left) = (0.0, 0.0);
    let mut best: Option<Candidate> = None;
    for k in 0..order.len() {
        let i = order[k];
        match data.label(i) {
            Label::Positive => pos_left += weights[i],
            Label::Negative => neg_left += weights[i],
        }
        let Some(&next) = order.get(k + 1) else { break };
        let (lo, hi) = (data.row(i)[feature], data.row(next)[feature]);
        if lo == hi {
            continue;
        }
        let threshold = lo + (hi - lo) / 2.0;
        // polarity +1 predicts -1 on the left
        for (polarity, error) in [(1.0, pos_left + (neg_total - neg_left)), (-1.0, neg_left + (pos_total - pos_left))] {
            if best.is_none_or(|b| error < b.error) {
                best = Some(Candidate { error, stump: Stump { feature, threshold, polarity } });
            }
        }
    }
    best
}

fn best_stump(data: &Dataset, weights: &[f64]) -> Option<Candidate> {
    let per_feature: Vec<Option<Candidate>> =
        (0..data.p()).into_par_iter().map(|j| best_on_feature(data, weights, j)).collect();
    per_feature.into_iter().flatten().fold(None, |best, c| match best {
        Some(b) if b.error <= c.error => Some(b),
        _ => Some(c),
    })
}

pub fn train_adaboost(data: &Dataset, n_stages: usize, opts: &BoostOptions) -> Result<BoostModel> {
    if n_stages == 0 {
        return Err(Error::Parameter { name: "n_stages", value: 0.0, reason: "must be at least 1" });
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let positives = data.labels().iter().filter(|&&y| y == Label::Positive).count();
    if data.len() < 2 || positives == 0 || positives == data.len() {
        return Err(Error::InvalidConfig("boosting needs at least two rows with both labels".into()));
    }
    if let Some(stop) = opts.r_emp_stop {
        if !stop.is_finite() {
            return Err(Error::Parameter { name: "r_emp_stop", value: stop, reason: "must be finite" });
        }
    }

    let n = data.len();
    let y: Vec<f64> = data.labels().iter().map(|l| l.sign()).collect();
    // ln w_i = -y*_i f_{m-1}(x_i)
    let mut ln_w = vec![0.0; n];
    let mut history = opts.record_weights.then(Vec::new);
    let mut stages = Vec::new();
    let mut staged_r_emp = vec![1.0];
    let mut status = BoostStatus::Completed;

    for _ in 0..n_stages {
        if let Some(h) = history.as_mut() {
            h.push(ln_w.clone());
        }
        let top = ln_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let shifted: Vec<f64> = ln_w.iter().map(|l| (l - top).exp()).collect();
        let total = sum(shifted.iter().copied());
        let weights: Vec<f64> = shifted.iter().map(|w| w / total).collect();

        let Some(best) = best_stump(data, &weights).filter(|c| c.error < 0.5) else {
            status = BoostStatus::NoImprovingStump;
            if let Some(h) = history.as_mut() {
                h.pop();
            }
            break;
        };
        let err = best.error.max(ERROR_FLOOR);
        let theta = 0.5 * ((1.0 - err) / err).ln();
        for i in 0..n {
            ln_w[i] -= y[i] * theta * best.stump.eval(data.row(i));
        }
        stages.push(Stage { theta, stump: best.stump, weighted_error: best.error });
        let r_emp = sum(ln_w.iter().map(|l| l.exp())) / n as f64;
        staged_r_emp.push(r_emp);
        if opts.r_emp_stop.is_some_and(|stop| r_emp <= stop) {
            status = BoostStatus::EarlyStopped;
            break;
        }
    }
    Ok(BoostModel { stages, staged_r_emp, status, ln_weights: history })
}

/// `prod_{k<m} S^2(theta_k G_k(x_i))` for every row, recomputed from the
/// fitted stages through the residual partition.
pub fn residual_product_weights(model: &BoostModel, data: &Dataset, m: usize) -> Result<Vec<f64>> {
    let stages = &model.stages[..m.min(model.len())];
    data.rows()
        .map(|(x, y)| {
            stages.iter().try_fold(1.0, |acc, s| Ok(acc * slrr(y, s.theta * s.stump.eval(x))?.s_squared()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageDiagnostic {
    pub stage: usize,
    /// `(1/n) sum_i prod_{k<=m} S^2(theta_k G_k(x_i))`.
    pub train_risk: f64,
    /// `R_Emp` of the model truncated to `stage` stages.
    pub r_emp: f64,
    pub misclassification: f64,
}

pub fn staged_diagnostics(model: &BoostModel, data: &Dataset) -> Result<Vec<StageDiagnostic>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = data.len() as f64;
    let mut scores = vec![0.0; data.len()];
    let mut out = Vec::with_capacity(model.len() + 1);
    for stage in 0..=model.len() {
        if stage > 0 {
            let s = &model.stages[stage - 1];
            for (i, f) in scores.iter_mut().enumerate() {
                *f += s.theta * s.stump.eval(data.row(i));
            }
        }
        let r_emp = if stage == 0 {
            sum(data.rows().map(|_| 0f64.exp())) / n
        } else {
            let (spec, theta) = model.truncated(stage);
            exp_empirical_risk(&spec, &theta, data)?
        };
        let train_risk = sum(residual_product_weights(model, data, stage)?) / n;
        let wrong = data
            .labels()
            .iter()
            .zip(&scores)
            .filter(|(y, f)| Classification::from_score(**f).label != **y)
            .count();
        out.push(StageDiagnostic { stage, train_risk, r_emp, misclassification: wrong as f64 / n });
    }
    Ok(out)
}
