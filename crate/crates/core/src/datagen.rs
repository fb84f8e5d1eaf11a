//! Seeded synthetic binary-outcome data: `y* = +1` with probability
//! `G(x^T beta0)`, optionally contaminated after labeling.
//!
//! Draws use ChaCha8 seeded from `seed`, with three independent streams:
//! stream 0 for features, stream 1 for labels, stream 2 for contamination.
//! Every row consumes a fixed number of draws from each stream, so changing
//! one law never shifts the others.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::distributions::SymmetricCdf;
use crate::error::{Error, Result};
use crate::estimator::Dataset;
use crate::label::Label;

pub const FEATURE_STREAM: u64 = 0;
pub const LABEL_STREAM: u64 = 1;
pub const CONTAMINATION_STREAM: u64 = 2;

/// Cluster centers of the two-cluster law sit at `±TWO_CLUSTER_MU`.
pub const TWO_CLUSTER_MU: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureLaw {
    StandardGaussian,
    UniformPm1,
    /// Equal mixture: each row picks a sign `s` and draws every feature
    /// from `N(s * mu, 1)`.
    TwoCluster,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Contamination {
    pub label_flip_rate: f64,
    pub leverage_rate: f64,
    /// Features of a leverage row are multiplied by this factor.
    pub leverage_scale: f64,
}

impl Default for Contamination {
    fn default() -> Self {
        Contamination { label_flip_rate: 0.0, leverage_rate: 0.0, leverage_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub n: usize,
    pub beta0: Vec<f64>,
    pub feature_law: FeatureLaw,
    #[serde(default = "default_link")]
    pub link: SymmetricCdf,
    #[serde(default)]
    pub contamination: Option<Contamination>,
    #[serde(default)]
    pub seed: u64,
}

fn default_link() -> SymmetricCdf {
    SymmetricCdf::Logistic
}

impl GenConfig {
    pub fn new(n: usize, beta0: Vec<f64>, feature_law: FeatureLaw, seed: u64) -> Self {
        GenConfig { n, beta0, feature_law, link: SymmetricCdf::Logistic, contamination: None, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.beta0.is_empty() {
            return Err(Error::InvalidConfig("beta0 must have at least one coefficient".into()));
        }
        if self.beta0.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidConfig("beta0 must be finite".into()));
        }
        if let Some(c) = &self.contamination {
            for (name, rate) in [("label_flip_rate", c.label_flip_rate), ("leverage_rate", c.leverage_rate)] {
                if !(0.0..=1.0).contains(&rate) {
                    return Err(Error::InvalidConfig(format!("{name} = {rate} is not in [0, 1]")));
                }
            }
            if !c.leverage_scale.is_finite() {
                return Err(Error::InvalidConfig("leverage_scale must be finite".into()));
            }
        }
        Ok(())
    }
}

/// What contamination did to a generated sample.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenReport {
    pub flipped: Vec<usize>,
    pub leveraged: Vec<usize>,
}

/// `Pr(y* = 1 | f)`; bounded links saturate at 0 and 1 outside their support.
pub fn link_probability(link: SymmetricCdf, f: f64) -> f64 {
    let (lo, hi) = link.support();
    if f <= lo {
        0.0
    } else if f >= hi {
        1.0
    } else {
        link.cdf(f).expect("interior point")
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn generate(cfg: &GenConfig) -> Result<Dataset> {
    Ok(generate_with_report(cfg)?.0)
}

pub fn generate_with_report(cfg: &GenConfig) -> Result<(Dataset, GenReport)> {
    cfg.validate()?;
    let p = cfg.beta0.len();
    let mut features_rng = stream(cfg.seed, FEATURE_STREAM);
    let mut label_rng = stream(cfg.seed, LABEL_STREAM);
    let mut contamination_rng = stream(cfg.seed, CONTAMINATION_STREAM);

    let mut features = Vec::with_capacity(cfg.n * p);
    let mut labels = Vec::with_capacity(cfg.n);
    let mut report = GenReport::default();
    for i in 0..cfg.n {
        let start = features.len();
        match cfg.feature_law {
            FeatureLaw::StandardGaussian => {
                features.extend((0..p).map(|_| features_rng.sample::<f64, _>(StandardNormal)));
            }
            FeatureLaw::UniformPm1 => {
                features.extend((0..p).map(|_| features_rng.random_range(-1.0..1.0)));
            }
            FeatureLaw::TwoCluster => {
                let center = if features_rng.random_bool(0.5) { TWO_CLUSTER_MU } else { -TWO_CLUSTER_MU };
                features.extend((0..p).map(|_| center + features_rng.sample::<f64, _>(StandardNormal)));
            }
        }
        let row = &mut features[start..];
        let f: f64 = row.iter().zip(&cfg.beta0).map(|(x, b)| x * b).sum();
        let u: f64 = label_rng.random();
        let mut label = if u < link_probability(cfg.link, f) { Label::Positive } else { Label::Negative };

        if let Some(c) = &cfg.contamination {
            let flip: f64 = contamination_rng.random();
            let lever: f64 = contamination_rng.random();
            if flip < c.label_flip_rate {
                label = label.flipped();
                report.flipped.push(i);
            }
            if lever < c.leverage_rate {
                row.iter_mut().for_each(|x| *x *= c.leverage_scale);
                report.leveraged.push(i);
            }
        }
        labels.push(label);
    }
    Ok((Dataset::from_flat(p, features, labels)?, report))
}
