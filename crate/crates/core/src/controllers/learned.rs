use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ControllerError, Dataset, DrivingModel, FeatureSpec, Observation, Split};
use crate::derive_seed;
use crate::dynamics::{drive_nominal, SimConfig};
use crate::geometry::Track;

/// Minimum number of samples `fit_model` accepts.
pub const MIN_SAMPLES: usize = 50;

/// Ridge regression on the degree-2 polynomial expansion of the
/// normalized observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedModel {
    #[serde(default = "default_name")]
    pub name: String,
    pub feature_spec: FeatureSpec,
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub seed: u64,
    pub validation_loss: f64,
}

fn default_name() -> String {
    "learned".to_string()
}

impl LearnedModel {
    /// Model with all weights zero: always steers straight.
    pub fn zero(feature_spec: FeatureSpec) -> Self {
        let weights = vec![0.0; expanded_width(feature_spec.width())];
        Self {
            name: default_name(),
            feature_spec,
            weights,
            lambda: 0.0,
            seed: 0,
            validation_loss: 0.0,
        }
    }

    /// Unclamped regression output.
    pub fn raw_output(&self, obs: &Observation) -> f64 {
        let x = expand(&self.feature_spec.normalized(obs));
        if x.len() != self.weights.len() {
            return f64::NAN;
        }
        x.iter().zip(&self.weights).map(|(a, b)| a * b).sum()
    }

    pub fn predict(&self, obs: &Observation) -> f64 {
        self.raw_output(obs).clamp(-1.0, 1.0)
    }

    /// Mean squared error of clamped predictions.
    pub fn mse(&self, data: &Dataset) -> f64 {
        if data.is_empty() {
            return f64::NAN;
        }
        let sum: f64 = data
            .samples
            .iter()
            .map(|s| (self.predict(&s.observation) - s.steering_label).powi(2))
            .sum();
        sum / data.len() as f64
    }

    pub fn into_model(self) -> DrivingModel {
        DrivingModel::Learned(self)
    }
}

/// Width of `[1, z_i, z_i*z_j (i <= j)]` for `n` base features.
pub fn expanded_width(n: usize) -> usize {
    1 + n + n * (n + 1) / 2
}

pub fn expand(z: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(expanded_width(z.len()));
    out.push(1.0);
    out.extend_from_slice(z);
    for i in 0..z.len() {
        for j in i..z.len() {
            out.push(z[i] * z[j]);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainHyper {
    /// Ridge penalty on every weight but the intercept. The loss is the
    /// plain sum of squares, so the penalty weighs more on smaller datasets.
    pub lambda: f64,
    pub train_fraction: f64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        Self {
            lambda: 20.0,
            train_fraction: 0.8,
        }
    }
}

/// Solves the ridge normal equations `(X'X + lambda*D) w = X'y`.
pub fn ridge_weights(
    data: &Dataset,
    spec: &FeatureSpec,
    lambda: f64,
) -> Result<Vec<f64>, ControllerError> {
    let p = expanded_width(spec.width());
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    for s in &data.samples {
        let x = DVector::from_vec(expand(&spec.normalized(&s.observation)));
        gram.ger(1.0, &x, &x, 1.0);
        rhs.axpy(s.steering_label, &x, 1.0);
    }
    for i in 1..p {
        gram[(i, i)] += lambda;
    }
    let chol = gram.cholesky().ok_or(ControllerError::SingularSystem)?;
    let w = chol.solve(&rhs);
    if w.iter().all(|v| v.is_finite()) {
        Ok(w.iter().copied().collect())
    } else {
        Err(ControllerError::SingularSystem)
    }
}

/// Fits on `split.train`, recording the loss on `split.validation`.
pub fn fit_split(
    split: &Split,
    hp: &TrainHyper,
    seed: u64,
) -> Result<LearnedModel, ControllerError> {
    if split.train.len() < MIN_SAMPLES {
        return Err(ControllerError::InsufficientData {
            needed: MIN_SAMPLES,
            got: split.train.len(),
        });
    }
    let feature_spec = FeatureSpec::default();
    let weights = ridge_weights(&split.train, &feature_spec, hp.lambda)?;
    let mut model = LearnedModel {
        name: default_name(),
        feature_spec,
        weights,
        lambda: hp.lambda,
        seed,
        validation_loss: 0.0,
    };
    model.validation_loss = model.mse(&split.validation);
    Ok(model)
}

/// Seeded train/validation split followed by [`fit_split`].
pub fn fit_model(
    data: &Dataset,
    hp: &TrainHyper,
    seed: u64,
) -> Result<LearnedModel, ControllerError> {
    if data.len() < MIN_SAMPLES {
        return Err(ControllerError::InsufficientData {
            needed: MIN_SAMPLES,
            got: data.len(),
        });
    }
    fit_split(&data.split(hp.train_fraction, seed), hp, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LadderConfig {
    /// Nested fractions of the training part, weakest tier first.
    pub fractions: Vec<f64>,
    pub hyper: TrainHyper,
    /// Redraws per tier before giving up on the nominal-drive gate.
    pub max_draws: usize,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            fractions: vec![0.1, 0.3, 0.6, 1.0],
            hyper: TrainHyper::default(),
            max_draws: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderTier {
    pub tier: usize,
    pub fraction: f64,
    pub train_samples: usize,
    /// Draw index that passed the gate; 0 when the first draw did.
    pub draw: usize,
    pub model: LearnedModel,
}

fn draw_split(base: &Split, fraction: f64, seed: u64, draw: usize) -> Split {
    let shuffled = base.train.split(1.0, derive_seed(seed, draw as u64)).train;
    Split {
        train: shuffled.prefix(fraction),
        validation: base.validation.clone(),
    }
}

/// The training and validation parts a ladder tier was fitted and scored on.
pub fn tier_split(data: &Dataset, cfg: &LadderConfig, seed: u64, tier: &LadderTier) -> Split {
    draw_split(
        &data.split(cfg.hyper.train_fraction, seed),
        tier.fraction,
        seed,
        tier.draw,
    )
}

/// Trains one model per fraction on nested subsets of a single shuffled
/// training part, all scored on the same validation part. A tier whose
/// model fails the nominal drive is redrawn with a reshuffled subset.
pub fn train_ladder(
    data: &Dataset,
    track: &Track,
    sim: &SimConfig,
    cfg: &LadderConfig,
    seed: u64,
) -> Result<Vec<LadderTier>, ControllerError> {
    let base = data.split(cfg.hyper.train_fraction, seed);
    let mut tiers = Vec::with_capacity(cfg.fractions.len());
    for (t, &fraction) in cfg.fractions.iter().enumerate() {
        let tier = t + 1;
        let mut accepted = None;
        for draw in 0..cfg.max_draws.max(1) {
            let split = draw_split(&base, fraction, seed, draw);
            let mut model = fit_split(&split, &cfg.hyper, derive_seed(seed, draw as u64))?;
            model.name = format!("M{tier}");
            let drive = drive_nominal(
                &DrivingModel::Learned(model.clone()),
                track,
                &sim.deterministic(),
            )?;
            if drive.success {
                accepted = Some(LadderTier {
                    tier,
                    fraction,
                    train_samples: split.train.len(),
                    draw,
                    model,
                });
                break;
            }
        }
        tiers.push(accepted.ok_or(ControllerError::TierGateFailed {
            tier,
            attempts: cfg.max_draws.max(1),
        })?);
    }
    Ok(tiers)
}
