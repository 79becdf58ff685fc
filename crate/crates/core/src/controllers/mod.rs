//! Driving models: the PID autopilot with global track knowledge and the
//! learned regression controller trained by imitating it.
//!
//! Both consume the same [`Observation`]. Sign conventions follow headings:
//! positive cross-track error, relative orientation, curvature and steering
//! all point toward increasing heading (clockwise in the x-right, y-up view).

mod autopilot;
mod dataset;
mod learned;

pub use autopilot::{collect_reference_trace, tune_autopilot, Autopilot, PidGains, TuneReport};
pub use dataset::{Dataset, LabeledSample, Provenance, Split};
pub use learned::{
    fit_model, fit_split, tier_split, train_ladder, LadderConfig, LadderTier, LearnedModel,
    TrainHyper,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsError, SimConfig, VehicleState};
use crate::geometry::Track;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ControllerError {
    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("normal equations are singular")]
    SingularSystem,
    #[error("autopilot left the lane after {0} steps")]
    AutopilotFailed(usize),
    #[error("no well-behaving model for tier {tier} after {attempts} draws")]
    TierGateFailed { tier: usize, attempts: usize },
    #[error("malformed dataset: {0}")]
    Malformed(String),
    #[error(transparent)]
    Simulation(#[from] DynamicsError),
}

/// What a driving model sees at each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub xte_signed: f64,
    pub theta: f64,
    pub v: f64,
    pub lookahead_curvatures: Vec<f64>,
}

/// Lookahead offsets and the scales that bring raw observations to order one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub lookahead_m: Vec<f64>,
    pub xte_scale: f64,
    pub theta_scale: f64,
    pub v_scale: f64,
    pub curvature_scale: f64,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self {
            lookahead_m: vec![2.0, 4.0, 6.0, 8.0, 10.0],
            xte_scale: 2.0,
            theta_scale: 20.0,
            v_scale: 30.0,
            curvature_scale: 0.1,
        }
    }
}

impl FeatureSpec {
    pub fn k(&self) -> usize {
        self.lookahead_m.len()
    }

    /// Number of base (pre-expansion) features.
    pub fn width(&self) -> usize {
        3 + self.k()
    }

    pub fn observe(&self, s: &VehicleState, track: &Track) -> Observation {
        let loc = track.locate(s.position(), s.psi);
        Observation {
            xte_signed: loc.signed_xte,
            theta: loc.theta,
            v: s.v,
            lookahead_curvatures: self
                .lookahead_m
                .iter()
                .map(|&d| track.curvature_ahead(loc.index, d))
                .collect(),
        }
    }

    pub fn normalized(&self, obs: &Observation) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width());
        out.push(obs.xte_signed / self.xte_scale);
        out.push(obs.theta / self.theta_scale);
        out.push(obs.v / self.v_scale);
        out.extend(
            obs.lookahead_curvatures
                .iter()
                .map(|c| c / self.curvature_scale),
        );
        out
    }

    /// Adds Gaussian noise of `sigma` (in normalized units) to every field.
    pub fn perturb<R: Rng + ?Sized>(&self, obs: &mut Observation, sigma: f64, rng: &mut R) {
        let mut noise = || -> f64 {
            let z: f64 = StandardNormal.sample(&mut *rng);
            sigma * z
        };
        obs.xte_signed += noise() * self.xte_scale;
        obs.theta += noise() * self.theta_scale;
        obs.v += noise() * self.v_scale;
        for c in obs.lookahead_curvatures.iter_mut() {
            *c += noise() * self.curvature_scale;
        }
    }
}

/// Observation of state `s` on `track` with the default feature layout.
pub fn extract_features(s: &VehicleState, track: &Track) -> Observation {
    FeatureSpec::default().observe(s, track)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DrivingModel {
    Autopilot(Autopilot),
    Learned(LearnedModel),
}

impl DrivingModel {
    pub fn name(&self) -> String {
        match self {
            DrivingModel::Autopilot(_) => "autopilot".to_string(),
            DrivingModel::Learned(m) => m.name.clone(),
        }
    }

    pub fn feature_spec(&self) -> FeatureSpec {
        match self {
            DrivingModel::Autopilot(_) => FeatureSpec::default(),
            DrivingModel::Learned(m) => m.feature_spec.clone(),
        }
    }

    /// A fresh per-episode controller.
    pub fn pilot(&self, cfg: &SimConfig) -> Pilot<'_> {
        match self {
            DrivingModel::Autopilot(a) => Pilot::Autopilot {
                gains: a.gains,
                integral: 0.0,
                prev_xte: None,
                dt: cfg.dt(),
            },
            DrivingModel::Learned(m) => Pilot::Learned(m),
        }
    }
}

/// Per-episode controller state.
#[derive(Debug)]
pub enum Pilot<'a> {
    Autopilot {
        gains: PidGains,
        integral: f64,
        prev_xte: Option<f64>,
        dt: f64,
    },
    Learned(&'a LearnedModel),
}

impl Pilot<'_> {
    /// Steering command in `[-1, 1]`.
    pub fn steer(&mut self, obs: &Observation) -> Result<f64, String> {
        let raw = match self {
            Pilot::Autopilot {
                gains,
                integral,
                prev_xte,
                dt,
            } => {
                let derivative = prev_xte.map_or(0.0, |p| (obs.xte_signed - p) / *dt);
                *prev_xte = Some(obs.xte_signed);
                *integral = (*integral + obs.xte_signed * *dt)
                    .clamp(-gains.integral_limit, gains.integral_limit);
                gains.command(obs.xte_signed, *integral, derivative, obs.theta)
            }
            Pilot::Learned(m) => m.raw_output(obs),
        };
        if raw.is_finite() {
            Ok(raw.clamp(-1.0, 1.0))
        } else {
            Err(format!("non-finite steering output {raw}"))
        }
    }
}

/// Single-observation inference, optionally with seeded observation noise
/// `(sigma, seed)`. Autopilot calls see a fresh controller (zero integral).
pub fn predict_steer(model: &DrivingModel, obs: &Observation, noise: Option<(f64, u64)>) -> f64 {
    let spec = model.feature_spec();
    let mut obs = obs.clone();
    if let Some((sigma, seed)) = noise {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        spec.perturb(&mut obs, sigma, &mut rng);
    }
    let mut pilot = model.pilot(&SimConfig::default());
    pilot.steer(&obs).unwrap_or(0.0)
}
