use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::boundary_states::{ClosenessBudget, ValidityLimits, DEFAULT_MUTATION_BUDGET};
use crate::controllers::{LadderConfig, PidGains};
use crate::dynamics::{SimConfig, DEFAULT_OBSERVATION_NOISE};
use crate::geometry::TrackMutation;
use crate::search::SearchConfig;

pub const OUT_DIR_ENV: &str = "BOUNDARY_OUT_DIR";
pub const THREADS_ENV: &str = "BOUNDARY_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutopilotConfig {
    pub initial: PidGains,
    /// Coordinate-descent sweeps on the training track; 0 keeps `initial`.
    pub tune_sweeps: usize,
    /// Laps of the reference drive that yields the nominal dataset.
    pub laps: usize,
}

impl Default for AutopilotConfig {
    fn default() -> Self {
        Self {
            initial: PidGains::default(),
            tune_sweeps: 12,
            laps: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrainConfig {
    /// How many of the best tiers (by validation loss) get retrained.
    pub tiers: usize,
    /// Autopilot steps recorded from each non-recoverable state.
    pub boundary_steps: usize,
    /// Share of the boundary samples added to the validation set.
    pub validation_fraction: f64,
}

impl Default for RetrainConfig {
    fn default() -> Self {
        Self {
            tiers: 2,
            boundary_steps: 100,
            validation_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluationConfig {
    /// Generated tracks, used when no evaluation track files are given.
    pub tracks: usize,
    /// Bound on the distance of an evaluation track to the training track.
    pub max_distance: f64,
    /// Harder-track steps are chained until the mean curvature reaches this
    /// multiple of the training track's.
    pub min_curvature_ratio: f64,
    /// Chained steps per track before giving up.
    pub attempts: usize,
    pub mutation: TrackMutation,
    /// Episodes per success-rate measurement.
    pub episodes: usize,
    pub observation_noise: f64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            tracks: 4,
            max_distance: 100.0,
            min_curvature_ratio: 3.5,
            attempts: 2000,
            mutation: TrackMutation {
                sigma_m: 3.0,
                ..TrackMutation::default()
            },
            episodes: 20,
            observation_noise: DEFAULT_OBSERVATION_NOISE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub repetitions: usize,
    pub out_dir: PathBuf,
    /// Worker threads; unset uses the rayon default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Track file to search and train on; unset uses the built-in training track.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub training_track: Option<PathBuf>,
    pub evaluation_tracks: Vec<PathBuf>,
    pub sim: SimConfig,
    pub search: SearchConfig,
    pub closeness: ClosenessBudget,
    pub limits: ValidityLimits,
    pub mutation_budget: usize,
    pub autopilot: AutopilotConfig,
    pub ladder: LadderConfig,
    /// Episodes per state when measuring recoverability.
    pub recoverability_runs: usize,
    pub retrain: RetrainConfig,
    pub evaluation: EvaluationConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            repetitions: 9,
            out_dir: PathBuf::from("out"),
            threads: None,
            training_track: None,
            evaluation_tracks: Vec::new(),
            sim: SimConfig::default(),
            search: SearchConfig {
                restarts: 10,
                ..SearchConfig::default()
            },
            closeness: ClosenessBudget::default(),
            limits: ValidityLimits::default(),
            mutation_budget: DEFAULT_MUTATION_BUDGET,
            autopilot: AutopilotConfig::default(),
            ladder: LadderConfig::default(),
            recoverability_runs: 1,
            retrain: RetrainConfig::default(),
            evaluation: EvaluationConfig::default(),
        }
    }
}

impl RunConfig {
    /// `quickstart` (10 restarts per search) or `full` (40 restarts).
    pub fn profile(name: &str) -> Option<Self> {
        match name {
            "quickstart" => Some(Self::default()),
            "full" => Some(Self {
                search: SearchConfig {
                    restarts: 40,
                    ..SearchConfig::default()
                },
                ..Self::default()
            }),
            _ => None,
        }
    }

    /// Parses a TOML document. An optional top-level `profile` key picks the
    /// base the remaining keys are laid over.
    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        let invalid = |e: &dyn std::fmt::Display| PipelineError::InvalidConfig(e.to_string());
        let mut user: toml::Table = text.parse().map_err(|e| invalid(&e))?;
        let base = match user.remove("profile") {
            None => Self::default(),
            Some(toml::Value::String(name)) => {
                Self::profile(&name).ok_or_else(|| invalid(&format!("unknown profile {name:?}")))?
            }
            Some(_) => return Err(invalid(&"profile must be a string")),
        };
        let mut merged = toml::Table::try_from(&base).map_err(|e| invalid(&e))?;
        overlay(&mut merged, user);
        toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| invalid(&e))
    }

    /// Reads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.into(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &PathBuf| {
            if p.is_relative() {
                dir.join(p)
            } else {
                p.clone()
            }
        };
        cfg.training_track = cfg.training_track.as_ref().map(resolve);
        cfg.evaluation_tracks = cfg.evaluation_tracks.iter().map(resolve).collect();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies the output-directory and thread-count environment overrides.
    pub fn apply_env(&mut self) -> Result<(), PipelineError> {
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                self.out_dir = PathBuf::from(dir);
            }
        }
        if let Ok(n) = std::env::var(THREADS_ENV) {
            let n: usize = n.trim().parse().map_err(|_| {
                PipelineError::InvalidConfig(format!(
                    "{THREADS_ENV} must be a positive integer, got {n:?}"
                ))
            })?;
            self.threads = (n > 0).then_some(n);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: &str| Err(PipelineError::InvalidConfig(m.to_string()));
        if self.repetitions == 0 {
            return fail("repetitions must be at least 1");
        }
        if self.sim.validate().is_err() {
            return fail("invalid simulation settings");
        }
        if !self.search.is_valid() {
            return fail("invalid search settings");
        }
        if !self.closeness.is_valid() {
            return fail("closeness budget must be positive");
        }
        if self.ladder.fractions.is_empty()
            || self
                .ladder
                .fractions
                .iter()
                .any(|f| !(*f > 0.0 && *f <= 1.0))
        {
            return fail("ladder fractions must lie in (0, 1]");
        }
        if self.retrain.tiers > self.ladder.fractions.len() {
            return fail("cannot retrain more tiers than the ladder has");
        }
        if !(0.0..1.0).contains(&self.retrain.validation_fraction) {
            return fail("retrain validation fraction must lie in [0, 1)");
        }
        if self.evaluation.episodes == 0 || self.recoverability_runs == 0 {
            return fail("episode counts must be at least 1");
        }
        for p in self.training_track.iter().chain(&self.evaluation_tracks) {
            if !p.is_file() {
                return fail(&format!("track file {} does not exist", p.display()));
            }
        }
        Ok(())
    }

    /// The configuration as TOML, without the output directory and thread
    /// count, which do not influence results.
    pub fn canonical_toml(&self) -> String {
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        c.threads = None;
        toml::to_string(&c).expect("config serializes")
    }

    /// SHA-256 of [`canonical_toml`](Self::canonical_toml), hex encoded.
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_toml().as_bytes()))
    }
}

fn overlay(base: &mut toml::Table, user: toml::Table) {
    for (key, value) in user {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => overlay(b, u),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_differ_in_restarts() {
        assert_eq!(
            RunConfig::profile("quickstart").unwrap().search.restarts,
            10
        );
        assert_eq!(RunConfig::profile("full").unwrap().search.restarts, 40);
        assert!(RunConfig::profile("other").is_none());
    }

    #[test]
    fn toml_overlays_the_profile() {
        let cfg =
            RunConfig::from_toml_str("profile = \"full\"\nseed = 7\n[search]\niterations = 12\n")
                .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.search.restarts, 40);
        assert_eq!(cfg.search.iterations, 12);
        assert_eq!(cfg.repetitions, 9);
        assert!(RunConfig::from_toml_str("profile = \"nope\"").is_err());
        assert!(RunConfig::from_toml_str("seed = \"x\"").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::default();
        assert_eq!(
            RunConfig::from_toml_str(&toml::to_string(&cfg).unwrap()).unwrap(),
            cfg
        );
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = RunConfig::default();
        let b = RunConfig {
            out_dir: "elsewhere".into(),
            threads: Some(3),
            ..a.clone()
        };
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), RunConfig { seed: 2, ..a }.config_hash());
    }
}
