//! Radius, recoverability, success rate and the statistics used to compare runs.

mod stats;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use stats::{
    mann_kendall_s, mann_whitney_u, mean, midranks, vargha_delaney_a12, MannKendall, MannWhitney,
    StatsError, Trend, EXACT_CUTOFF,
};

use crate::boundary_states::ValidityLimits;
use crate::controllers::DrivingModel;
use crate::derive_seed;
use crate::dynamics::{run_episode, SimConfig, VehicleState};
use crate::geometry::Track;
use crate::search::ArchiveEntry;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("no likely boundary pairs to measure")]
    EmptyArchive,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub radii: Vec<f64>,
    pub mean: f64,
    pub count: usize,
}

/// Normalized distance of a state's (xte, speed, |theta|) from the origin of
/// the unit cube, scaled so the far corner is 1.
pub fn state_radius(state: &VehicleState, track: &Track, limits: &ValidityLimits) -> f64 {
    let loc = track.locate(state.position(), state.psi);
    let q = [
        (loc.signed_xte.abs() / track.half_width()).min(1.0),
        (state.v / limits.v_max).clamp(0.0, 1.0),
        (loc.theta.abs() / limits.theta_max).min(1.0),
    ];
    (q.iter().map(|c| c * c).sum::<f64>() / 3.0).sqrt()
}

/// Radius of the non-recoverable state of every likely pair.
pub fn radius(
    entries: &[ArchiveEntry],
    track: &Track,
    limits: &ValidityLimits,
) -> Result<RadiusReport, MetricsError> {
    let radii: Vec<f64> = entries
        .iter()
        .filter(|e| e.is_likely())
        .map(|e| state_radius(&e.failing_state(), track, limits))
        .collect();
    if radii.is_empty() {
        return Err(MetricsError::EmptyArchive);
    }
    Ok(RadiusReport {
        mean: mean(&radii),
        count: radii.len(),
        radii,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateClass {
    Recoverable,
    NonRecoverable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverabilityReport {
    pub model_a: String,
    pub model_b: String,
    /// Mean success percentage on B's recoverable states; `None` without states.
    pub recoverable: Option<f64>,
    pub non_recoverable: Option<f64>,
    pub states: usize,
    pub runs: usize,
}

impl RecoverabilityReport {
    pub fn class(&self, class: StateClass) -> Option<f64> {
        match class {
            StateClass::Recoverable => self.recoverable,
            StateClass::NonRecoverable => self.non_recoverable,
        }
    }

    /// Mean over the classes that have states.
    pub fn overall(&self) -> Option<f64> {
        let present: Vec<f64> = [self.recoverable, self.non_recoverable]
            .into_iter()
            .flatten()
            .collect();
        (!present.is_empty()).then(|| mean(&present))
    }
}

/// Percentage of `runs` episodes of `t_min_steps` from `state` that stay in lane.
pub fn state_success_percentage(
    model: &DrivingModel,
    state: &VehicleState,
    track: &Track,
    cfg: &SimConfig,
    runs: usize,
    seed: u64,
) -> f64 {
    let runs = runs.max(1);
    let ok = (0..runs)
        .filter(|&r| {
            run_episode(
                model,
                track,
                *state,
                cfg.t_min_steps,
                cfg,
                derive_seed(seed, r as u64),
            )
            .map(|e| e.success)
            .unwrap_or(false)
        })
        .count();
    100.0 * ok as f64 / runs as f64
}

/// How well `model_a` copes with the likely boundary states found for model B,
/// per state class.
pub fn recoverability(
    model_a: &DrivingModel,
    model_b_name: &str,
    entries_of_b: &[ArchiveEntry],
    track: &Track,
    cfg: &SimConfig,
    runs: usize,
    seed: u64,
) -> RecoverabilityReport {
    let likely: Vec<&ArchiveEntry> = entries_of_b.iter().filter(|e| e.is_likely()).collect();
    let score = |states: Vec<VehicleState>, stream: u64| -> Option<f64> {
        let values: Vec<f64> = states
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                state_success_percentage(
                    model_a,
                    s,
                    track,
                    cfg,
                    runs,
                    derive_seed(seed, stream * 1_000_003 + i as u64),
                )
            })
            .collect();
        (!values.is_empty()).then(|| mean(&values))
    };
    RecoverabilityReport {
        model_a: model_a.name(),
        model_b: model_b_name.to_string(),
        recoverable: score(likely.iter().map(|e| e.recoverable_state()).collect(), 0),
        non_recoverable: score(likely.iter().map(|e| e.failing_state()).collect(), 1),
        states: likely.len(),
        runs: runs.max(1),
    }
}

/// Percentage of `n` nominal-start episodes that complete `cfg.eval_steps`
/// in lane; each episode gets its own noise seed.
pub fn success_rate(
    model: &DrivingModel,
    track: &Track,
    n: usize,
    cfg: &SimConfig,
    seed: u64,
) -> f64 {
    let n = n.max(1);
    let ok = (0..n)
        .into_par_iter()
        .filter(|&i| {
            run_episode(
                model,
                track,
                VehicleState::nominal(track),
                cfg.eval_steps,
                cfg,
                derive_seed(seed, i as u64),
            )
            .map(|e| e.success)
            .unwrap_or(false)
        })
        .count();
    100.0 * ok as f64 / n as f64
}

/// Writes recoverability reports as a long-format CSV table.
pub fn write_recoverability_csv<W: Write>(
    reports: &[RecoverabilityReport],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "model_a,model_b,class,percentage,states,runs")?;
    for r in reports {
        for (class, value) in [
            ("recoverable", r.recoverable),
            ("non_recoverable", r.non_recoverable),
        ] {
            let value = value.map_or(String::new(), |v| format!("{v:.4}"));
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.model_a, r.model_b, class, value, r.states, r.runs
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_states::StatePair;
    use crate::controllers::{Autopilot, FeatureSpec, LearnedModel};
    use crate::geometry::{training_track, Vec2};
    use crate::search::{DiscoveredBy, Recoverable};

    /// A straight stretch of the training track: waypoint heading 0 at x = 0.
    fn straight_state(track: &Track, xte: f64, v: f64, theta: f64) -> VehicleState {
        let s = VehicleState::new(Vec2::new(xte, 10.0), theta, v);
        assert!((track.locate(s.position(), s.psi).signed_xte - xte).abs() < 1e-9);
        s
    }

    fn entry(failing: VehicleState) -> ArchiveEntry {
        ArchiveEntry {
            pair: StatePair {
                s1: failing,
                s2: failing,
            },
            recoverable: Recoverable::S2,
            discovered_by: DiscoveredBy::Genbo,
            restart: 0,
            replication_percentage: 100.0,
        }
    }

    #[test]
    fn radius_examples() {
        let t = training_track();
        let l = ValidityLimits::default();
        let w = t.half_width();
        assert_eq!(
            state_radius(&straight_state(&t, w, 30.0, 20.0), &t, &l),
            1.0
        );
        assert_eq!(
            state_radius(&straight_state(&t, 0.0, 0.0, 0.0), &t, &l),
            0.0
        );
        let r = state_radius(&straight_state(&t, w, 0.0, 0.0), &t, &l);
        assert!((r - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let rep = radius(
            &[
                entry(straight_state(&t, w, 30.0, 20.0)),
                entry(straight_state(&t, 0.0, 0.0, 0.0)),
            ],
            &t,
            &l,
        )
        .unwrap();
        assert_eq!(rep.mean, 0.5);
        assert_eq!(radius(&[], &t, &l), Err(MetricsError::EmptyArchive));
    }

    #[test]
    fn deterministic_success_rate_is_all_or_nothing() {
        let t = training_track();
        let cfg = SimConfig::default();
        let ap = DrivingModel::Autopilot(Autopilot::default());
        assert_eq!(success_rate(&ap, &t, 5, &cfg, 1), 100.0);
        let zero = DrivingModel::Learned(LearnedModel::zero(FeatureSpec::default()));
        assert_eq!(success_rate(&zero, &t, 5, &cfg, 1), 0.0);
    }

    #[test]
    fn own_states_replay_in_deterministic_mode() {
        let t = training_track();
        let cfg = SimConfig::default();
        let ap = DrivingModel::Autopilot(Autopilot::default());
        let good = straight_state(&t, 0.0, 20.0, 0.0);
        let bad = straight_state(&t, 1.9, 30.0, 20.0);
        let e = ArchiveEntry {
            pair: StatePair { s1: good, s2: bad },
            recoverable: Recoverable::S1,
            ..entry(bad)
        };
        let rep = recoverability(&ap, "ap", &[e], &t, &cfg, 3, 0);
        assert_eq!(rep.recoverable, Some(100.0));
        assert_eq!(rep.non_recoverable, Some(0.0));
    }
}
