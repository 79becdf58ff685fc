use serde::{Deserialize, Serialize};

use super::{ControllerError, Dataset, DrivingModel, FeatureSpec, LabeledSample, Provenance};
use crate::dynamics::{run_episode, EpisodeResult, SimConfig, VehicleState};
use crate::geometry::Track;

/// Gains of the autopilot control law
/// `-(kp*xte + ki*∫xte + kd*d(xte)/dt + kh*theta/180)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub kh: f64,
    /// Anti-windup bound on the integral of cross-track error (m·s).
    pub integral_limit: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp: 0.8,
            ki: 0.3,
            kd: 0.4,
            kh: 6.0,
            integral_limit: 3.0,
        }
    }
}

impl PidGains {
    pub fn command(&self, xte: f64, integral: f64, derivative: f64, theta_deg: f64) -> f64 {
        -(self.kp * xte + self.ki * integral + self.kd * derivative + self.kh * theta_deg / 180.0)
    }

    fn get(&self, i: usize) -> f64 {
        [self.kp, self.ki, self.kd, self.kh][i]
    }

    fn set(&mut self, i: usize, value: f64) {
        match i {
            0 => self.kp = value,
            1 => self.ki = value,
            2 => self.kd = value,
            _ => self.kh = value,
        }
    }
}

/// Expert pilot with global knowledge of the track.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Autopilot {
    pub gains: PidGains,
}

impl From<PidGains> for Autopilot {
    fn from(gains: PidGains) -> Self {
        Self { gains }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneReport {
    pub gains: PidGains,
    pub mean_abs_xte: f64,
    pub evaluations: usize,
}

fn nominal_cost(gains: PidGains, track: &Track, cfg: &SimConfig) -> f64 {
    let model = DrivingModel::Autopilot(Autopilot { gains });
    let cfg = cfg.deterministic();
    match run_episode(
        &model,
        track,
        VehicleState::nominal(track),
        cfg.nominal_steps,
        &cfg,
        0,
    ) {
        Ok(r) if r.success => r.mean_abs_xte(),
        // failing gains rank behind every succeeding set, earlier failures worst
        Ok(r) => 10.0 + (cfg.nominal_steps - r.steps_in_lane) as f64,
        Err(_) => f64::INFINITY,
    }
}

/// Coordinate descent on the four gains minimizing mean |xte| over a
/// nominal drive. Step sizes start at half of each initial gain and halve
/// whenever a sweep brings no improvement.
pub fn tune_autopilot(
    track: &Track,
    cfg: &SimConfig,
    initial: PidGains,
    sweeps: usize,
) -> TuneReport {
    let mut best = initial;
    let mut best_cost = nominal_cost(best, track, cfg);
    let mut evaluations = 1;
    let mut steps: Vec<f64> = (0..4).map(|i| (best.get(i) * 0.5).max(0.05)).collect();

    for _ in 0..sweeps {
        let mut improved = false;
        for i in 0..4 {
            for dir in [1.0, -1.0] {
                let mut trial = best;
                let value = (best.get(i) + dir * steps[i]).max(0.0);
                trial.set(i, value);
                let cost = nominal_cost(trial, track, cfg);
                evaluations += 1;
                if cost < best_cost {
                    best = trial;
                    best_cost = cost;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            steps.iter_mut().for_each(|s| *s *= 0.5);
        }
    }
    TuneReport {
        gains: best,
        mean_abs_xte: best_cost,
        evaluations,
    }
}

/// Drives `laps` laps from the nominal start with the autopilot, returning
/// the visited states and the observation/steering samples.
///
/// A lap is the track length; the drive stops once that much distance has
/// been covered.
pub fn collect_reference_trace(
    track: &Track,
    cfg: &SimConfig,
    gains: PidGains,
    laps: usize,
) -> Result<(Vec<VehicleState>, Dataset), ControllerError> {
    let model = DrivingModel::Autopilot(Autopilot { gains });
    let cfg = cfg.deterministic();
    let target = track.length() * laps as f64;
    // generous step cap: the whole distance at minimum speed
    let cap = (target / (cfg.v_min_kmh / 3.6) * cfg.fps).ceil() as usize;
    let episode = run_episode(&model, track, VehicleState::nominal(track), cap, &cfg, 0)?;
    let steps = trace_prefix_for_distance(&episode, target);
    if !episode.success && steps == episode.trace.len() {
        return Err(ControllerError::AutopilotFailed(episode.steps_in_lane));
    }
    let spec = FeatureSpec::default();
    let mut states = Vec::with_capacity(steps);
    let mut data = Dataset::default();
    for t in &episode.trace[..steps] {
        states.push(t.state);
        data.samples.push(LabeledSample {
            observation: spec.observe(&t.state, track),
            steering_label: t.steer,
            provenance: Provenance::Nominal,
        });
    }
    Ok((states, data))
}

/// Number of leading trace entries needed to cover `distance` meters.
fn trace_prefix_for_distance(episode: &EpisodeResult, distance: f64) -> usize {
    let mut covered = 0.0;
    for (i, w) in episode.trace.windows(2).enumerate() {
        covered += w[0].state.position().distance(w[1].state.position());
        if covered >= distance {
            return i + 1;
        }
    }
    episode.trace.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_states::{is_valid_state, ValidityLimits};
    use crate::dynamics::drive_nominal;
    use crate::geometry::training_track;

    #[test]
    fn default_gains_drive_the_training_track_centered() {
        let t = training_track();
        let cfg = SimConfig::default();
        let r = drive_nominal(&DrivingModel::Autopilot(Autopilot::default()), &t, &cfg).unwrap();
        assert!(r.success);
        assert!(r.mean_abs_xte() < 0.2, "{}", r.mean_abs_xte());
    }

    #[test]
    fn tuning_never_worsens_the_start() {
        let t = training_track();
        let cfg = SimConfig::default();
        let start = nominal_cost(PidGains::default(), &t, &cfg);
        let rep = tune_autopilot(&t, &cfg, PidGains::default(), 3);
        assert!(rep.mean_abs_xte <= start);
        assert!(rep.mean_abs_xte < 0.2);
    }

    #[test]
    fn reference_trace_is_valid_and_centered() {
        let t = training_track();
        let cfg = SimConfig::default();
        let (states, data) = collect_reference_trace(&t, &cfg, PidGains::default(), 3).unwrap();
        assert_eq!(states.len(), data.len());
        let limits = ValidityLimits::default();
        assert!(states.iter().all(|s| is_valid_state(s, &t, &limits)));
        let mean = states.iter().map(|s| t.xte(s.position())).sum::<f64>() / states.len() as f64;
        assert!(mean < 0.2, "{mean}");
        assert!(data.samples.iter().all(|s| s.steering_label.abs() <= 1.0));
    }
}
