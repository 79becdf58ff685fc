//! Fixed-timestep kinematic bicycle simulation and episode execution.
//!
//! A vehicle is "placed" in a [`VehicleState`]: position, heading and speed
//! are set directly, then the driving model steers at every step while the
//! throttle follows the speed rule in [`target_speed`]. An episode fails as
//! soon as the center of mass leaves the lane (`xte > W/2`).

use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controllers::{DrivingModel, FeatureSpec};
use crate::geometry::angle::{heading_vector, wrap_deg};
use crate::geometry::{Track, Vec2};

/// Position (m), heading (deg from +y, in `[0, 360)`) and speed (km/h).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v: f64,
}

impl VehicleState {
    pub fn new(position: Vec2, psi: f64, v: f64) -> Self {
        Self {
            x: position.x,
            y: position.y,
            psi: wrap_deg(psi),
            v: v.max(0.0),
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Velocity vector in the absolute frame, m/s.
    pub fn velocity(&self) -> Vec2 {
        let (dx, dy) = heading_vector(self.psi);
        Vec2::new(dx, dy) * (self.v / 3.6)
    }

    /// Nominal start: origin waypoint, aligned with the road, standing still.
    pub fn nominal(track: &Track) -> Self {
        let i = track.origin_index();
        Self::new(track.origin(), track.heading_at(i), 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub fps: f64,
    pub wheelbase_m: f64,
    pub max_steer_deg: f64,
    pub v_min_kmh: f64,
    pub v_max_kmh: f64,
    /// Proportional gain of the speed law, 1/s.
    pub speed_gain: f64,
    pub t_min_steps: usize,
    pub nominal_steps: usize,
    pub eval_steps: usize,
    /// Standard deviation of observation noise on the normalized feature
    /// scale; zero disables the stochastic mode.
    pub observation_noise: f64,
}

/// Observation noise used when the stochastic mode is switched on.
pub const DEFAULT_OBSERVATION_NOISE: f64 = 0.01;

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            fps: 20.0,
            wheelbase_m: 2.5,
            max_steer_deg: 35.0,
            v_min_kmh: 10.0,
            v_max_kmh: 30.0,
            speed_gain: 0.5,
            t_min_steps: 250,
            nominal_steps: 1200,
            eval_steps: 600,
            observation_noise: 0.0,
        }
    }
}

impl SimConfig {
    pub fn dt(&self) -> f64 {
        1.0 / self.fps
    }

    pub fn deterministic(mut self) -> Self {
        self.observation_noise = 0.0;
        self
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.observation_noise = sigma;
        self
    }

    pub fn is_stochastic(&self) -> bool {
        self.observation_noise > 0.0
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let ok = self.fps > 0.0
            && self.wheelbase_m > 0.0
            && self.max_steer_deg > 0.0
            && self.max_steer_deg < 90.0
            && self.v_min_kmh >= 0.0
            && self.v_min_kmh < self.v_max_kmh
            && self.speed_gain >= 0.0
            && self.t_min_steps > 0
            && self.nominal_steps > 0
            && self.eval_steps > 0
            && self.observation_noise >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(DynamicsError::InvalidConfig)
        }
    }

    /// Turning radius at full steering lock.
    pub fn min_turn_radius(&self) -> f64 {
        self.wheelbase_m / self.max_steer_deg.to_radians().tan()
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("driving model failed at step {step}: {reason}")]
    ModelFailure { step: usize, reason: String },
    #[error("invalid simulation configuration")]
    InvalidConfig,
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
}

/// Speed the throttle rule drives toward: full speed when going straight,
/// minimum speed at full lock, linear in between.
pub fn target_speed(steer_cmd: f64, cfg: &SimConfig) -> f64 {
    let s = steer_cmd.abs().min(1.0);
    cfg.v_max_kmh - s * (cfg.v_max_kmh - cfg.v_min_kmh)
}

/// One kinematic bicycle step of length `1/fps`.
///
/// Position advances along the current heading at the current speed, then
/// heading and speed are updated. Positive commands increase the heading.
pub fn step_vehicle(s: &VehicleState, steer_cmd: f64, cfg: &SimConfig) -> VehicleState {
    let dt = cfg.dt();
    let steer = steer_cmd.clamp(-1.0, 1.0);
    let v_ms = s.v / 3.6;
    let (dx, dy) = heading_vector(s.psi);
    let yaw_rate = v_ms / cfg.wheelbase_m * (steer * cfg.max_steer_deg).to_radians().tan();
    let v = s.v + cfg.speed_gain * (target_speed(steer, cfg) - s.v) * dt;
    VehicleState {
        x: s.x + dx * v_ms * dt,
        y: s.y + dy * v_ms * dt,
        psi: wrap_deg(s.psi + yaw_rate.to_degrees() * dt),
        v: v.clamp(0.0, cfg.v_max_kmh),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub state: VehicleState,
    /// Command applied from this state; the terminal entry carries 0.
    pub steer: f64,
    pub xte: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub success: bool,
    pub steps_in_lane: usize,
    pub max_xte: f64,
    /// Every visited state, including the terminal one.
    pub trace: Vec<TraceStep>,
}

impl EpisodeResult {
    pub fn states(&self) -> impl Iterator<Item = &VehicleState> {
        self.trace.iter().map(|t| &t.state)
    }

    pub fn mean_abs_xte(&self) -> f64 {
        if self.trace.is_empty() {
            return 0.0;
        }
        self.trace.iter().map(|t| t.xte).sum::<f64>() / self.trace.len() as f64
    }

    /// Writes the trace as CSV (`step,x,y,psi_deg,v_kmh,steer,xte,theta_deg`).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,x,y,psi_deg,v_kmh,steer,xte,theta_deg")?;
        for (i, t) in self.trace.iter().enumerate() {
            writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                i, t.state.x, t.state.y, t.state.psi, t.state.v, t.steer, t.xte, t.theta
            )?;
        }
        Ok(())
    }
}

/// Reads a trace written by [`EpisodeResult::write_csv`].
pub fn read_trace_csv<R: BufRead>(input: R) -> Result<Vec<TraceStep>, DynamicsError> {
    let bad =
        |line: usize, what: &str| DynamicsError::MalformedTrace(format!("line {line}: {what}"));
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "step,x,y,psi_deg,v_kmh,steer,xte,theta_deg" => {}
        _ => return Err(bad(1, "unexpected header")),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| bad(i + 2, &e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<f64> = line
            .trim()
            .split(',')
            .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| bad(i + 2, "non-numeric field"))?;
        if f.len() != 8 {
            return Err(bad(i + 2, "expected 8 fields"));
        }
        out.push(TraceStep {
            state: VehicleState {
                x: f[1],
                y: f[2],
                psi: f[3],
                v: f[4],
            },
            steer: f[5],
            xte: f[6],
            theta: f[7],
        });
    }
    Ok(out)
}

/// Places the vehicle at `start` and lets `model` drive until it leaves the
/// lane or `success_steps` steps have been completed in lane.
///
/// `noise_seed` seeds the observation noise; it is ignored when the
/// configuration is deterministic.
pub fn run_episode(
    model: &DrivingModel,
    track: &Track,
    start: VehicleState,
    success_steps: usize,
    cfg: &SimConfig,
    noise_seed: u64,
) -> Result<EpisodeResult, DynamicsError> {
    run_episode_with(
        model,
        track,
        start,
        success_steps,
        cfg,
        noise_seed,
        &model.feature_spec(),
    )
}

pub(crate) fn run_episode_with(
    model: &DrivingModel,
    track: &Track,
    start: VehicleState,
    success_steps: usize,
    cfg: &SimConfig,
    noise_seed: u64,
    features: &FeatureSpec,
) -> Result<EpisodeResult, DynamicsError> {
    let half_width = track.half_width();
    let mut rng = cfg
        .is_stochastic()
        .then(|| ChaCha8Rng::seed_from_u64(noise_seed));
    let mut pilot = model.pilot(cfg);
    let mut trace = Vec::with_capacity(success_steps.min(4096) + 1);
    let mut state = start;
    let mut max_xte: f64 = 0.0;
    let mut taken: usize = 0;
    let steps_in_lane;

    loop {
        let mut obs = features.observe(&state, track);
        let xte = obs.xte_signed.abs();
        max_xte = max_xte.max(xte);
        if xte > half_width {
            trace.push(TraceStep {
                state,
                steer: 0.0,
                xte,
                theta: obs.theta,
            });
            // the step that left the lane does not count
            steps_in_lane = taken.saturating_sub(1);
            break;
        }
        if taken == success_steps {
            trace.push(TraceStep {
                state,
                steer: 0.0,
                xte,
                theta: obs.theta,
            });
            steps_in_lane = taken;
            break;
        }
        let theta = obs.theta;
        if let Some(rng) = rng.as_mut() {
            features.perturb(&mut obs, cfg.observation_noise, rng);
        }
        let steer = pilot
            .steer(&obs)
            .map_err(|reason| DynamicsError::ModelFailure {
                step: taken,
                reason,
            })?;
        trace.push(TraceStep {
            state,
            steer,
            xte,
            theta,
        });
        state = step_vehicle(&state, steer, cfg);
        taken += 1;
    }

    Ok(EpisodeResult {
        success: steps_in_lane >= success_steps,
        steps_in_lane,
        max_xte,
        trace,
    })
}

/// Nominal-start episode over `cfg.nominal_steps`: the well-behaving gate.
pub fn drive_nominal(
    model: &DrivingModel,
    track: &Track,
    cfg: &SimConfig,
) -> Result<EpisodeResult, DynamicsError> {
    run_episode(
        model,
        track,
        VehicleState::nominal(track),
        cfg.nominal_steps,
        cfg,
        0,
    )
}
