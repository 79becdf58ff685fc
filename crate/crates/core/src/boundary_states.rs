//! State validity and closeness, and the mutation operators that move a
//! state toward the lane edge, toward higher speed or toward a larger
//! misalignment with the road while staying close to a partner state.
//!
//! Every mutation either returns a state that is valid, close to its
//! partner and strictly more challenging than its input (larger xte, speed
//! or |theta|, none smaller), or a [`MutationFailure`].

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::VehicleState;
use crate::geometry::angle::{circular_distance, wrap_deg, wrap_signed_deg};
use crate::geometry::{Track, Vec2};

/// Default rejection-sampling attempts per operator.
pub const DEFAULT_MUTATION_BUDGET: usize = 20;

/// Probability of applying each operator after the first one.
pub const FOLLOW_UP_PROBABILITY: f64 = 0.3;

/// Maximum componentwise distance for two states to count as close.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClosenessBudget {
    pub eps_p: f64,
    pub eps_v: f64,
    pub eps_psi: f64,
}

impl Default for ClosenessBudget {
    fn default() -> Self {
        Self {
            eps_p: 0.4,
            eps_v: 3.0,
            eps_psi: 7.2,
        }
    }
}

impl ClosenessBudget {
    /// 10% of the lane width, 10% of the top speed and 2% of a full turn.
    pub fn scaled(lane_width: f64, v_max: f64) -> Self {
        Self {
            eps_p: 0.1 * lane_width,
            eps_v: 0.1 * v_max,
            eps_psi: 7.2,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.eps_p > 0.0 && self.eps_v > 0.0 && self.eps_psi > 0.0
    }

    pub fn admits(&self, d: StateDistance) -> bool {
        d.dp <= self.eps_p && d.dv <= self.eps_v && d.dpsi <= self.eps_psi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidityLimits {
    pub v_max: f64,
    pub theta_max: f64,
}

impl Default for ValidityLimits {
    fn default() -> Self {
        Self {
            v_max: 30.0,
            theta_max: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDistance {
    pub dp: f64,
    pub dv: f64,
    pub dpsi: f64,
}

pub fn state_distance(a: &VehicleState, b: &VehicleState) -> StateDistance {
    StateDistance {
        dp: a.position().distance(b.position()),
        dv: (a.v - b.v).abs(),
        dpsi: circular_distance(a.psi, b.psi),
    }
}

pub fn are_close(a: &VehicleState, b: &VehicleState, eps: &ClosenessBudget) -> bool {
    eps.admits(state_distance(a, b))
}

/// In lane, not too fast and not too misaligned. All bounds inclusive.
pub fn is_valid_state(s: &VehicleState, track: &Track, limits: &ValidityLimits) -> bool {
    let loc = track.locate(s.position(), s.psi);
    loc.signed_xte.abs() <= track.half_width()
        && s.v <= limits.v_max
        && loc.theta.abs() <= limits.theta_max
}

/// Cross-track error, speed and absolute relative orientation: the three
/// quantities a mutation may only increase.
fn challenge(s: &VehicleState, track: &Track) -> (f64, f64, f64) {
    let loc = track.locate(s.position(), s.psi);
    (loc.signed_xte.abs(), s.v, loc.theta.abs())
}

/// A less challenging state `s1` and a more challenging state `s2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatePair {
    pub s1: VehicleState,
    pub s2: VehicleState,
}

impl StatePair {
    pub fn is_well_formed(
        &self,
        track: &Track,
        limits: &ValidityLimits,
        eps: &ClosenessBudget,
    ) -> bool {
        self.s1 != self.s2
            && are_close(&self.s1, &self.s2, eps)
            && is_valid_state(&self.s1, track, limits)
            && is_valid_state(&self.s2, track, limits)
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum BoundaryError {
    #[error("reference trace is empty")]
    EmptyTrace,
    #[error("no state of the reference trace is valid")]
    NoValidState,
}

#[derive(Debug, thiserror::Error, Clone, Copy, PartialEq, Eq)]
pub enum MutationFailure {
    #[error("no feasible value satisfies the constraints")]
    Infeasible,
    #[error("mutation budget exhausted")]
    BudgetExhausted,
}

/// Arc on the circle from `lo` to `hi` in the direction of increasing
/// angle. `lo == hi` is the full circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularRange {
    lo: f64,
    hi: f64,
}

impl AngularRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo: wrap_deg(lo),
            hi: wrap_deg(hi),
        }
    }

    pub fn full() -> Self {
        Self { lo: 0.0, hi: 0.0 }
    }

    /// `center ± half_width`, the full circle when that covers it.
    pub fn around(center: f64, half_width: f64) -> Self {
        if half_width >= 180.0 {
            Self::full()
        } else {
            Self::new(center - half_width, center + half_width)
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Arc length in `(0, 360]`.
    pub fn length(&self) -> f64 {
        let len = (self.hi - self.lo).rem_euclid(360.0);
        if len == 0.0 {
            360.0
        } else {
            len
        }
    }

    pub fn contains(&self, angle: f64) -> bool {
        (wrap_deg(angle) - self.lo).rem_euclid(360.0) <= self.length()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        wrap_deg(self.lo + rng.random::<f64>() * self.length())
    }
}

/// Intersection of two arcs: empty, one arc, or two disjoint arcs.
/// Zero-measure contacts are dropped.
pub fn intersect_angular_ranges(a: AngularRange, b: AngularRange) -> Vec<AngularRange> {
    let (a0, a1) = (a.lo, a.lo + a.length());
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    for shift in [-360.0, 0.0, 360.0] {
        let (b0, b1) = (b.lo + shift, b.lo + shift + b.length());
        let (s, e) = (a0.max(b0), a1.min(b1));
        if e > s {
            pieces.push((s, e));
        }
    }
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for p in pieces {
        match merged.last_mut() {
            Some(last) if p.0 <= last.1 => last.1 = last.1.max(p.1),
            _ => merged.push(p),
        }
    }
    // pieces meeting across the 360/0 seam of a full-circle `a`
    if merged.len() > 1 {
        let (first, last) = (merged[0], merged[merged.len() - 1]);
        if last.1 - first.0 >= 360.0 {
            merged.pop();
            merged[0] = (last.0 - 360.0, first.1);
        }
    }
    merged
        .into_iter()
        .map(|(s, e)| {
            if e - s >= 360.0 {
                AngularRange::full()
            } else {
                AngularRange::new(s, e)
            }
        })
        .collect()
}

/// Uniform pick from the reference trace among its valid states.
pub fn sample_valid_state<R: Rng + ?Sized>(
    trace: &[VehicleState],
    track: &Track,
    limits: &ValidityLimits,
    rng: &mut R,
) -> Result<VehicleState, BoundaryError> {
    if trace.is_empty() {
        return Err(BoundaryError::EmptyTrace);
    }
    let mut order: Vec<usize> = (0..trace.len()).collect();
    order.shuffle(rng);
    order
        .into_iter()
        .map(|i| trace[i])
        .find(|s| is_valid_state(s, track, limits))
        .ok_or(BoundaryError::NoValidState)
}

/// Everything the mutation operators need besides the two states.
#[derive(Debug, Clone, Copy)]
pub struct MutationContext<'a> {
    pub track: &'a Track,
    pub limits: ValidityLimits,
    pub eps: ClosenessBudget,
    /// Rejection-sampling attempts per operator.
    pub budget: usize,
}

impl<'a> MutationContext<'a> {
    pub fn new(track: &'a Track) -> Self {
        Self {
            track,
            limits: ValidityLimits::default(),
            eps: ClosenessBudget::default(),
            budget: DEFAULT_MUTATION_BUDGET,
        }
    }

    /// `candidate` is valid, close to `partner`, and no less challenging
    /// than `from` in every component.
    fn admissible(
        &self,
        from: &VehicleState,
        candidate: &VehicleState,
        partner: &VehicleState,
    ) -> bool {
        let (d0, v0, t0) = challenge(from, self.track);
        let (d1, v1, t1) = challenge(candidate, self.track);
        d1 >= d0
            && v1 >= v0
            && t1 >= t0
            && (d1 > d0 || v1 > v0 || t1 > t0)
            && are_close(candidate, partner, &self.eps)
            && is_valid_state(candidate, self.track, &self.limits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operator {
    Position,
    Orientation,
    Velocity,
}

impl Operator {
    pub const ALL: [Operator; 3] = [
        Operator::Position,
        Operator::Orientation,
        Operator::Velocity,
    ];

    pub fn apply<R: Rng + ?Sized>(
        self,
        si: &VehicleState,
        sj: &VehicleState,
        ctx: &MutationContext,
        rng: &mut R,
    ) -> Result<VehicleState, MutationFailure> {
        match self {
            Operator::Position => mutate_position(si, sj, ctx, rng),
            Operator::Orientation => mutate_orientation(si, sj, ctx, rng),
            Operator::Velocity => mutate_velocity(si, sj, ctx, rng),
        }
    }
}

/// Moves `si` to a position with strictly larger xte, within `eps_p` of
/// `sj`. One coordinate is drawn within `eps_p` of `si`'s, the other from
/// the interval the closeness disc around `sj` leaves for it.
pub fn mutate_position<R: Rng + ?Sized>(
    si: &VehicleState,
    sj: &VehicleState,
    ctx: &MutationContext,
    rng: &mut R,
) -> Result<VehicleState, MutationFailure> {
    let eps = ctx.eps.eps_p;
    let (p, q) = (si.position(), sj.position());
    for _ in 0..ctx.budget {
        let along_x = rng.random_bool(0.5);
        let (c, qc, qo) = if along_x {
            (p.x, q.x, q.y)
        } else {
            (p.y, q.y, q.x)
        };
        let drawn = c + rng.random_range(-eps..eps);
        let room = eps * eps - (drawn - qc).powi(2);
        if room < 0.0 {
            continue;
        }
        let half = room.sqrt();
        let other = if half > 0.0 {
            rng.random_range(qo - half..=qo + half)
        } else {
            qo
        };
        let position = if along_x {
            Vec2::new(drawn, other)
        } else {
            Vec2::new(other, drawn)
        };
        let candidate = VehicleState {
            x: position.x,
            y: position.y,
            ..*si
        };
        if ctx.admissible(si, &candidate, sj) {
            return Ok(candidate);
        }
    }
    Err(MutationFailure::BudgetExhausted)
}

/// Rotates `si` to a heading inside both the closeness arc around `sj`'s
/// heading and the validity arc around the road direction, with strictly
/// larger |theta|.
pub fn mutate_orientation<R: Rng + ?Sized>(
    si: &VehicleState,
    sj: &VehicleState,
    ctx: &MutationContext,
    rng: &mut R,
) -> Result<VehicleState, MutationFailure> {
    let (_, road) = ctx.track.closest_waypoint(si.position());
    let validity = AngularRange::around(road, ctx.limits.theta_max);
    let closeness = AngularRange::around(sj.psi, ctx.eps.eps_psi);
    let overlap = intersect_angular_ranges(validity, closeness);
    let total: f64 = overlap.iter().map(AngularRange::length).sum();
    if overlap.is_empty() {
        return Err(MutationFailure::Infeasible);
    }
    let theta = wrap_signed_deg(si.psi - road).abs();
    for _ in 0..ctx.budget {
        let mut pick = rng.random::<f64>() * total;
        let mut arc = overlap[overlap.len() - 1];
        for piece in &overlap {
            if pick < piece.length() {
                arc = *piece;
                break;
            }
            pick -= piece.length();
        }
        let psi = arc.sample(rng);
        if wrap_signed_deg(psi - road).abs() <= theta {
            continue;
        }
        let candidate = VehicleState { psi, ..*si };
        if ctx.admissible(si, &candidate, sj) {
            return Ok(candidate);
        }
    }
    Err(MutationFailure::BudgetExhausted)
}

/// Raises the speed of `si` to a value in `(vi, min(vj + eps_v, v_max)]`.
pub fn mutate_velocity<R: Rng + ?Sized>(
    si: &VehicleState,
    sj: &VehicleState,
    ctx: &MutationContext,
    rng: &mut R,
) -> Result<VehicleState, MutationFailure> {
    let hi = (sj.v + ctx.eps.eps_v).min(ctx.limits.v_max);
    if si.v >= hi {
        return Err(MutationFailure::Infeasible);
    }
    // hi - u*(hi - vi) with u in [0, 1) never returns vi itself
    let v = hi - rng.random::<f64>() * (hi - si.v);
    let candidate = VehicleState { v, ..*si };
    if v > si.v && ctx.admissible(si, &candidate, sj) {
        Ok(candidate)
    } else {
        Err(MutationFailure::Infeasible)
    }
}

/// One operator chosen uniformly, then each of the other two with
/// probability [`FOLLOW_UP_PROBABILITY`], each acting on the previous
/// result. Succeeds when at least one applied operator succeeded.
pub fn mutate_state<R: Rng + ?Sized>(
    si: &VehicleState,
    sj: &VehicleState,
    ctx: &MutationContext,
    rng: &mut R,
) -> Result<VehicleState, MutationFailure> {
    mutate_state_logged(si, sj, ctx, rng, &mut Vec::new())
}

/// [`mutate_state`] that also records each applied operator and whether it
/// succeeded.
pub fn mutate_state_logged<R: Rng + ?Sized>(
    si: &VehicleState,
    sj: &VehicleState,
    ctx: &MutationContext,
    rng: &mut R,
    log: &mut Vec<(Operator, bool)>,
) -> Result<VehicleState, MutationFailure> {
    let first = rng.random_range(0..3);
    let mut current = *si;
    let mut last_failure = MutationFailure::Infeasible;
    let mut any = false;
    for k in 0..3 {
        let op = Operator::ALL[(first + k) % 3];
        if k > 0 && !rng.random_bool(FOLLOW_UP_PROBABILITY) {
            continue;
        }
        match op.apply(&current, sj, ctx, rng) {
            Ok(next) => {
                current = next;
                any = true;
                log.push((op, true));
            }
            Err(e) => {
                last_failure = e;
                log.push((op, false));
            }
        }
    }
    if any {
        Ok(current)
    } else {
        Err(last_failure)
    }
}

/// Componentwise change from `from` to `to`: position offset, signed
/// heading change, speed change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDelta {
    pub dp: Vec2,
    pub dpsi: f64,
    pub dv: f64,
}

impl StateDelta {
    pub fn between(from: &VehicleState, to: &VehicleState) -> Self {
        Self {
            dp: to.position() - from.position(),
            dpsi: wrap_signed_deg(to.psi - from.psi),
            dv: to.v - from.v,
        }
    }

    pub fn apply(&self, s: &VehicleState) -> VehicleState {
        VehicleState::new(s.position() + self.dp, s.psi + self.dpsi, s.v + self.dv)
    }
}

/// Mutates `s2` toward a harder state and moves `s1` by the same change,
/// retrying until both are valid, close and distinct or the budget runs out.
pub fn mutate_pair<R: Rng + ?Sized>(
    pair: &StatePair,
    ctx: &MutationContext,
    rng: &mut R,
) -> Result<StatePair, MutationFailure> {
    let mut last_failure = MutationFailure::BudgetExhausted;
    for _ in 0..ctx.budget {
        let s2 = match mutate_state(&pair.s2, &pair.s1, ctx, rng) {
            Ok(s) => s,
            Err(e) => {
                last_failure = e;
                continue;
            }
        };
        let s1 = StateDelta::between(&pair.s2, &s2).apply(&pair.s1);
        let candidate = StatePair { s1, s2 };
        if candidate.is_well_formed(ctx.track, &ctx.limits, &ctx.eps) {
            return Ok(candidate);
        }
        last_failure = MutationFailure::BudgetExhausted;
    }
    Err(last_failure)
}
