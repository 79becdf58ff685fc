//! Track representation, cross-track error, relative orientation and track features.

pub mod angle;
mod features;
mod point;
mod track;

pub use features::{
    circumradius, count_turns, generate_evaluation_track, is_harder, segment_heading,
    track_curvature, track_distance, training_track, CenterlineBuilder, TrackFeatures,
    TrackMutation, TURN_THRESHOLD_DEG,
};
pub use point::{point_segment_distance, Vec2};
pub use track::{resample_closed, rigid_transform, Location, Track, TrackFile};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("track needs at least 8 waypoints, got {0}")]
    TooFewWaypoints(usize),
    #[error("lane width must be positive, got {0}")]
    InvalidLaneWidth(f64),
    #[error("origin index {origin_index} out of range for {len} waypoints")]
    OriginOutOfRange { origin_index: usize, len: usize },
    #[error("waypoint spacing {spacing} at index {index} deviates more than 10% from mean {mean}")]
    UnevenSpacing {
        index: usize,
        spacing: f64,
        mean: f64,
    },
    #[error("waypoint coordinates must be finite")]
    NonFinite,
    #[error("track file is not marked closed")]
    OpenTrack,
    #[error("consecutive waypoints coincide at index {0}")]
    DegenerateTriple(usize),
    #[error("tracks have different waypoint counts ({0} vs {1})")]
    MismatchedLength(usize, usize),
    #[error("no candidate track satisfied the constraints within {0} attempts")]
    BudgetExhausted(usize),
}

/// Closest waypoint index and road direction at `p`.
pub fn closest_waypoint(p: Vec2, track: &Track) -> (usize, f64) {
    track.closest_waypoint(p)
}

/// Unsigned cross-track error of `p`.
pub fn xte(p: Vec2, track: &Track) -> f64 {
    track.xte(p)
}

/// Signed angle between `psi` and the road direction at `p`.
pub fn relative_orientation(p: Vec2, psi: f64, track: &Track) -> f64 {
    track.relative_orientation(p, psi)
}
