use serde::{Deserialize, Serialize};

use super::angle::{heading_of, wrap_signed_deg};
use super::point::{point_segment_distance, Vec2};
use super::GeometryError;

const MIN_WAYPOINTS: usize = 8;
const SPACING_TOLERANCE: f64 = 0.10;

/// A closed loop of evenly spaced centerline waypoints with a lane width.
///
/// The successor of the last waypoint is the first one. Road direction at a
/// waypoint is the direction of the segment to its successor.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    name: String,
    lane_width_m: f64,
    waypoints: Vec<Vec2>,
    origin_index: usize,
    headings: Vec<f64>,
    curvatures: Vec<f64>,
    mean_spacing: f64,
}

impl Track {
    pub fn new(
        name: impl Into<String>,
        lane_width_m: f64,
        waypoints: Vec<Vec2>,
        origin_index: usize,
    ) -> Result<Self, GeometryError> {
        let n = waypoints.len();
        if n < MIN_WAYPOINTS {
            return Err(GeometryError::TooFewWaypoints(n));
        }
        if !(lane_width_m.is_finite() && lane_width_m > 0.0) {
            return Err(GeometryError::InvalidLaneWidth(lane_width_m));
        }
        if origin_index >= n {
            return Err(GeometryError::OriginOutOfRange {
                origin_index,
                len: n,
            });
        }
        if waypoints
            .iter()
            .any(|p| !(p.x.is_finite() && p.y.is_finite()))
        {
            return Err(GeometryError::NonFinite);
        }

        let spacings: Vec<f64> = (0..n)
            .map(|i| waypoints[i].distance(waypoints[(i + 1) % n]))
            .collect();
        let mean_spacing = spacings.iter().sum::<f64>() / n as f64;
        if mean_spacing <= 0.0 {
            return Err(GeometryError::UnevenSpacing {
                index: 0,
                spacing: 0.0,
                mean: 0.0,
            });
        }
        for (index, &spacing) in spacings.iter().enumerate() {
            if (spacing - mean_spacing).abs() > SPACING_TOLERANCE * mean_spacing {
                return Err(GeometryError::UnevenSpacing {
                    index,
                    spacing,
                    mean: mean_spacing,
                });
            }
        }

        let headings: Vec<f64> = (0..n)
            .map(|i| {
                let d = waypoints[(i + 1) % n] - waypoints[i];
                heading_of(d.x, d.y)
            })
            .collect();
        let curvatures = (0..n)
            .map(|i| {
                let turn = wrap_signed_deg(headings[i] - headings[(i + n - 1) % n]);
                turn.to_radians() / mean_spacing
            })
            .collect();

        Ok(Self {
            name: name.into(),
            lane_width_m,
            waypoints,
            origin_index,
            headings,
            curvatures,
            mean_spacing,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lane_width(&self) -> f64 {
        self.lane_width_m
    }

    pub fn half_width(&self) -> f64 {
        self.lane_width_m / 2.0
    }

    pub fn waypoints(&self) -> &[Vec2] {
        &self.waypoints
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn origin_index(&self) -> usize {
        self.origin_index
    }

    pub fn origin(&self) -> Vec2 {
        self.waypoints[self.origin_index]
    }

    pub fn mean_spacing(&self) -> f64 {
        self.mean_spacing
    }

    /// Total centerline length of the loop.
    pub fn length(&self) -> f64 {
        self.mean_spacing * self.len() as f64
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Road direction at waypoint `index`.
    pub fn heading_at(&self, index: usize) -> f64 {
        self.headings[index % self.len()]
    }

    /// Signed curvature (1/m) at waypoint `index`; positive when the road
    /// turns toward increasing heading.
    pub fn curvature_at(&self, index: usize) -> f64 {
        self.curvatures[index % self.len()]
    }

    /// Signed curvature `offset_m` meters of arc ahead of waypoint `index`,
    /// linearly interpolated between waypoints.
    pub fn curvature_ahead(&self, index: usize, offset_m: f64) -> f64 {
        let n = self.len();
        let steps = offset_m / self.mean_spacing;
        let whole = steps.floor();
        let frac = steps - whole;
        let i0 = (index + whole as usize) % n;
        let i1 = (i0 + 1) % n;
        self.curvatures[i0] * (1.0 - frac) + self.curvatures[i1] * frac
    }

    pub fn next_index(&self, index: usize) -> usize {
        (index + 1) % self.len()
    }

    pub fn prev_index(&self, index: usize) -> usize {
        (index + self.len() - 1) % self.len()
    }

    /// Nearest waypoint to `p` and the road direction there.
    pub fn closest_waypoint(&self, p: Vec2) -> (usize, f64) {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, w) in self.waypoints.iter().enumerate() {
            let d = p.distance_sq(*w);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        (best, self.headings[best])
    }

    /// Signed lateral offset from the centerline polyline.
    ///
    /// Measured against the two segments adjacent to the closest waypoint.
    /// Positive values lie on the side toward which headings increase
    /// (clockwise, +x of a road heading along +y).
    pub fn signed_xte(&self, p: Vec2) -> f64 {
        let (k, _) = self.closest_waypoint(p);
        self.signed_xte_near(p, k)
    }

    pub(crate) fn signed_xte_near(&self, p: Vec2, k: usize) -> f64 {
        let prev = self.prev_index(k);
        let next = self.next_index(k);
        let a = self.waypoints[prev];
        let b = self.waypoints[k];
        let c = self.waypoints[next];
        let (d_in, _) = point_segment_distance(p, a, b);
        let (d_out, _) = point_segment_distance(p, b, c);
        let (dist, start, end) = if d_in < d_out {
            (d_in, a, b)
        } else {
            (d_out, b, c)
        };
        let side = (end - start).cross(p - start);
        if side > 0.0 {
            -dist
        } else {
            dist
        }
    }

    /// Closest waypoint, signed cross-track error and relative orientation in one scan.
    pub fn locate(&self, p: Vec2, psi: f64) -> Location {
        let (index, road_heading) = self.closest_waypoint(p);
        Location {
            index,
            signed_xte: self.signed_xte_near(p, index),
            theta: wrap_signed_deg(psi - road_heading),
        }
    }

    /// Cross-track error: unsigned distance to the centerline.
    pub fn xte(&self, p: Vec2) -> f64 {
        self.signed_xte(p).abs()
    }

    /// Signed difference between `psi` and the road direction, in `(-180, 180]`.
    pub fn relative_orientation(&self, p: Vec2, psi: f64) -> f64 {
        let (_, psi_cw) = self.closest_waypoint(p);
        wrap_signed_deg(psi - psi_cw)
    }

    /// The same loop reflected across the y axis.
    ///
    /// Waypoint order and origin are kept, so the traversal direction flips
    /// handedness (clockwise turns become counterclockwise).
    pub fn mirrored(&self) -> Track {
        let waypoints = self
            .waypoints
            .iter()
            .map(|p| Vec2::new(-p.x, p.y))
            .collect();
        Track::new(
            format!("{}-mirror", self.name),
            self.lane_width_m,
            waypoints,
            self.origin_index,
        )
        .expect("mirroring preserves track invariants")
    }

    /// Applies a rigid motion: rotation by `angle_deg` about the origin
    /// (toward increasing heading), then translation.
    pub fn transformed(&self, angle_deg: f64, translation: Vec2) -> Track {
        let waypoints = self
            .waypoints
            .iter()
            .map(|&p| rigid_transform(p, angle_deg, translation))
            .collect();
        Track::new(
            self.name.clone(),
            self.lane_width_m,
            waypoints,
            self.origin_index,
        )
        .expect("rigid motion preserves track invariants")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub index: usize,
    pub signed_xte: f64,
    pub theta: f64,
}

/// Rotates `p` about the origin by `angle_deg` (clockwise in the x-right,
/// y-up view, matching heading growth) then translates.
pub fn rigid_transform(p: Vec2, angle_deg: f64, translation: Vec2) -> Vec2 {
    let (s, c) = angle_deg.to_radians().sin_cos();
    Vec2::new(c * p.x + s * p.y, -s * p.x + c * p.y) + translation
}

/// Resamples a closed polyline into `count` points evenly spaced by arc
/// length, starting at `points[0]`.
pub fn resample_closed(points: &[Vec2], count: usize) -> Vec<Vec2> {
    let n = points.len();
    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0.0);
    for i in 0..n {
        let len = points[i].distance(points[(i + 1) % n]);
        cumulative.push(cumulative[i] + len);
    }
    let total = cumulative[n];
    let mut out = Vec::with_capacity(count);
    let mut seg = 0;
    for k in 0..count {
        let s = total * k as f64 / count as f64;
        while seg + 1 < n && cumulative[seg + 1] <= s {
            seg += 1;
        }
        let seg_len = cumulative[seg + 1] - cumulative[seg];
        let t = if seg_len > 0.0 {
            (s - cumulative[seg]) / seg_len
        } else {
            0.0
        };
        let a = points[seg];
        let b = points[(seg + 1) % n];
        out.push(a + (b - a) * t);
    }
    out
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// On-disk form of a track.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrackFile {
    pub name: String,
    pub lane_width_m: f64,
    pub closed: bool,
    pub origin_index: usize,
    pub waypoints: Vec<[f64; 2]>,
}

impl From<&Track> for TrackFile {
    fn from(track: &Track) -> Self {
        Self {
            name: track.name.clone(),
            lane_width_m: round6(track.lane_width_m),
            closed: true,
            origin_index: track.origin_index,
            waypoints: track
                .waypoints
                .iter()
                .map(|p| [round6(p.x), round6(p.y)])
                .collect(),
        }
    }
}

impl TryFrom<TrackFile> for Track {
    type Error = GeometryError;

    fn try_from(file: TrackFile) -> Result<Self, Self::Error> {
        if !file.closed {
            return Err(GeometryError::OpenTrack);
        }
        let waypoints = file
            .waypoints
            .iter()
            .map(|p| Vec2::new(p[0], p[1]))
            .collect();
        Track::new(file.name, file.lane_width_m, waypoints, file.origin_index)
    }
}
