//! Track-level features and evaluation-track generation.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::angle::{heading_of, wrap_signed_deg};
use super::point::Vec2;
use super::track::{resample_closed, Track};
use super::GeometryError;

/// Direction change between consecutive waypoints that counts as turning.
pub const TURN_THRESHOLD_DEG: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackFeatures {
    pub curvature: f64,
    pub num_turns: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_to_reference: Option<f64>,
}

impl TrackFeatures {
    pub fn of(track: &Track, reference: Option<&Track>) -> Result<Self, GeometryError> {
        let distance_to_reference = match reference {
            Some(r) => Some(track_distance(r, track)?),
            None => None,
        };
        Ok(Self {
            curvature: track_curvature(track)?,
            num_turns: count_turns(track),
            distance_to_reference,
        })
    }
}

/// Radius of the circle through three points; infinite when collinear.
pub fn circumradius(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let ab = a.distance(b);
    let bc = b.distance(c);
    let ca = c.distance(a);
    let twice_area = (b - a).cross(c - a).abs();
    if twice_area == 0.0 {
        f64::INFINITY
    } else {
        ab * bc * ca / (2.0 * twice_area)
    }
}

/// Inverse of the smallest circumradius over consecutive waypoint triples.
pub fn track_curvature(track: &Track) -> Result<f64, GeometryError> {
    let pts = track.waypoints();
    let n = pts.len();
    let mut min_radius = f64::INFINITY;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let c = pts[(i + 2) % n];
        if a == b || b == c {
            return Err(GeometryError::DegenerateTriple(i));
        }
        min_radius = min_radius.min(circumradius(a, b, c));
    }
    Ok(if min_radius.is_infinite() {
        0.0
    } else {
        1.0 / min_radius
    })
}

/// Number of maximal cyclic runs of waypoints whose direction change
/// exceeds [`TURN_THRESHOLD_DEG`].
pub fn count_turns(track: &Track) -> usize {
    let n = track.len();
    let turning: Vec<bool> = (0..n)
        .map(|i| {
            let delta = wrap_signed_deg(track.heading_at(i) - track.heading_at(i + n - 1));
            delta.abs() > TURN_THRESHOLD_DEG
        })
        .collect();
    count_cyclic_runs(&turning)
}

pub(crate) fn count_cyclic_runs(flags: &[bool]) -> usize {
    let n = flags.len();
    if flags.iter().all(|&f| f) {
        return 1;
    }
    (0..n)
        .filter(|&i| flags[i] && !flags[(i + n - 1) % n])
        .count()
}

/// Sum of distances between waypoints aligned from each origin.
pub fn track_distance(a: &Track, b: &Track) -> Result<f64, GeometryError> {
    let n = a.len();
    if b.len() != n {
        return Err(GeometryError::MismatchedLength(n, b.len()));
    }
    let (pa, pb) = (a.waypoints(), b.waypoints());
    let (oa, ob) = (a.origin_index(), b.origin_index());
    Ok((0..n)
        .map(|k| pa[(oa + k) % n].distance(pb[(ob + k) % n]))
        .sum())
}

/// Gaussian displacement of a short waypoint window, normal to the road.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackMutation {
    pub min_window: usize,
    pub max_window: usize,
    pub sigma_m: f64,
    /// Laplacian smoothing passes applied around the window afterwards.
    pub smoothing_passes: usize,
}

impl Default for TrackMutation {
    fn default() -> Self {
        Self {
            min_window: 2,
            max_window: 5,
            sigma_m: 1.0,
            smoothing_passes: 2,
        }
    }
}

impl TrackMutation {
    /// Displaces one random window of `track` and re-spaces the loop.
    pub fn apply<R: Rng + ?Sized>(
        &self,
        track: &Track,
        rng: &mut R,
    ) -> Result<Track, GeometryError> {
        let n = track.len();
        let mut pts = track.waypoints().to_vec();
        let window = rng.random_range(self.min_window..=self.max_window);
        let start = rng.random_range(0..n);
        for k in 0..window {
            let i = (start + k) % n;
            let heading = track.heading_at(i).to_radians();
            // unit normal toward increasing heading
            let normal = Vec2::new(heading.cos(), -heading.sin());
            let offset: f64 = StandardNormal.sample(rng);
            pts[i] = pts[i] + normal * (offset * self.sigma_m);
        }
        let reach = 2;
        for _ in 0..self.smoothing_passes {
            let snapshot = pts.clone();
            for k in 0..(window + 2 * reach) {
                let i = (start + n - reach + k) % n;
                let prev = snapshot[(i + n - 1) % n];
                let next = snapshot[(i + 1) % n];
                pts[i] = snapshot[i] * 0.5 + (prev + next) * 0.25;
            }
        }
        // keep the origin waypoint first so alignment survives re-spacing
        let origin = track.origin_index();
        pts.rotate_left(origin);
        let resampled = resample_closed(&pts, n);
        Track::new(track.name().to_string(), track.lane_width(), resampled, 0)
    }
}

/// Mutates `reference` until a candidate is no farther than `max_distance`
/// and strictly exceeds the reference in curvature or in turn count.
pub fn generate_evaluation_track<R: Rng + ?Sized>(
    reference: &Track,
    rng: &mut R,
    max_distance: f64,
    attempts: usize,
    mutation: &TrackMutation,
) -> Result<Track, GeometryError> {
    let base_curvature = track_curvature(reference)?;
    let base_turns = count_turns(reference);
    let mut candidate = reference.clone();
    for _ in 0..attempts {
        let next = match mutation.apply(&candidate, rng) {
            Ok(t) => t,
            Err(_) => {
                candidate = reference.clone();
                continue;
            }
        };
        if track_distance(reference, &next)? > max_distance {
            candidate = reference.clone();
            continue;
        }
        if is_harder(&next, base_curvature, base_turns)? {
            return Ok(next);
        }
        candidate = next;
    }
    Err(GeometryError::BudgetExhausted(attempts))
}

/// Strictly more curved or with more turns than the given baseline.
pub fn is_harder(
    track: &Track,
    base_curvature: f64,
    base_turns: usize,
) -> Result<bool, GeometryError> {
    // relative slack keeps re-spacing round-off from counting as "harder"
    let curvature = track_curvature(track)?;
    Ok(curvature > base_curvature * (1.0 + 1e-9) || count_turns(track) > base_turns)
}

/// A closed centerline made of straight and arc pieces, traced from an
/// initial point and heading.
#[derive(Debug, Clone)]
pub struct CenterlineBuilder {
    points: Vec<Vec2>,
    position: Vec2,
    heading: f64,
    step: f64,
}

impl CenterlineBuilder {
    pub fn new(start: Vec2, heading: f64, step: f64) -> Self {
        Self {
            points: vec![start],
            position: start,
            heading,
            step,
        }
    }

    pub fn straight(mut self, length: f64) -> Self {
        let pieces = (length / self.step).ceil().max(1.0) as usize;
        let (dx, dy) = super::angle::heading_vector(self.heading);
        let ds = length / pieces as f64;
        for _ in 0..pieces {
            self.position = self.position + Vec2::new(dx, dy) * ds;
            self.points.push(self.position);
        }
        self
    }

    /// Arc of `radius` sweeping `angle_deg`; positive angles turn toward
    /// increasing heading.
    pub fn arc(mut self, radius: f64, angle_deg: f64) -> Self {
        let length = radius * angle_deg.abs().to_radians();
        let pieces = (length / self.step).ceil().max(1.0) as usize;
        let dpsi = angle_deg / pieces as f64;
        let chord = 2.0 * radius * (dpsi.abs().to_radians() / 2.0).sin();
        for _ in 0..pieces {
            let mid = self.heading + dpsi / 2.0;
            let (dx, dy) = super::angle::heading_vector(mid);
            self.position = self.position + Vec2::new(dx, dy) * chord;
            self.heading += dpsi;
            self.points.push(self.position);
        }
        self
    }

    /// Closes the loop and resamples it into `count` even waypoints.
    pub fn build(
        mut self,
        name: &str,
        lane_width: f64,
        count: usize,
    ) -> Result<Track, GeometryError> {
        let first = self.points[0];
        if let Some(last) = self.points.last() {
            if last.distance(first) < 1e-6 {
                self.points.pop();
            }
        }
        let pts = resample_closed(&self.points, count);
        Track::new(name, lane_width, pts, 0)
    }
}

/// The training track: a rounded rectangle with four right-hand corners of
/// different radii, about 250 m around, traversed clockwise.
pub fn training_track() -> Track {
    CenterlineBuilder::new(Vec2::new(0.0, 0.0), 0.0, 0.25)
        .straight(45.0)
        .arc(14.0, 90.0)
        .straight(31.0)
        .arc(18.0, 90.0)
        .straight(45.0)
        .arc(12.0, 90.0)
        .straight(35.0)
        .arc(16.0, 90.0)
        .build("T1", 4.0, 100)
        .expect("training track is well formed")
}

/// Heading of the segment `a` -> `b`.
pub fn segment_heading(a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    heading_of(d.x, d.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn polygon(radius: f64, n: usize) -> Track {
        let pts = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                Vec2::new(radius * a.cos(), radius * a.sin())
            })
            .collect();
        Track::new("circle", 4.0, pts, 0).unwrap()
    }

    #[test]
    fn circumradius_oracle() {
        // right triangle: hypotenuse is a diameter
        let r = circumradius(
            Vec2::new(0.0, 0.0),
            Vec2::new(3.0, 0.0),
            Vec2::new(3.0, 4.0),
        );
        assert!((r - 2.5).abs() < 1e-12);
        assert!(circumradius(
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.0, 2.0)
        )
        .is_infinite());
    }

    #[test]
    fn polygon_curvature_matches_circle() {
        let c = track_curvature(&polygon(50.0, 120)).unwrap();
        assert!((c - 0.02).abs() < 0.02 * 0.05, "{c}");
    }

    #[test]
    fn collinear_out_and_back_has_zero_curvature() {
        let mut pts: Vec<Vec2> = (0..6).map(|i| Vec2::new(0.0, i as f64)).collect();
        pts.extend((1..5).rev().map(|i| Vec2::new(0.0, i as f64)));
        let t = Track::new("line", 4.0, pts, 0).unwrap();
        assert_eq!(track_curvature(&t).unwrap(), 0.0);
    }

    #[test]
    fn turn_runs() {
        assert_eq!(count_turns(&polygon(20.0, 40)), 1);
        assert_eq!(count_turns(&training_track()), 4);
        assert_eq!(
            count_cyclic_runs(&[true, false, true, true, false, true]),
            2
        );
        assert_eq!(count_cyclic_runs(&[false, false]), 0);
    }

    #[test]
    fn distance_under_translation() {
        let t = training_track();
        assert_eq!(track_distance(&t, &t).unwrap(), 0.0);
        let moved = t.transformed(0.0, Vec2::new(1.0, 0.0));
        let d = track_distance(&t, &moved).unwrap();
        assert!((d - t.len() as f64).abs() < 1e-9);
        let short = polygon(20.0, 40);
        assert!(matches!(
            track_distance(&t, &short),
            Err(GeometryError::MismatchedLength(100, 40))
        ));
    }

    #[test]
    fn training_track_shape() {
        let t = training_track();
        assert_eq!(t.len(), 100);
        assert!((t.length() - 250.0).abs() < 2.0, "{}", t.length());
        let c = track_curvature(&t).unwrap();
        assert!(c > 1.0 / 14.0 && c < 1.0 / 10.0, "{c}");
    }

    #[test]
    fn identity_candidate_is_not_harder() {
        let t = training_track();
        let c = track_curvature(&t).unwrap();
        assert!(!is_harder(&t, c, count_turns(&t)).unwrap());
    }

    #[test]
    fn mirror_keeps_features() {
        let t = training_track();
        let m = t.mirrored();
        assert!((track_curvature(&t).unwrap() - track_curvature(&m).unwrap()).abs() < 1e-12);
        assert_eq!(count_turns(&t), count_turns(&m));
        assert!(m.curvature_at(30) * t.curvature_at(30) <= 0.0);
    }

    #[test]
    fn generated_tracks_respect_constraints() {
        let t = training_track();
        let base_c = track_curvature(&t).unwrap();
        let base_turns = count_turns(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let g = generate_evaluation_track(&t, &mut rng, 40.0, 500, &TrackMutation::default())
                .unwrap();
            assert!(track_distance(&t, &g).unwrap() <= 40.0);
            assert!(track_curvature(&g).unwrap() > base_c || count_turns(&g) > base_turns);
            assert_eq!(g.len(), t.len());
        }
    }

    #[test]
    fn impossible_budget_is_reported() {
        let t = training_track();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = generate_evaluation_track(&t, &mut rng, 0.0, 5, &TrackMutation::default());
        assert!(matches!(r, Err(GeometryError::BudgetExhausted(5))));
    }
}
