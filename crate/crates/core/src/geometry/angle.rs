//! Degree-valued angle helpers.
//!
//! Headings are measured from the absolute +y axis (0°) and grow toward +x,
//! so a heading of 90° points along +x. Every helper here works in degrees.

/// Wraps an angle into `[0, 360)`.
pub fn wrap_deg(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if wrapped >= 360.0 {
        0.0
    } else {
        wrapped
    }
}

/// Wraps an angle into `(-180, 180]`.
pub fn wrap_signed_deg(angle: f64) -> f64 {
    let wrapped = wrap_deg(angle);
    if wrapped > 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}

/// Minimal circular distance between two headings, in `[0, 180]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Heading of the direction vector `(dx, dy)`.
pub fn heading_of(dx: f64, dy: f64) -> f64 {
    wrap_deg(dx.atan2(dy).to_degrees())
}

/// Unit vector pointing along `heading`.
pub fn heading_vector(heading: f64) -> (f64, f64) {
    let rad = heading.to_radians();
    (rad.sin(), rad.cos())
}
