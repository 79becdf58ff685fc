use std::fmt::Write;

use crate::dynamics::VehicleState;
use crate::geometry::angle::heading_vector;
use crate::geometry::{Track, Vec2};
use crate::search::ArchiveEntry;

/// Velocity arrows are drawn this many times the speed normalized by `v_max`, in meters.
pub const ARROW_SCALE: f64 = 4.0;

const PX_PER_M: f64 = 4.0;
const MARGIN_M: f64 = 6.0;

#[derive(Debug, Clone)]
pub enum Overlay {
    Trace(Vec<VehicleState>),
    Pair(ArchiveEntry),
}

struct Canvas {
    min: Vec2,
    max: Vec2,
}

impl Canvas {
    fn px(&self, p: Vec2) -> (f64, f64) {
        ((p.x - self.min.x) * PX_PER_M, (self.max.y - p.y) * PX_PER_M)
    }

    fn points(&self, pts: &[Vec2]) -> String {
        pts.iter()
            .map(|&p| {
                let (x, y) = self.px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn lane_edge(track: &Track, side: f64) -> Vec<Vec2> {
    (0..track.len())
        .map(|i| {
            let (hx, hy) = heading_vector(track.heading_at(i));
            // (hy, -hx) points toward increasing heading
            let w = track.waypoints()[i];
            Vec2::new(
                w.x + side * hy * track.half_width(),
                w.y - side * hx * track.half_width(),
            )
        })
        .collect()
}

/// Draws the track with its lane edges and the given overlays as an SVG document.
pub fn render_track_svg(track: &Track, overlays: &[Overlay], v_max: f64) -> String {
    let left = lane_edge(track, -1.0);
    let right = lane_edge(track, 1.0);
    let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in left.iter().chain(&right) {
        min = Vec2::new(min.x.min(p.x), min.y.min(p.y));
        max = Vec2::new(max.x.max(p.x), max.y.max(p.y));
    }
    let canvas = Canvas {
        min: Vec2::new(min.x - MARGIN_M, min.y - MARGIN_M),
        max: Vec2::new(max.x + MARGIN_M, max.y + MARGIN_M),
    };
    let width = (canvas.max.x - canvas.min.x) * PX_PER_M;
    let height = (canvas.max.y - canvas.min.y) * PX_PER_M;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.2} {height:.2}">"#
    );
    let _ = writeln!(svg, r#"<title>{}</title>"#, escape(track.name()));
    let _ = writeln!(
        svg,
        r##"<rect width="100%" height="100%" fill="#ffffff"/>"##
    );
    for edge in [&left, &right] {
        let _ = writeln!(
            svg,
            r##"<polygon class="lane-edge" points="{}" fill="none" stroke="#333333" stroke-width="1.5"/>"##,
            canvas.points(edge)
        );
    }
    let _ = writeln!(
        svg,
        r##"<polygon class="centerline" points="{}" fill="none" stroke="#999999" stroke-width="0.8" stroke-dasharray="4 4"/>"##,
        canvas.points(track.waypoints())
    );
    for &w in track.waypoints() {
        let (x, y) = canvas.px(w);
        let _ = writeln!(
            svg,
            r##"<circle class="waypoint" cx="{x:.2}" cy="{y:.2}" r="1.2" fill="#999999"/>"##
        );
    }
    let (ox, oy) = canvas.px(track.origin());
    let _ = writeln!(
        svg,
        r##"<circle class="origin" cx="{ox:.2}" cy="{oy:.2}" r="4" fill="none" stroke="#0055cc" stroke-width="2"/>"##
    );

    for overlay in overlays {
        match overlay {
            Overlay::Trace(states) => {
                let pts: Vec<Vec2> = states.iter().map(|s| s.position()).collect();
                let _ = writeln!(
                    svg,
                    r##"<polyline class="trace" points="{}" fill="none" stroke="#0055cc" stroke-width="1"/>"##,
                    canvas.points(&pts)
                );
            }
            Overlay::Pair(entry) => {
                draw_state(&mut svg, &canvas, &entry.recoverable_state(), true, v_max);
                draw_state(&mut svg, &canvas, &entry.failing_state(), false, v_max);
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn draw_state(svg: &mut String, canvas: &Canvas, s: &VehicleState, success: bool, v_max: f64) {
    let (x, y) = canvas.px(s.position());
    let r = 3.0;
    let (class, color, path) = if success {
        (
            "success",
            "#1a9e1a",
            format!(
                "M{:.2},{y:.2} H{:.2} M{x:.2},{:.2} V{:.2}",
                x - r,
                x + r,
                y - r,
                y + r
            ),
        )
    } else {
        (
            "failure",
            "#cc2222",
            format!(
                "M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}",
                x - r,
                y - r,
                x + r,
                y + r,
                x - r,
                y + r,
                x + r,
                y - r
            ),
        )
    };
    let _ = writeln!(
        svg,
        r#"<path class="marker {class}" d="{path}" stroke="{color}" stroke-width="1.5"/>"#
    );
    let (hx, hy) = heading_vector(s.psi);
    let len = ARROW_SCALE * s.v / v_max;
    let (tx, ty) = canvas.px(Vec2::new(s.x + hx * len, s.y + hy * len));
    let _ = writeln!(
        svg,
        r#"<line class="arrow {class}" x1="{x:.2}" y1="{y:.2}" x2="{tx:.2}" y2="{ty:.2}" stroke="{color}" stroke-width="1"/>"#
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
