//! Route rendering: SVG plots and GeoJSON documents. Coordinates are the
//! instance's planar Cartesian frame (meters), not longitude/latitude.

use mstsp::geometry::{Direction, Instance, Point};
use mstsp::model::Solution;
use serde_json::json;

/// Tour colors, assigned by tour index (cycling).
const PALETTE: [&str; 10] = [
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#46f0f0", "#f032e6", "#bcf60c",
    "#008080", "#9a6324",
];

pub fn tour_color(index: usize) -> &'static str {
    PALETTE[index % PALETTE.len()]
}

/// Waypoints of one tour: depot, then entry and exit of each visited
/// segment, then the termination depot.
fn tour_waypoints(instance: &Instance, tour: &mstsp::model::Tour) -> Vec<Point> {
    let endpoints = instance.segment_endpoints();
    let mut points = vec![instance.depot_start];
    for visit in &tour.visits {
        let (a, b) = endpoints[(visit.segment_id - 1) as usize];
        match visit.direction {
            Direction::AB => {
                points.push(a);
                points.push(b);
            }
            Direction::BA => {
                points.push(b);
                points.push(a);
            }
        }
    }
    points.push(instance.depot_end());
    points
}

pub fn solution_to_svg(instance: &Instance, solution: &Solution) -> String {
    let endpoints = instance.segment_endpoints();
    let mut min = (f64::INFINITY, f64::INFINITY);
    let mut max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |p: &Point| {
        min.0 = min.0.min(p.x);
        min.1 = min.1.min(p.y);
        max.0 = max.0.max(p.x);
        max.1 = max.1.max(p.y);
    };
    grow(&instance.depot_start);
    grow(&instance.depot_end());
    for (a, b) in &endpoints {
        grow(a);
        grow(b);
    }
    let span = ((max.0 - min.0).max(1.0), (max.1 - min.1).max(1.0));
    let margin = 0.06 * span.0.max(span.1);
    let width = 800.0;
    let scale = width / (span.0 + 2.0 * margin);
    let height = (span.1 + 2.0 * margin) * scale;
    let sx = |x: f64| (x - min.0 + margin) * scale;
    // SVG y grows downward.
    let sy = |y: f64| height - (y - min.1 + margin) * scale;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    out.push_str("  <g stroke=\"#b0b0b0\" stroke-width=\"4\" stroke-linecap=\"round\">\n");
    for (a, b) in &endpoints {
        out.push_str(&format!(
            "    <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\"/>\n",
            sx(a.x),
            sy(a.y),
            sx(b.x),
            sy(b.y)
        ));
    }
    out.push_str("  </g>\n");

    for (index, tour) in solution.tours.iter().filter(|t| !t.is_empty()).enumerate() {
        let points: Vec<String> = tour_waypoints(instance, tour)
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p.x), sy(p.y)))
            .collect();
        out.push_str(&format!(
            "  <polyline class=\"route\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\" \
             points=\"{}\"/>\n",
            tour_color(index),
            points.join(" ")
        ));
    }

    out.push_str(&format!(
        "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"#000\"/>\n",
        sx(instance.depot_start.x),
        sy(instance.depot_start.y)
    ));
    out.push_str("</svg>\n");
    out
}

pub fn solution_to_geojson(instance: &Instance, solution: &Solution) -> String {
    let endpoints = instance.segment_endpoints();
    let mut features = Vec::new();
    for segment in &instance.segments {
        let (a, b) = endpoints[(segment.id - 1) as usize];
        features.push(json!({
            "type": "Feature",
            "geometry": {
                "type": "LineString",
                "coordinates": [[a.x, a.y], [b.x, b.y]],
            },
            "properties": {"kind": "segment", "id": segment.id},
        }));
    }
    for (index, tour) in solution.tours.iter().filter(|t| !t.is_empty()).enumerate() {
        let coordinates: Vec<[f64; 2]> = tour_waypoints(instance, tour)
            .iter()
            .map(|p| [p.x, p.y])
            .collect();
        features.push(json!({
            "type": "Feature",
            "geometry": {
                "type": "LineString",
                "coordinates": coordinates,
            },
            "properties": {
                "kind": "route",
                "tour": index,
                "cost": tour.cached_cost,
                "stroke": tour_color(index),
            },
        }));
    }
    let doc = json!({
        "type": "FeatureCollection",
        "features": features,
    });
    let mut out = serde_json::to_string_pretty(&doc).expect("geojson serialization");
    out.push('\n');
    out
}
