//! Physical problem geometry: pylons, power-line segments, UAV kinematic
//! limits, and the asymmetric edge-cost matrix over the direction-expanded
//! visit graph.
//!
//! Each segment `i` (1-based) is represented by two vertices: `2i` for an
//! A→B traversal and `2i+1` for B→A. Vertex 0 is the start depot, vertex 1
//! the termination depot, so a problem with `n_s` segments has `n = 2 + 2·n_s`
//! vertices. Edge costs are flight seconds under a rest-to-rest trapezoidal
//! velocity profile, plus the inspection time of the target segment for every
//! edge that enters a segment vertex.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Index of the start depot vertex.
pub const DEPOT_START: usize = 0;
/// Index of the termination depot vertex.
pub const DEPOT_END: usize = 1;

/// Cost of an edge that must never be traversed. Kept as the IEEE infinity
/// so an accidental use poisons any sum instead of hiding inside it.
pub const INFINITE_COST: f64 = f64::INFINITY;

/// Cartesian point in meters. `z` defaults to 0 for planar instances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y, z: 0.0 }
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Self {
        Point { x, y, z }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.z == 0.0 {
            [self.x, self.y].serialize(serializer)
        } else {
            [self.x, self.y, self.z].serialize(serializer)
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(deserializer)?;
        match coords.as_slice() {
            [x, y] => Ok(Point::new(*x, *y)),
            [x, y, z] => Ok(Point::new3(*x, *y, *z)),
            other => Err(D::Error::custom(format!(
                "expected [x,y] or [x,y,z], got {} coordinates",
                other.len()
            ))),
        }
    }
}

/// UAV flight envelope used to price edges.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KinematicLimits {
    /// Maximum transfer flight speed (m/s).
    pub v_max: f64,
    /// Speed while inspecting along a segment (m/s).
    pub v_insp: f64,
    /// Maximum acceleration magnitude (m/s²).
    pub a_max: f64,
}

impl KinematicLimits {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("v_max", self.v_max),
            ("v_insp", self.v_insp),
            ("a_max", self.a_max),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid_instance(format!(
                    "kinematic limit {name} must be finite and > 0, got {v}"
                )));
            }
        }
        if self.v_insp > self.v_max {
            return Err(Error::invalid_instance(format!(
                "v_insp {} exceeds v_max {}",
                self.v_insp, self.v_max
            )));
        }
        Ok(())
    }
}

impl Default for KinematicLimits {
    /// Defaults used throughout benchmarking: 5 m/s transfer, 1 m/s
    /// inspection, 2.5 m/s² acceleration.
    fn default() -> Self {
        KinematicLimits {
            v_max: 5.0,
            v_insp: 1.0,
            a_max: 2.5,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Pylon {
    pub id: u32,
    #[serde(rename = "pos")]
    pub position: Point,
}

/// A power-line span between two pylons, inspected in one of two directions.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Segment {
    pub id: u32,
    #[serde(rename = "a")]
    pub endpoint_a: u32,
    #[serde(rename = "b")]
    pub endpoint_b: u32,
}

/// Direction in which a segment is traversed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// From `endpoint_a` to `endpoint_b`.
    AB,
    /// From `endpoint_b` to `endpoint_a`.
    BA,
}

impl Direction {
    pub fn flipped(self) -> Direction {
        match self {
            Direction::AB => Direction::BA,
            Direction::BA => Direction::AB,
        }
    }

    /// Both directions, AB first. The AB-first order is the tie-break order
    /// used by all exhaustive scans.
    pub const BOTH: [Direction; 2] = [Direction::AB, Direction::BA];
}

/// Vertex index of a segment visit: `2·id` for AB, `2·id + 1` for BA.
pub fn vertex_of(segment_id: u32, direction: Direction, n_s: usize) -> Result<usize> {
    if segment_id == 0 || segment_id as usize > n_s {
        return Err(Error::invalid_argument(format!(
            "segment id {segment_id} out of range 1..={n_s}"
        )));
    }
    Ok(vertex_of_unchecked(segment_id, direction))
}

#[inline]
pub(crate) fn vertex_of_unchecked(segment_id: u32, direction: Direction) -> usize {
    let base = 2 * segment_id as usize;
    match direction {
        Direction::AB => base,
        Direction::BA => base + 1,
    }
}

/// Inverse of [`vertex_of`]: recovers `(segment_id, direction)` from a
/// segment-visit vertex index.
pub fn segment_of(vertex: usize, n_s: usize) -> Result<(u32, Direction)> {
    if vertex < 2 || vertex >= 2 + 2 * n_s {
        return Err(Error::invalid_argument(format!(
            "vertex {vertex} is not a segment vertex (expected 2..{})",
            2 + 2 * n_s
        )));
    }
    let id = (vertex / 2) as u32;
    let dir = if vertex.is_multiple_of(2) {
        Direction::AB
    } else {
        Direction::BA
    };
    Ok((id, dir))
}

/// Rest-to-rest point-to-point flight time under a trapezoidal velocity
/// profile: accelerate at `accel`, cruise at `cruise`, decelerate at `accel`.
/// Short legs that never reach cruise speed follow the triangular profile.
pub fn travel_time(distance: f64, cruise: f64, accel: f64) -> Result<f64> {
    if !distance.is_finite() || distance < 0.0 {
        return Err(Error::invalid_argument(format!(
            "distance must be finite and >= 0, got {distance}"
        )));
    }
    if !cruise.is_finite() || cruise <= 0.0 {
        return Err(Error::invalid_argument(format!(
            "cruise speed must be finite and > 0, got {cruise}"
        )));
    }
    if !accel.is_finite() || accel <= 0.0 {
        return Err(Error::invalid_argument(format!(
            "acceleration must be finite and > 0, got {accel}"
        )));
    }
    Ok(travel_time_unchecked(distance, cruise, accel))
}

#[inline]
pub(crate) fn travel_time_unchecked(distance: f64, cruise: f64, accel: f64) -> f64 {
    // The cruise speed is reached iff distance >= cruise²/accel.
    let reach = cruise * cruise / accel;
    if distance >= reach {
        distance / cruise + cruise / accel
    } else {
        2.0 * (distance / accel).sqrt()
    }
}

/// A full planning problem: depots, pylons, segments, kinematics, and the
/// per-tour travel budget. Immutable once validated; safe to share across
/// concurrent solver trials.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Instance {
    #[serde(rename = "depot")]
    pub depot_start: Point,
    /// Termination depot. Usually equal to `depot_start`; serialized only
    /// when it differs.
    #[serde(rename = "depot_end", skip_serializing_if = "Option::is_none", default)]
    pub depot_end_override: Option<Point>,
    pub pylons: Vec<Pylon>,
    pub segments: Vec<Segment>,
    pub limits: KinematicLimits,
    pub c_max: f64,
    /// Sampling radius used when the instance was generated. Metadata only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d_max: Option<f64>,
}

impl Instance {
    /// Builds and validates an instance. Segments are normalized to ascending
    /// id order.
    pub fn new(
        depot_start: Point,
        depot_end: Option<Point>,
        pylons: Vec<Pylon>,
        segments: Vec<Segment>,
        limits: KinematicLimits,
        c_max: f64,
        d_max: Option<f64>,
    ) -> Result<Instance> {
        let mut instance = Instance {
            depot_start,
            depot_end_override: depot_end,
            pylons,
            segments,
            limits,
            c_max,
            d_max,
        };
        instance.normalize_and_validate()?;
        Ok(instance)
    }

    pub fn from_json_str(text: &str) -> Result<Instance> {
        let mut instance: Instance = serde_json::from_str(text)?;
        instance.normalize_and_validate()?;
        Ok(instance)
    }

    pub fn from_json_file(path: impl AsRef<std::path::Path>) -> Result<Instance> {
        let text = std::fs::read_to_string(path)?;
        Instance::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("instance serialization");
        out.push('\n');
        out
    }

    pub fn depot_end(&self) -> Point {
        self.depot_end_override.unwrap_or(self.depot_start)
    }

    pub fn n_s(&self) -> usize {
        self.segments.len()
    }

    /// Total vertex count of the direction-expanded graph: `2 + 2·n_s`.
    pub fn vertex_count(&self) -> usize {
        2 + 2 * self.n_s()
    }

    fn normalize_and_validate(&mut self) -> Result<()> {
        self.segments.sort_by_key(|s| s.id);
        self.validate()
    }

    fn validate(&self) -> Result<()> {
        self.limits.validate()?;
        if !self.c_max.is_finite() || self.c_max <= 0.0 {
            return Err(Error::invalid_instance(format!(
                "c_max must be finite and > 0, got {}",
                self.c_max
            )));
        }
        if !self.depot_start.is_finite() || !self.depot_end().is_finite() {
            return Err(Error::invalid_instance("depot coordinates must be finite"));
        }
        if self.segments.is_empty() {
            return Err(Error::invalid_instance("instance has no segments"));
        }

        let mut ids: Vec<u32> = self.pylons.iter().map(|p| p.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid_instance("pylon ids are not unique"));
        }
        if let Some(p) = self.pylons.iter().find(|p| !p.position.is_finite()) {
            return Err(Error::invalid_instance(format!(
                "pylon {} has non-finite coordinates",
                p.id
            )));
        }

        for (k, segment) in self.segments.iter().enumerate() {
            if segment.id as usize != k + 1 {
                return Err(Error::invalid_instance(format!(
                    "segment ids must be contiguous from 1; position {} holds id {}",
                    k + 1,
                    segment.id
                )));
            }
            if segment.endpoint_a == segment.endpoint_b {
                return Err(Error::invalid_instance(format!(
                    "segment {} connects pylon {} to itself",
                    segment.id, segment.endpoint_a
                )));
            }
            let a = self.pylon_position(segment.endpoint_a).ok_or_else(|| {
                Error::invalid_instance(format!(
                    "segment {} references missing pylon {}",
                    segment.id, segment.endpoint_a
                ))
            })?;
            let b = self.pylon_position(segment.endpoint_b).ok_or_else(|| {
                Error::invalid_instance(format!(
                    "segment {} references missing pylon {}",
                    segment.id, segment.endpoint_b
                ))
            })?;
            if a.distance(&b) <= 0.0 {
                return Err(Error::invalid_instance(format!(
                    "segment {} has zero length",
                    segment.id
                )));
            }
        }
        Ok(())
    }

    pub fn pylon_position(&self, id: u32) -> Option<Point> {
        self.pylons.iter().find(|p| p.id == id).map(|p| p.position)
    }

    /// Endpoint positions `(a, b)` for every segment, indexed by `id − 1`.
    pub fn segment_endpoints(&self) -> Vec<(Point, Point)> {
        self.segments
            .iter()
            .map(|s| {
                let a = self
                    .pylon_position(s.endpoint_a)
                    .expect("validated endpoint");
                let b = self
                    .pylon_position(s.endpoint_b)
                    .expect("validated endpoint");
                (a, b)
            })
            .collect()
    }

    pub fn segment_length(&self, segment_id: u32) -> f64 {
        let s = &self.segments[(segment_id - 1) as usize];
        let a = self
            .pylon_position(s.endpoint_a)
            .expect("validated endpoint");
        let b = self
            .pylon_position(s.endpoint_b)
            .expect("validated endpoint");
        a.distance(&b)
    }

    /// Checks that every single segment fits in a one-segment tour within
    /// `c_max`. Instances failing this can never be covered and are rejected.
    pub fn ensure_coverable(&self, matrix: &CostMatrix) -> Result<()> {
        for id in 1..=self.n_s() as u32 {
            let best = Direction::BOTH
                .iter()
                .map(|&d| {
                    let v = vertex_of_unchecked(id, d);
                    matrix.get(DEPOT_START, v) + matrix.get(v, DEPOT_END)
                })
                .fold(f64::INFINITY, f64::min);
            if best > self.c_max + 1e-9 {
                return Err(Error::infeasible_instance(format!(
                    "segment {id} alone needs {best:.3} s, exceeding c_max {} s",
                    self.c_max
                )));
            }
        }
        Ok(())
    }
}

/// Dense asymmetric matrix of edge times (seconds) over the
/// direction-expanded vertex set. Row = from-vertex, column = to-vertex.
/// Unusable arcs hold [`INFINITE_COST`].
#[derive(Clone, Debug)]
pub struct CostMatrix {
    n: usize,
    n_s: usize,
    costs: Vec<f64>,
}

impl CostMatrix {
    pub fn build(instance: &Instance) -> Result<CostMatrix> {
        instance.validate()?;
        let n_s = instance.n_s();
        let n = instance.vertex_count();
        let limits = instance.limits;
        let endpoints = instance.segment_endpoints();
        let depot_end = instance.depot_end();

        // Per-direction entry/exit points and the fixed inspection term.
        let entry = |seg: usize, dir: Direction| match dir {
            Direction::AB => endpoints[seg].0,
            Direction::BA => endpoints[seg].1,
        };
        let exit = |seg: usize, dir: Direction| match dir {
            Direction::AB => endpoints[seg].1,
            Direction::BA => endpoints[seg].0,
        };
        let inspection: Vec<f64> = endpoints
            .iter()
            .map(|(a, b)| travel_time_unchecked(a.distance(b), limits.v_insp, limits.a_max))
            .collect();

        let transfer = |from: Point, to: Point| {
            travel_time_unchecked(from.distance(&to), limits.v_max, limits.a_max)
        };

        // Exit position of each from-vertex; None marks unusable rows.
        let exit_point = |vertex: usize| -> Option<Point> {
            match vertex {
                DEPOT_START => Some(instance.depot_start),
                DEPOT_END => None,
                v => {
                    let seg = v / 2 - 1;
                    let dir = if v % 2 == 0 {
                        Direction::AB
                    } else {
                        Direction::BA
                    };
                    Some(exit(seg, dir))
                }
            }
        };

        let mut costs = vec![INFINITE_COST; n * n];
        for from in 0..n {
            let Some(origin) = exit_point(from) else {
                continue;
            };
            for to in 0..n {
                if to == from || to == DEPOT_START {
                    continue;
                }
                if to == DEPOT_END {
                    costs[from * n + to] = transfer(origin, depot_end);
                    continue;
                }
                let seg = to / 2 - 1;
                // A vertex never connects to its sibling direction vertex.
                if from >= 2 && from / 2 == to / 2 {
                    continue;
                }
                let dir = if to % 2 == 0 {
                    Direction::AB
                } else {
                    Direction::BA
                };
                costs[from * n + to] = transfer(origin, entry(seg, dir)) + inspection[seg];
            }
        }

        Ok(CostMatrix { n, n_s, costs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.costs[from * self.n + to]
    }

    pub fn is_usable(&self, from: usize, to: usize) -> bool {
        self.get(from, to).is_finite()
    }
}
