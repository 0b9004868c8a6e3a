//! Instance generation: sampling power-line segments around a depot from
//! pylon survey data, and a synthetic star/line topology generator for
//! benchmarking without real data.
//!
//! Pylon CSV rows are `id,x,y[,z]` in meters. Rows with consecutive ids form
//! a chain of segments; a gap in the id numbering starts a new line, so one
//! file can describe several lines radiating from a substation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{vertex_of_unchecked, DEPOT_END, DEPOT_START};
use crate::geometry::{CostMatrix, Direction, Instance, KinematicLimits, Point, Pylon, Segment};

pub fn parse_pylon_csv(text: &str) -> Result<Vec<Pylon>> {
    let mut pylons = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(Error::invalid_argument(format!(
                "pylon csv line {}: expected id,x,y[,z], got {line:?}",
                lineno + 1
            )));
        }
        let parse = |field: &str, what: &str| -> Result<f64> {
            field.parse::<f64>().map_err(|_| {
                Error::invalid_argument(format!(
                    "pylon csv line {}: cannot parse {what} from {field:?}",
                    lineno + 1
                ))
            })
        };
        let id: u32 = fields[0].parse().map_err(|_| {
            Error::invalid_argument(format!(
                "pylon csv line {}: cannot parse id from {:?}",
                lineno + 1,
                fields[0]
            ))
        })?;
        let x = parse(fields[1], "x")?;
        let y = parse(fields[2], "y")?;
        let z = if fields.len() == 4 {
            parse(fields[3], "z")?
        } else {
            0.0
        };
        pylons.push(Pylon {
            id,
            position: Point::new3(x, y, z),
        });
    }
    if pylons.is_empty() {
        return Err(Error::invalid_argument("pylon csv contains no rows"));
    }
    Ok(pylons)
}

/// A pylon survey plus the line links between pylons.
#[derive(Clone, Debug)]
pub struct PylonField {
    pub pylons: Vec<Pylon>,
    /// Pylon-id pairs connected by a power line.
    pub links: Vec<(u32, u32)>,
}

impl PylonField {
    /// Links derived from the id numbering: consecutive ids chain together,
    /// a gap starts a new line.
    pub fn from_consecutive_ids(pylons: Vec<Pylon>) -> PylonField {
        let mut ids: Vec<u32> = pylons.iter().map(|p| p.id).collect();
        ids.sort_unstable();
        let links = ids
            .windows(2)
            .filter(|w| w[1] == w[0] + 1)
            .map(|w| (w[0], w[1]))
            .collect();
        PylonField { pylons, links }
    }
}

/// Segment membership rule for the sampling radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndpointRule {
    /// Keep a segment when at least one endpoint lies within `d_max`.
    AnyEndpoint,
    /// Keep a segment only when both endpoints lie within `d_max`.
    BothEndpoints,
}

/// Builds an instance from a pylon field, keeping the segments selected by
/// `d_max` around the depot and renumbering them contiguously from 1.
pub fn sample_instance(
    depot: Point,
    depot_end: Option<Point>,
    field: &PylonField,
    d_max: f64,
    rule: EndpointRule,
    limits: KinematicLimits,
    c_max: f64,
) -> Result<Instance> {
    if !d_max.is_finite() || d_max <= 0.0 {
        return Err(Error::invalid_argument(format!(
            "d_max must be > 0, got {d_max}"
        )));
    }
    let position = |id: u32| -> Result<Point> {
        field
            .pylons
            .iter()
            .find(|p| p.id == id)
            .map(|p| p.position)
            .ok_or_else(|| Error::invalid_argument(format!("link references missing pylon {id}")))
    };

    let mut kept: Vec<(u32, u32)> = Vec::new();
    for &(a, b) in &field.links {
        let da = position(a)?.distance(&depot);
        let db = position(b)?.distance(&depot);
        let keep = match rule {
            EndpointRule::AnyEndpoint => da <= d_max || db <= d_max,
            EndpointRule::BothEndpoints => da <= d_max && db <= d_max,
        };
        if keep {
            kept.push((a, b));
        }
    }
    if kept.is_empty() {
        return Err(Error::invalid_argument(format!(
            "no segments selected within d_max = {d_max} m of the depot"
        )));
    }

    let mut used_pylons: Vec<u32> = kept.iter().flat_map(|&(a, b)| [a, b]).collect();
    used_pylons.sort_unstable();
    used_pylons.dedup();
    let pylons: Vec<Pylon> = field
        .pylons
        .iter()
        .filter(|p| used_pylons.contains(&p.id))
        .copied()
        .collect();
    let segments: Vec<Segment> = kept
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| Segment {
            id: k as u32 + 1,
            endpoint_a: a,
            endpoint_b: b,
        })
        .collect();

    let instance = Instance::new(
        depot,
        depot_end,
        pylons,
        segments,
        limits,
        c_max,
        Some(d_max),
    )?;

    // Reject budgets that can never cover the selection, naming the gap.
    let matrix = CostMatrix::build(&instance)?;
    let worst = hardest_single_tour(&instance, &matrix);
    if worst > c_max + 1e-9 {
        return Err(Error::infeasible_instance(format!(
            "c_max = {c_max} s cannot cover the selection; the hardest segment alone needs {worst:.3} s"
        )));
    }
    Ok(instance)
}

fn hardest_single_tour(instance: &Instance, matrix: &CostMatrix) -> f64 {
    (1..=instance.n_s() as u32)
        .map(|id| {
            Direction::BOTH
                .iter()
                .map(|&d| {
                    let v = vertex_of_unchecked(id, d);
                    matrix.get(DEPOT_START, v) + matrix.get(v, DEPOT_END)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Parameters of the synthetic star/line topology generator. The pylon
/// field depends only on these values and the seed, never on the sampling
/// radius, so growing `d_max` can only add segments.
#[derive(Clone, Copy, Debug)]
pub struct SyntheticConfig {
    /// Number of lines radiating from the depot area. 1 gives a single line.
    pub lines: usize,
    pub pylons_per_line: usize,
    /// Range of the first pylon's distance from the depot (m).
    pub first_radius: (f64, f64),
    /// Range of pylon spacing along a line (m).
    pub spacing: (f64, f64),
    /// Heading wiggle per hop (radians).
    pub heading_jitter: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            lines: 6,
            pylons_per_line: 30,
            first_radius: (60.0, 120.0),
            spacing: (60.0, 140.0),
            heading_jitter: 15f64.to_radians(),
            seed: 0,
        }
    }
}

/// Generates a deterministic pylon field and its line links.
pub fn synthetic_pylons(config: &SyntheticConfig) -> Result<PylonField> {
    if config.lines == 0 || config.pylons_per_line < 2 {
        return Err(Error::invalid_argument(
            "synthetic topology needs lines >= 1 and pylons_per_line >= 2",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut pylons = Vec::new();
    let mut links = Vec::new();
    let mut next_id: u32 = 1;

    for line in 0..config.lines {
        let azimuth = std::f64::consts::TAU * line as f64 / config.lines as f64
            + rng.gen_range(-0.5..0.5) * config.heading_jitter;
        let radius = rng.gen_range(config.first_radius.0..=config.first_radius.1);
        let mut at = Point::new(radius * azimuth.cos(), radius * azimuth.sin());
        let first_id = next_id;
        pylons.push(Pylon {
            id: next_id,
            position: at,
        });
        next_id += 1;
        for hop in 1..config.pylons_per_line {
            let heading = azimuth + rng.gen_range(-config.heading_jitter..=config.heading_jitter);
            let step = rng.gen_range(config.spacing.0..=config.spacing.1);
            at = Point::new(at.x + step * heading.cos(), at.y + step * heading.sin());
            pylons.push(Pylon {
                id: next_id,
                position: at,
            });
            links.push((first_id + hop as u32 - 1, first_id + hop as u32));
            next_id += 1;
        }
        // Leave an id gap between lines so consecutive-id chaining cannot
        // bridge them.
        next_id += 1;
    }
    Ok(PylonField { pylons, links })
}

/// Synthetic instance: generate the pylon field and sample it like real data.
pub fn synthetic_instance(
    config: &SyntheticConfig,
    d_max: f64,
    rule: EndpointRule,
    limits: KinematicLimits,
    c_max: f64,
) -> Result<Instance> {
    let field = synthetic_pylons(config)?;
    sample_instance(
        Point::new(0.0, 0.0),
        None,
        &field,
        d_max,
        rule,
        limits,
        c_max,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_parsing_accepts_comments_and_3d_rows() {
        let text = "# survey
1, 10.0, 0.0
2, 110.0, 0.0, 5.0

4, 200.0, 50.0";
        let pylons = parse_pylon_csv(text).unwrap();
        assert_eq!(pylons.len(), 3);
        assert_eq!(pylons[1].position.z, 5.0);
        assert!(parse_pylon_csv("1, 2.0").is_err());
        assert!(parse_pylon_csv("a, 2.0, 3.0").is_err());
        assert!(parse_pylon_csv("").is_err());
    }

    #[test]
    fn consecutive_ids_chain_and_gaps_break() {
        let pylons: Vec<Pylon> = [1u32, 2, 3, 5, 6]
            .iter()
            .map(|&id| Pylon {
                id,
                position: Point::new(id as f64 * 100.0, 0.0),
            })
            .collect();
        let field = PylonField::from_consecutive_ids(pylons);
        assert_eq!(field.links, vec![(1, 2), (2, 3), (5, 6)]);
    }

    #[test]
    fn sampling_keeps_rule_matched_segments_and_renumbers() {
        let pylons: Vec<Pylon> = [1u32, 2, 3, 4]
            .iter()
            .map(|&id| Pylon {
                id,
                position: Point::new(id as f64 * 100.0, 0.0),
            })
            .collect();
        let field = PylonField::from_consecutive_ids(pylons);
        let depot = Point::new(0.0, 0.0);
        let limits = KinematicLimits::default();

        let any = sample_instance(
            depot,
            None,
            &field,
            250.0,
            EndpointRule::AnyEndpoint,
            limits,
            100_000.0,
        )
        .unwrap();
        // (1,2), (2,3) have an endpoint within 250 m; (3,4) does not.
        assert_eq!(any.n_s(), 2);
        assert_eq!(any.segments[0].id, 1);
        assert_eq!(any.segments[1].id, 2);

        let both = sample_instance(
            depot,
            None,
            &field,
            250.0,
            EndpointRule::BothEndpoints,
            limits,
            100_000.0,
        )
        .unwrap();
        assert_eq!(both.n_s(), 1);

        let none = sample_instance(
            depot,
            None,
            &field,
            50.0,
            EndpointRule::AnyEndpoint,
            limits,
            100_000.0,
        );
        assert!(none.unwrap_err().to_string().contains("d_max"));
    }

    #[test]
    fn larger_radius_never_drops_segments() {
        let config = SyntheticConfig {
            seed: 5,
            ..SyntheticConfig::default()
        };
        let mut last = 0;
        for d_max in [300.0, 600.0, 1200.0, 5000.0] {
            let instance = synthetic_instance(
                &config,
                d_max,
                EndpointRule::AnyEndpoint,
                KinematicLimits::default(),
                1e9,
            )
            .unwrap();
            assert!(instance.n_s() >= last, "d_max {d_max} shrank the selection");
            last = instance.n_s();
        }
        // Everything is kept once the radius covers the whole field.
        let config_total = (config.pylons_per_line - 1) * config.lines;
        assert_eq!(last, config_total);
    }

    #[test]
    fn synthetic_generation_is_seed_reproducible() {
        let config = SyntheticConfig {
            seed: 77,
            ..SyntheticConfig::default()
        };
        let a = synthetic_instance(
            &config,
            800.0,
            EndpointRule::AnyEndpoint,
            KinematicLimits::default(),
            1e9,
        )
        .unwrap();
        let b = synthetic_instance(
            &config,
            800.0,
            EndpointRule::AnyEndpoint,
            KinematicLimits::default(),
            1e9,
        )
        .unwrap();
        assert_eq!(a.to_json_string(), b.to_json_string());

        let other = SyntheticConfig { seed: 78, ..config };
        let c = synthetic_instance(
            &other,
            800.0,
            EndpointRule::AnyEndpoint,
            KinematicLimits::default(),
            1e9,
        )
        .unwrap();
        assert_ne!(a.to_json_string(), c.to_json_string());
    }

    #[test]
    fn undersized_budget_is_rejected_with_the_required_time() {
        let config = SyntheticConfig {
            seed: 5,
            ..SyntheticConfig::default()
        };
        let err = synthetic_instance(
            &config,
            1000.0,
            EndpointRule::AnyEndpoint,
            KinematicLimits::default(),
            10.0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("hardest segment"));
    }
}
