//! Solution representation and evaluation: tour costing, the soft budget
//! penalty, feasibility checking, and the %PDB / %PDM quality metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    vertex_of_unchecked, CostMatrix, Direction, Instance, DEPOT_END, DEPOT_START,
};

/// Absolute tolerance used when comparing costs, picked to stabilize tie
/// detection between independently computed sums.
pub const COST_EPS: f64 = 1e-9;

/// One segment inspection in a given direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Visit {
    #[serde(rename = "seg")]
    pub segment_id: u32,
    #[serde(rename = "dir")]
    pub direction: Direction,
}

impl Visit {
    pub fn new(segment_id: u32, direction: Direction) -> Visit {
        Visit {
            segment_id,
            direction,
        }
    }

    #[inline]
    pub fn vertex(&self) -> usize {
        vertex_of_unchecked(self.segment_id, self.direction)
    }
}

/// A single depot-to-depot flight with its cached cost.
#[derive(Clone, Debug, Default)]
pub struct Tour {
    pub visits: Vec<Visit>,
    pub cached_cost: f64,
}

impl Tour {
    pub fn new(visits: Vec<Visit>, matrix: &CostMatrix) -> Tour {
        let mut tour = Tour {
            visits,
            cached_cost: 0.0,
        };
        tour.refresh_cost(matrix);
        tour
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }

    pub fn refresh_cost(&mut self, matrix: &CostMatrix) {
        self.cached_cost = tour_cost(self, matrix);
    }
}

/// An ordered collection of tours covering every segment exactly once, with
/// cached plain and penalized totals. Value-like: freely cloned between
/// concurrent trials.
#[derive(Clone, Debug, Default)]
pub struct Solution {
    pub tours: Vec<Tour>,
    pub total_cost: f64,
    pub total_penalized_cost: f64,
}

impl Solution {
    pub fn new(tours: Vec<Tour>, instance: &Instance, penalty: PenaltyConfig) -> Solution {
        let mut solution = Solution {
            tours,
            total_cost: 0.0,
            total_penalized_cost: 0.0,
        };
        solution.refresh_totals(instance.c_max, penalty);
        solution
    }

    /// Recomputes the cached totals from the per-tour cached costs.
    pub fn refresh_totals(&mut self, c_max: f64, penalty: PenaltyConfig) {
        self.total_cost = self.tours.iter().map(|t| t.cached_cost).sum();
        self.total_penalized_cost = self
            .tours
            .iter()
            .map(|t| constrained_cost(t.cached_cost, c_max, penalty))
            .sum();
    }

    /// Count of non-empty tours (the reported `n_t`).
    pub fn tour_count(&self) -> usize {
        self.tours.iter().filter(|t| !t.is_empty()).count()
    }

    /// Drops empty tours. Totals are unaffected when empty tours cost 0;
    /// callers emit only pruned solutions.
    pub fn pruned(&self, c_max: f64, penalty: PenaltyConfig) -> Solution {
        let tours: Vec<Tour> = self
            .tours
            .iter()
            .filter(|t| !t.is_empty())
            .cloned()
            .collect();
        let mut out = Solution {
            tours,
            total_cost: 0.0,
            total_penalized_cost: 0.0,
        };
        out.refresh_totals(c_max, penalty);
        out
    }

    /// Non-empty tours sorted lexicographically by their visit sequences.
    /// Tours of one vehicle are interchangeable and empty tours carry no
    /// work, so this is the identity used for hashing and structural
    /// comparison.
    pub fn canonical_tours(&self) -> Vec<Vec<Visit>> {
        let mut tours: Vec<Vec<Visit>> = self
            .tours
            .iter()
            .filter(|t| !t.is_empty())
            .map(|t| t.visits.clone())
            .collect();
        tours.sort();
        tours
    }

    /// FNV-1a hash of the canonical form. Stable across runs and platforms.
    pub fn canonical_hash(&self) -> u64 {
        const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut hash = FNV_OFFSET;
        let mut eat = |byte: u8| {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(FNV_PRIME);
        };
        for tour in self.canonical_tours() {
            for visit in &tour {
                for b in visit.segment_id.to_le_bytes() {
                    eat(b);
                }
                eat(match visit.direction {
                    Direction::AB => 0,
                    Direction::BA => 1,
                });
            }
            eat(0xff); // tour separator
        }
        hash
    }

    pub fn to_json(&self, instance: &Instance) -> String {
        let pruned: Vec<&Tour> = self.tours.iter().filter(|t| !t.is_empty()).collect();
        let doc = SolutionDoc {
            tours: pruned.iter().map(|t| t.visits.clone()).collect(),
            cost: self.total_cost,
            feasible: pruned
                .iter()
                .all(|t| t.cached_cost <= instance.c_max + COST_EPS),
            per_tour_costs: pruned.iter().map(|t| t.cached_cost).collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("solution serialization");
        out.push('\n');
        out
    }

    /// Parses a solution document and re-costs it against the matrix. The
    /// stored costs in the document are informational only.
    pub fn from_json_str(
        text: &str,
        instance: &Instance,
        matrix: &CostMatrix,
        penalty: PenaltyConfig,
    ) -> Result<Solution> {
        let doc: SolutionDoc = serde_json::from_str(text)?;
        let n_s = instance.n_s();
        for tour in &doc.tours {
            for visit in tour {
                if visit.segment_id == 0 || visit.segment_id as usize > n_s {
                    return Err(Error::invalid_argument(format!(
                        "solution references segment {} outside 1..={n_s}",
                        visit.segment_id
                    )));
                }
            }
        }
        let tours = doc
            .tours
            .into_iter()
            .map(|visits| Tour::new(visits, matrix))
            .collect();
        Ok(Solution::new(tours, instance, penalty))
    }
}

/// On-disk solution document.
#[derive(Serialize, Deserialize)]
struct SolutionDoc {
    tours: Vec<Vec<Visit>>,
    cost: f64,
    feasible: bool,
    per_tour_costs: Vec<f64>,
}

/// Soft budget penalty: overshoot beyond `c_max` is charged `k_c` times.
#[derive(Clone, Copy, Debug)]
pub struct PenaltyConfig {
    pub k_c: f64,
}

impl PenaltyConfig {
    pub fn new(k_c: f64) -> Result<PenaltyConfig> {
        if !k_c.is_finite() || k_c <= 0.0 {
            return Err(Error::invalid_argument(format!(
                "k_c must be > 0, got {k_c}"
            )));
        }
        Ok(PenaltyConfig { k_c })
    }
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig { k_c: 1000.0 }
    }
}

/// Depot-to-depot cost of a tour: out of the start depot, through each visit
/// in order, back to the termination depot. An empty tour costs the direct
/// depot-to-depot arc, which is 0 for coincident depots.
pub fn tour_cost(tour: &Tour, matrix: &CostMatrix) -> f64 {
    let mut prev = DEPOT_START;
    let mut total = 0.0;
    for visit in &tour.visits {
        let v = visit.vertex();
        total += matrix.get(prev, v);
        prev = v;
    }
    total + matrix.get(prev, DEPOT_END)
}

/// Penalized tour cost: `c` when within budget, otherwise
/// `c + (c − c_max)·k_c`.
#[inline]
pub fn constrained_cost(c: f64, c_max: f64, penalty: PenaltyConfig) -> f64 {
    if c <= c_max {
        c
    } else {
        c + (c - c_max) * penalty.k_c
    }
}

/// Percentage deviation of `cost` from a reference cost.
pub fn pdb(cost: f64, ref_cost: f64) -> Result<f64> {
    if !ref_cost.is_finite() || ref_cost <= 0.0 {
        return Err(Error::invalid_argument(format!(
            "reference cost must be > 0, got {ref_cost}"
        )));
    }
    Ok((cost - ref_cost) / ref_cost * 100.0)
}

/// A single constraint violation found by [`check_feasible`]. Violations are
/// data, not errors.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    MissingSegment(u32),
    DuplicatedSegment(u32),
    OverBudget {
        tour: usize,
        cost: f64,
        overshoot: f64,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::MissingSegment(id) => write!(f, "segment {id} is not visited"),
            Violation::DuplicatedSegment(id) => write!(f, "segment {id} is visited more than once"),
            Violation::OverBudget {
                tour,
                cost,
                overshoot,
            } => write!(
                f,
                "tour {tour} costs {cost:.3} s, {overshoot:.3} s over budget"
            ),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a solution against the problem definition: every segment visited
/// exactly once and every tour within the travel budget. Tour costs are
/// recomputed from the matrix rather than trusted from the caches.
pub fn check_feasible(
    solution: &Solution,
    instance: &Instance,
    matrix: &CostMatrix,
) -> FeasibilityReport {
    let n_s = instance.n_s();
    let mut seen = vec![0u32; n_s + 1];
    let mut report = FeasibilityReport::default();

    for (idx, tour) in solution.tours.iter().enumerate() {
        for visit in &tour.visits {
            let id = visit.segment_id as usize;
            if id >= 1 && id <= n_s {
                seen[id] += 1;
            } else {
                report
                    .violations
                    .push(Violation::MissingSegment(visit.segment_id));
            }
        }
        let cost = tour_cost(tour, matrix);
        if cost > instance.c_max + COST_EPS {
            report.violations.push(Violation::OverBudget {
                tour: idx,
                cost,
                overshoot: cost - instance.c_max,
            });
        }
    }
    for (id, &count) in seen.iter().enumerate().skip(1) {
        match count {
            0 => report.violations.push(Violation::MissingSegment(id as u32)),
            1 => {}
            _ => report
                .violations
                .push(Violation::DuplicatedSegment(id as u32)),
        }
    }
    report
}
