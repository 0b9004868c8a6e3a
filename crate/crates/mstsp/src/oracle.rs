//! Exact desk-scale reference solver. Enumerates every assignment of
//! segments to ordered tours, every visit order, and every direction choice,
//! with admissible pruning only, so its optimum is trusted ground truth for
//! the heuristic and ILP modules.

use crate::error::{Error, Result};
use crate::geometry::{CostMatrix, Direction, Instance, DEPOT_END, DEPOT_START};
use crate::model::{PenaltyConfig, Solution, Tour, Visit, COST_EPS};

/// Hard caps keeping the exhaustive search at desk scale.
#[derive(Clone, Copy, Debug)]
pub struct OracleLimits {
    pub max_segments: usize,
    pub max_tours: usize,
    /// Maximum number of explored search states.
    pub node_budget: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_segments: 8,
            max_tours: 3,
            node_budget: 50_000_000,
        }
    }
}

struct Search<'a> {
    matrix: &'a CostMatrix,
    c_max: f64,
    n_s: usize,
    node_budget: u64,
    nodes: u64,
    best_cost: f64,
    best_tours: Option<Vec<Vec<Visit>>>,
}

impl<'a> Search<'a> {
    /// Depth-first extension of the open (last) tour. Tours are opened in
    /// increasing order of their first segment id, so every multiset of
    /// tours is enumerated exactly once.
    fn explore(
        &mut self,
        used: u64,
        remaining: usize,
        tours: &mut Vec<Vec<Visit>>,
        open_cost: f64,
        closed_total: f64,
        max_tours: usize,
    ) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.node_budget {
            return Err(Error::LimitExceeded(format!(
                "oracle node budget {} exhausted",
                self.node_budget
            )));
        }

        let open = tours.last().expect("open tour always present");
        let last_vertex = open.last().map_or(DEPOT_START, Visit::vertex);
        let open_is_empty = open.is_empty();

        if remaining == 0 {
            let total = open_cost + self.matrix.get(last_vertex, DEPOT_END);
            if total > self.c_max + COST_EPS {
                return Ok(());
            }
            self.offer(closed_total + total, tours);
            return Ok(());
        }

        // Option 1: extend the open tour with any unused segment. A fresh
        // tour (opened by the close branch below) may only start with a
        // segment id above the previous tour's first id.
        let min_first = if open_is_empty && tours.len() >= 2 {
            tours[tours.len() - 2][0].segment_id + 1
        } else {
            1
        };
        for id in 1..=self.n_s as u32 {
            if used & (1 << id) != 0 || id < min_first {
                continue;
            }
            for dir in Direction::BOTH {
                let visit = Visit::new(id, dir);
                let extended = open_cost + self.matrix.get(last_vertex, visit.vertex());
                if extended > self.c_max + COST_EPS {
                    continue;
                }
                if closed_total + extended > self.best_cost + COST_EPS {
                    continue;
                }
                tours.last_mut().unwrap().push(visit);
                self.explore(
                    used | (1 << id),
                    remaining - 1,
                    tours,
                    extended,
                    closed_total,
                    max_tours,
                )?;
                tours.last_mut().unwrap().pop();
            }
        }

        // Option 2: close the open tour and start the next one.
        if !open_is_empty && tours.len() < max_tours {
            let total = open_cost + self.matrix.get(last_vertex, DEPOT_END);
            if total <= self.c_max + COST_EPS && closed_total + total <= self.best_cost + COST_EPS {
                tours.push(Vec::new());
                self.explore(used, remaining, tours, 0.0, closed_total + total, max_tours)?;
                tours.pop();
            }
        }
        Ok(())
    }

    fn offer(&mut self, cost: f64, tours: &[Vec<Visit>]) {
        let better = cost < self.best_cost - COST_EPS;
        let tie = (cost - self.best_cost).abs() <= COST_EPS;
        if better || (tie && self.best_tours.as_deref().is_some_and(|b| tours < b)) {
            self.best_cost = self.best_cost.min(cost);
            self.best_tours = Some(tours.to_vec());
        }
    }
}

fn check_limits(instance: &Instance, n_t: usize, limits: &OracleLimits) -> Result<()> {
    if instance.n_s() > limits.max_segments {
        return Err(Error::LimitExceeded(format!(
            "instance has {} segments, oracle limit is max_segments = {}",
            instance.n_s(),
            limits.max_segments
        )));
    }
    if n_t > limits.max_tours {
        return Err(Error::LimitExceeded(format!(
            "requested {n_t} tours, oracle limit is max_tours = {}",
            limits.max_tours
        )));
    }
    if n_t == 0 {
        return Err(Error::invalid_argument("n_t must be >= 1"));
    }
    Ok(())
}

/// Minimum-total-cost solution using at most `n_t` tours, or `None` when no
/// assignment keeps every tour within `c_max`. Ties resolve to the
/// lexicographically smallest canonical solution.
pub fn exact_solve(
    instance: &Instance,
    matrix: &CostMatrix,
    n_t: usize,
    limits: &OracleLimits,
) -> Result<Option<Solution>> {
    check_limits(instance, n_t, limits)?;
    let mut search = Search {
        matrix,
        c_max: instance.c_max,
        n_s: instance.n_s(),
        node_budget: limits.node_budget,
        nodes: 0,
        best_cost: f64::INFINITY,
        best_tours: None,
    };
    let mut tours = vec![Vec::new()];
    search.explore(0, instance.n_s(), &mut tours, 0.0, 0.0, n_t)?;

    Ok(search.best_tours.map(|tours| {
        let tours = tours
            .into_iter()
            .map(|visits| Tour::new(visits, matrix))
            .collect();
        Solution::new(tours, instance, PenaltyConfig::default())
    }))
}

/// Joint minimization over the tour count: the smallest `n_t` admitting a
/// feasible solution, together with its optimum. `None` when even
/// `limits.max_tours` tours cannot cover the instance.
pub fn exact_min_tours(
    instance: &Instance,
    matrix: &CostMatrix,
    limits: &OracleLimits,
) -> Result<Option<(usize, Solution)>> {
    let cap = limits.max_tours.min(instance.n_s());
    for n_t in 1..=cap {
        if let Some(solution) = exact_solve(instance, matrix, n_t, limits)? {
            return Ok(Some((n_t, solution)));
        }
    }
    Ok(None)
}
