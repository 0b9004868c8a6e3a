//! Heuristic solver: greedy randomized construction (GRP) followed by an
//! adaptive tabu search over four neighborhood moves selected by a weighted
//! roulette wheel, plus the trial/escalation driver that raises the tour
//! count until a budget-feasible solution is found.
//!
//! All comparisons use the penalized cost: a tour over `c_max` is charged
//! `k_c` times its overshoot, so the search is softly steered toward
//! feasibility instead of failing outright.

use std::collections::VecDeque;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CostMatrix, Direction, Instance, DEPOT_END, DEPOT_START};
use crate::model::{constrained_cost, pdb, PenaltyConfig, Solution, Tour, Visit, COST_EPS};

/// Solver parameters. Defaults: RCL 25%, w0 = 5, p1 = 1, p2 = 5, weight
/// reset every 5 iterations, tabu capacity ⌈n_s/4⌉, neighborhood size n_s,
/// stop after 50 non-improving iterations, 30 trials, k_c = 1000.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraspConfig {
    /// Fraction of the proposed insertions kept in the restricted candidate
    /// list (ceiling, minimum 1).
    pub rcl_fraction: f64,
    /// Initial move weight.
    pub w0: f64,
    /// Prize for producing the best candidate of a neighborhood; also added
    /// to move 1 every iteration.
    pub p1: f64,
    /// Prize for improving the global best.
    pub p2: f64,
    /// Iterations between weight resets.
    pub reset_period: usize,
    /// Tabu list capacity; `None` means ⌈n_s/4⌉, minimum 1.
    pub tabu_capacity: Option<usize>,
    /// Candidates generated per iteration; `None` means n_s.
    pub neighborhood_size: Option<usize>,
    /// Stop after this many consecutive iterations without improving the
    /// best solution.
    pub stop_after: usize,
    /// Independent construction+search trials per tour count.
    pub trials: usize,
    /// Soft budget penalty multiplier.
    pub k_c: f64,
    /// Base RNG seed; each trial derives its own stream.
    pub seed: u64,
    /// Worker threads for fanning out trials. Results are identical for any
    /// job count.
    pub jobs: usize,
}

impl Default for GraspConfig {
    fn default() -> Self {
        GraspConfig {
            rcl_fraction: 0.25,
            w0: 5.0,
            p1: 1.0,
            p2: 5.0,
            reset_period: 5,
            tabu_capacity: None,
            neighborhood_size: None,
            stop_after: 50,
            trials: 30,
            k_c: 1000.0,
            seed: 0,
            jobs: 1,
        }
    }
}

impl GraspConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rcl_fraction > 0.0 && self.rcl_fraction <= 1.0) {
            return Err(Error::invalid_argument(format!(
                "rcl_fraction must be in (0, 1], got {}",
                self.rcl_fraction
            )));
        }
        if !self.w0.is_finite() || self.w0 <= 0.0 {
            return Err(Error::invalid_argument("w0 must be > 0"));
        }
        if self.p1 < 0.0 || self.p2 < 0.0 {
            return Err(Error::invalid_argument("prizes must be >= 0"));
        }
        if self.reset_period == 0 || self.stop_after == 0 || self.trials == 0 || self.jobs == 0 {
            return Err(Error::invalid_argument(
                "reset_period, stop_after, trials, and jobs must be >= 1",
            ));
        }
        if self.neighborhood_size == Some(0) || self.tabu_capacity == Some(0) {
            return Err(Error::invalid_argument(
                "neighborhood_size and tabu_capacity must be >= 1",
            ));
        }
        if !self.k_c.is_finite() || self.k_c <= 0.0 {
            return Err(Error::invalid_argument("k_c must be > 0"));
        }
        Ok(())
    }

    pub fn penalty(&self) -> PenaltyConfig {
        PenaltyConfig { k_c: self.k_c }
    }

    pub fn effective_neighborhood(&self, n_s: usize) -> usize {
        self.neighborhood_size.unwrap_or(n_s).max(1)
    }

    pub fn effective_tabu_capacity(&self, n_s: usize) -> usize {
        self.tabu_capacity.unwrap_or_else(|| n_s.div_ceil(4)).max(1)
    }
}

/// Cost evaluation context shared by construction and search.
#[derive(Clone, Copy)]
pub struct Costing<'a> {
    pub matrix: &'a CostMatrix,
    pub c_max: f64,
    pub penalty: PenaltyConfig,
}

impl<'a> Costing<'a> {
    pub fn new(matrix: &'a CostMatrix, instance: &Instance, penalty: PenaltyConfig) -> Self {
        Costing {
            matrix,
            c_max: instance.c_max,
            penalty,
        }
    }

    #[inline]
    pub fn c_con(&self, cost: f64) -> f64 {
        constrained_cost(cost, self.c_max, self.penalty)
    }

    /// Tour cost change from inserting `visit` at `position`.
    #[inline]
    fn insert_delta(&self, tour: &Tour, position: usize, visit: Visit) -> f64 {
        let m = self.matrix;
        let v = visit.vertex();
        let prev = if position == 0 {
            DEPOT_START
        } else {
            tour.visits[position - 1].vertex()
        };
        let next = if position == tour.visits.len() {
            DEPOT_END
        } else {
            tour.visits[position].vertex()
        };
        m.get(prev, v) + m.get(v, next) - m.get(prev, next)
    }

    /// Tour cost change from replacing the visit at `position` with `visit`.
    /// Only valid when the replacement does not neighbor another slot being
    /// changed in the same tour.
    #[inline]
    fn replace_delta(&self, tour: &Tour, position: usize, visit: Visit) -> f64 {
        let m = self.matrix;
        let old = tour.visits[position].vertex();
        let new = visit.vertex();
        let prev = if position == 0 {
            DEPOT_START
        } else {
            tour.visits[position - 1].vertex()
        };
        let next = if position + 1 == tour.visits.len() {
            DEPOT_END
        } else {
            tour.visits[position + 1].vertex()
        };
        m.get(prev, new) + m.get(new, next) - m.get(prev, old) - m.get(old, next)
    }

    fn refresh(&self, solution: &mut Solution, tour_indices: &[usize]) {
        for &idx in tour_indices {
            solution.tours[idx].refresh_cost(self.matrix);
        }
        solution.refresh_totals(self.c_max, self.penalty);
    }
}

/// A proposed placement of a segment into a tour, with the penalized cost of
/// that tour after the insertion.
#[derive(Clone, Copy, Debug)]
pub struct Insertion {
    pub segment_id: u32,
    pub tour_index: usize,
    pub position: usize,
    pub direction: Direction,
    /// Penalized cost of the destination tour after performing the insertion.
    pub resulting_cost: f64,
}

/// Greedy randomized construction: repeatedly enumerate every insertion of
/// every unused segment, keep the cheapest `rcl_fraction` as the restricted
/// candidate list, and apply one of them uniformly at random. The result
/// covers all segments but may exceed the budget (soft constraint only).
pub fn grp_construct(
    instance: &Instance,
    matrix: &CostMatrix,
    n_t: usize,
    config: &GraspConfig,
    rng: &mut impl Rng,
) -> Solution {
    let costing = Costing::new(matrix, instance, config.penalty());
    let mut tours: Vec<Tour> = (0..n_t.max(1))
        .map(|_| Tour::new(Vec::new(), matrix))
        .collect();
    let mut available: Vec<u32> = (1..=instance.n_s() as u32).collect();
    let mut proposed: Vec<Insertion> = Vec::new();

    while !available.is_empty() {
        proposed.clear();
        for &segment_id in &available {
            for (tour_index, tour) in tours.iter().enumerate() {
                for position in 0..=tour.visits.len() {
                    for direction in Direction::BOTH {
                        let visit = Visit::new(segment_id, direction);
                        let cost = tour.cached_cost + costing.insert_delta(tour, position, visit);
                        proposed.push(Insertion {
                            segment_id,
                            tour_index,
                            position,
                            direction,
                            resulting_cost: costing.c_con(cost),
                        });
                    }
                }
            }
        }
        // Stable sort: exact cost ties keep enumeration order
        // (segment, tour, position, AB-first).
        proposed.sort_by(|a, b| a.resulting_cost.partial_cmp(&b.resulting_cost).unwrap());
        let rcl_len = ((config.rcl_fraction * proposed.len() as f64).ceil() as usize)
            .clamp(1, proposed.len());
        let selected = proposed[rng.gen_range(0..rcl_len)];

        let tour = &mut tours[selected.tour_index];
        tour.visits.insert(
            selected.position,
            Visit::new(selected.segment_id, selected.direction),
        );
        tour.refresh_cost(matrix);
        available.retain(|&id| id != selected.segment_id);
    }

    let solution = Solution::new(tours, instance, config.penalty());
    debug_assert!(covers_all(&solution, instance.n_s()));
    solution
}

/// The four neighborhood moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    /// Move 1: relocate a random visit to a random other slot.
    RandomShift,
    /// Move 2: relocate a random visit to its exhaustively best slot.
    BestShift,
    /// Move 3: swap a random visit with its exhaustively best partner.
    BestSwap,
    /// Move 4: flip the direction whose flip is exhaustively best.
    DirectionSwitch,
}

impl Move {
    pub const ALL: [Move; 4] = [
        Move::RandomShift,
        Move::BestShift,
        Move::BestSwap,
        Move::DirectionSwitch,
    ];

    pub fn index(self) -> usize {
        match self {
            Move::RandomShift => 0,
            Move::BestShift => 1,
            Move::BestSwap => 2,
            Move::DirectionSwitch => 3,
        }
    }
}

/// Flattened `(tour, position)` slots in deterministic scan order.
fn visit_slots(solution: &Solution) -> Vec<(usize, usize)> {
    let mut slots = Vec::new();
    for (t, tour) in solution.tours.iter().enumerate() {
        for p in 0..tour.visits.len() {
            slots.push((t, p));
        }
    }
    slots
}

fn covers_all(solution: &Solution, n_s: usize) -> bool {
    let mut seen = vec![false; n_s + 1];
    let mut count = 0;
    for tour in &solution.tours {
        for visit in &tour.visits {
            let id = visit.segment_id as usize;
            if id == 0 || id > n_s || seen[id] {
                return false;
            }
            seen[id] = true;
            count += 1;
        }
    }
    count == n_s
}

/// Applies one move to `current`, returning the mutated candidate. `None`
/// means the move has no legal non-identity target (single-visit swap) and
/// the caller should select another move.
pub fn apply_move(
    current: &Solution,
    mv: Move,
    costing: &Costing,
    rng: &mut impl Rng,
) -> Option<Solution> {
    let slots = visit_slots(current);
    debug_assert!(!slots.is_empty());
    let candidate = match mv {
        Move::RandomShift => random_shift(current, &slots, costing, rng),
        Move::BestShift => best_shift(current, &slots, costing, rng),
        Move::BestSwap => best_swap(current, &slots, costing, rng),
        Move::DirectionSwitch => best_direction_switch(current, &slots, costing),
    };
    if let Some(ref solution) = candidate {
        debug_assert!(covers_all(solution, slots.len()));
    }
    candidate
}

/// Move 1: remove a uniformly random visit, reinsert at a uniformly random
/// `(tour, position, direction)` other than the slot it came from.
fn random_shift(
    current: &Solution,
    slots: &[(usize, usize)],
    costing: &Costing,
    rng: &mut impl Rng,
) -> Option<Solution> {
    let (src_tour, src_pos) = slots[rng.gen_range(0..slots.len())];
    let mut solution = current.clone();
    let visit = solution.tours[src_tour].visits.remove(src_pos);

    let total: usize = solution
        .tours
        .iter()
        .map(|t| (t.visits.len() + 1) * 2)
        .sum::<usize>()
        - 1;
    if total == 0 {
        return None;
    }
    let mut pick = rng.gen_range(0..total);
    for tour_index in 0..solution.tours.len() {
        for position in 0..=solution.tours[tour_index].visits.len() {
            for direction in Direction::BOTH {
                // Skip the origin triple: reinserting there recreates the
                // input solution.
                if tour_index == src_tour && position == src_pos && direction == visit.direction {
                    continue;
                }
                if pick == 0 {
                    solution.tours[tour_index]
                        .visits
                        .insert(position, Visit::new(visit.segment_id, direction));
                    costing.refresh(&mut solution, &[src_tour, tour_index]);
                    return Some(solution);
                }
                pick -= 1;
            }
        }
    }
    unreachable!("pick index within enumerated slot count")
}

/// Move 2: remove a uniformly random visit, reinsert at the slot minimizing
/// the penalized total over an exhaustive scan (the original slot included).
fn best_shift(
    current: &Solution,
    slots: &[(usize, usize)],
    costing: &Costing,
    rng: &mut impl Rng,
) -> Option<Solution> {
    let (src_tour, src_pos) = slots[rng.gen_range(0..slots.len())];
    let mut solution = current.clone();
    let visit = solution.tours[src_tour].visits.remove(src_pos);
    costing.refresh(&mut solution, &[src_tour]);

    let base_penalized = solution.total_penalized_cost;
    let mut best: Option<(f64, usize, usize, Direction)> = None;
    for (tour_index, tour) in solution.tours.iter().enumerate() {
        let tour_penalized = costing.c_con(tour.cached_cost);
        for position in 0..=tour.visits.len() {
            for direction in Direction::BOTH {
                let inserted = Visit::new(visit.segment_id, direction);
                let cost = tour.cached_cost + costing.insert_delta(tour, position, inserted);
                let total = base_penalized - tour_penalized + costing.c_con(cost);
                if best.is_none_or(|(b, ..)| total < b) {
                    best = Some((total, tour_index, position, direction));
                }
            }
        }
    }
    let (_, tour_index, position, direction) = best.expect("at least one insertion slot");
    solution.tours[tour_index]
        .visits
        .insert(position, Visit::new(visit.segment_id, direction));
    costing.refresh(&mut solution, &[tour_index]);
    Some(solution)
}

/// Move 3: swap a uniformly random visit with the partner visit minimizing
/// the penalized total, trying both directions for both moved segments.
fn best_swap(
    current: &Solution,
    slots: &[(usize, usize)],
    costing: &Costing,
    rng: &mut impl Rng,
) -> Option<Solution> {
    if slots.len() < 2 {
        return None;
    }
    let (a_tour, a_pos) = slots[rng.gen_range(0..slots.len())];
    let visit_a = current.tours[a_tour].visits[a_pos];

    let mut best: Option<(f64, usize, usize, Direction, Direction)> = None;
    for &(b_tour, b_pos) in slots {
        if (b_tour, b_pos) == (a_tour, a_pos) {
            continue;
        }
        let visit_b = current.tours[b_tour].visits[b_pos];
        for dir_b in Direction::BOTH {
            for dir_a in Direction::BOTH {
                let new_a = Visit::new(visit_b.segment_id, dir_b);
                let new_b = Visit::new(visit_a.segment_id, dir_a);
                let total = if a_tour == b_tour {
                    let tour = &current.tours[a_tour];
                    let mut visits = tour.visits.clone();
                    visits[a_pos] = new_a;
                    visits[b_pos] = new_b;
                    let cost = recompute_visits_cost(&visits, costing.matrix);
                    current.total_penalized_cost - costing.c_con(tour.cached_cost)
                        + costing.c_con(cost)
                } else {
                    let ta = &current.tours[a_tour];
                    let tb = &current.tours[b_tour];
                    let cost_a = ta.cached_cost + costing.replace_delta(ta, a_pos, new_a);
                    let cost_b = tb.cached_cost + costing.replace_delta(tb, b_pos, new_b);
                    current.total_penalized_cost
                        - costing.c_con(ta.cached_cost)
                        - costing.c_con(tb.cached_cost)
                        + costing.c_con(cost_a)
                        + costing.c_con(cost_b)
                };
                if best.is_none_or(|(b, ..)| total < b) {
                    best = Some((total, b_tour, b_pos, dir_b, dir_a));
                }
            }
        }
    }

    let (_, b_tour, b_pos, dir_b, dir_a) = best?;
    let visit_b = current.tours[b_tour].visits[b_pos];
    let mut solution = current.clone();
    solution.tours[a_tour].visits[a_pos] = Visit::new(visit_b.segment_id, dir_b);
    solution.tours[b_tour].visits[b_pos] = Visit::new(visit_a.segment_id, dir_a);
    costing.refresh(&mut solution, &[a_tour, b_tour]);
    Some(solution)
}

/// Move 4: flip the traversal direction whose flip minimizes the penalized
/// total. With no improving flip available this returns the least-worsening
/// one.
fn best_direction_switch(
    current: &Solution,
    slots: &[(usize, usize)],
    costing: &Costing,
) -> Option<Solution> {
    let mut best: Option<(f64, usize, usize)> = None;
    for &(tour_index, position) in slots {
        let tour = &current.tours[tour_index];
        let visit = tour.visits[position];
        let flipped = Visit::new(visit.segment_id, visit.direction.flipped());
        let cost = tour.cached_cost + costing.replace_delta(tour, position, flipped);
        let total =
            current.total_penalized_cost - costing.c_con(tour.cached_cost) + costing.c_con(cost);
        if best.is_none_or(|(b, ..)| total < b) {
            best = Some((total, tour_index, position));
        }
    }
    let (_, tour_index, position) = best?;
    let mut solution = current.clone();
    let visit = &mut solution.tours[tour_index].visits[position];
    *visit = Visit::new(visit.segment_id, visit.direction.flipped());
    costing.refresh(&mut solution, &[tour_index]);
    Some(solution)
}

fn recompute_visits_cost(visits: &[Visit], matrix: &CostMatrix) -> f64 {
    let mut prev = DEPOT_START;
    let mut total = 0.0;
    for visit in visits {
        let v = visit.vertex();
        total += matrix.get(prev, v);
        prev = v;
    }
    total + matrix.get(prev, DEPOT_END)
}

/// Adaptive move weights for the roulette wheel.
#[derive(Clone, Debug)]
pub struct MoveWeights {
    pub w: [f64; 4],
    pub w0: f64,
    pub p1: f64,
    pub p2: f64,
    pub reset_period: usize,
}

impl MoveWeights {
    pub fn new(config: &GraspConfig) -> MoveWeights {
        MoveWeights {
            w: [config.w0; 4],
            w0: config.w0,
            p1: config.p1,
            p2: config.p2,
            reset_period: config.reset_period,
        }
    }

    /// Roulette-wheel selection with probability `w_i / Σw`.
    pub fn select(&self, rng: &mut impl Rng) -> Move {
        let total: f64 = self.w.iter().sum();
        debug_assert!(total > 0.0);
        let mut ball = rng.gen::<f64>() * total;
        for mv in Move::ALL {
            ball -= self.w[mv.index()];
            if ball < 0.0 {
                return mv;
            }
        }
        Move::DirectionSwitch
    }

    /// Per-iteration weight update: `p1` to the neighborhood's best move,
    /// `p2` to a move that improved the global best, an unconditional `p1`
    /// to move 1, and a reset to `w0` every `reset_period` iterations.
    pub fn update(&mut self, iteration: usize, neighborhood_best: Move, improved: Option<Move>) {
        self.w[neighborhood_best.index()] += self.p1;
        if let Some(mv) = improved {
            self.w[mv.index()] += self.p2;
        }
        self.w[Move::RandomShift.index()] += self.p1;
        if iteration.is_multiple_of(self.reset_period) {
            self.w = [self.w0; 4];
        }
    }
}

/// Mutable state of one tabu-search run.
pub struct SearchState {
    pub current: Solution,
    pub best: Solution,
    pub tabu: VecDeque<u64>,
    pub tabu_capacity: usize,
    pub weights: MoveWeights,
    pub non_improving: usize,
    pub iteration: usize,
}

impl SearchState {
    pub fn new(initial: Solution, weights: MoveWeights, tabu_capacity: usize) -> SearchState {
        let mut state = SearchState {
            best: initial.clone(),
            current: initial,
            tabu: VecDeque::with_capacity(tabu_capacity + 1),
            tabu_capacity: tabu_capacity.max(1),
            weights,
            non_improving: 0,
            iteration: 0,
        };
        let hash = state.current.canonical_hash();
        state.push_tabu(hash);
        state
    }

    pub fn push_tabu(&mut self, hash: u64) {
        self.tabu.push_back(hash);
        while self.tabu.len() > self.tabu_capacity {
            self.tabu.pop_front();
        }
    }

    pub fn is_tabu(&self, hash: u64) -> bool {
        self.tabu.contains(&hash)
    }
}

/// Adaptive tabu search. Each iteration generates `neighborhood_size`
/// candidates by roulette-selected moves applied to the current solution,
/// steps to the best non-tabu candidate (or the best overall when everything
/// is tabu), and updates the move weights. Stops after `stop_after`
/// iterations without improving the best penalized cost.
pub fn tabu_search(
    initial: Solution,
    instance: &Instance,
    matrix: &CostMatrix,
    config: &GraspConfig,
    rng: &mut impl Rng,
) -> Solution {
    let n_s = instance.n_s();
    let costing = Costing::new(matrix, instance, config.penalty());
    let neighborhood = config.effective_neighborhood(n_s);
    let mut state = SearchState::new(
        initial,
        MoveWeights::new(config),
        config.effective_tabu_capacity(n_s),
    );

    let mut candidates: Vec<(Solution, Move, u64)> = Vec::with_capacity(neighborhood);
    while state.non_improving < config.stop_after {
        state.iteration += 1;
        candidates.clear();
        while candidates.len() < neighborhood {
            let mv = state.weights.select(rng);
            if let Some(candidate) = apply_move(&state.current, mv, &costing, rng) {
                let hash = candidate.canonical_hash();
                candidates.push((candidate, mv, hash));
            }
        }

        let neighborhood_best = candidates
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                a.0.total_penalized_cost
                    .total_cmp(&b.0.total_penalized_cost)
            })
            .map(|(i, _)| i)
            .expect("non-empty neighborhood");
        // Best non-tabu candidate; if every candidate is tabu, fall back to
        // the best overall rather than stalling.
        let chosen = candidates
            .iter()
            .enumerate()
            .filter(|(_, (_, _, hash))| !state.is_tabu(*hash))
            .min_by(|(_, a), (_, b)| {
                a.0.total_penalized_cost
                    .total_cmp(&b.0.total_penalized_cost)
            })
            .map(|(i, _)| i)
            .unwrap_or(neighborhood_best);

        let (solution, mv, hash) = candidates.swap_remove(chosen);
        let nb_best_move = if chosen == neighborhood_best {
            mv
        } else if neighborhood_best == candidates.len() {
            // swap_remove moved the last element into `chosen`'s slot.
            candidates[chosen].1
        } else {
            candidates[neighborhood_best].1
        };
        state.current = solution;
        state.push_tabu(hash);

        let improved =
            state.current.total_penalized_cost < state.best.total_penalized_cost - COST_EPS;
        if improved {
            debug_assert!(state.current.total_penalized_cost <= state.best.total_penalized_cost);
            state.best = state.current.clone();
            state.non_improving = 0;
        } else {
            state.non_improving += 1;
        }
        state
            .weights
            .update(state.iteration, nb_best_move, improved.then_some(mv));
    }
    state.best
}

/// Outcome of one independent GRP + tabu-search trial.
#[derive(Clone, Debug)]
pub struct TrialStats {
    pub trial: usize,
    pub cost: f64,
    pub penalized_cost: f64,
    pub feasible: bool,
    pub seconds: f64,
}

/// Aggregate report of a [`solve`] run at the returned tour count.
#[derive(Clone, Debug)]
pub struct SolveReport {
    /// Tour count the trials were run with.
    pub n_t: usize,
    /// Non-empty tours in the returned solution.
    pub reported_tours: usize,
    pub best_cost: f64,
    /// Mean cost over the feasible trials.
    pub mean_cost: f64,
    /// Percentage deviation of the mean from the best trial.
    pub pdm_vs_best: f64,
    pub feasible_trials: usize,
    pub trials: Vec<TrialStats>,
    pub mean_trial_seconds: f64,
    pub total_seconds: f64,
}

/// Starting tour count: total single-segment workload divided by the budget.
/// A pruning heuristic only; never used to declare infeasibility.
pub fn tour_count_lower_bound(instance: &Instance, matrix: &CostMatrix) -> usize {
    let n_s = instance.n_s();
    let total: f64 = (1..=n_s as u32)
        .map(|id| {
            Direction::BOTH
                .iter()
                .map(|&d| {
                    let v = Visit::new(id, d).vertex();
                    matrix.get(DEPOT_START, v) + matrix.get(v, DEPOT_END)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    ((total / instance.c_max).ceil() as usize).clamp(1, n_s)
}

struct TrialOutcome {
    solution: Solution,
    stats: TrialStats,
}

fn run_trial(
    instance: &Instance,
    matrix: &CostMatrix,
    config: &GraspConfig,
    n_t: usize,
    trial: usize,
) -> TrialOutcome {
    let started = Instant::now();
    let mut rng = trial_rng(config.seed, n_t, trial as u64);
    let initial = grp_construct(instance, matrix, n_t, config, &mut rng);
    let solution = tabu_search(initial, instance, matrix, config, &mut rng);
    finish_trial(solution, instance, trial, started)
}

fn finish_trial(
    solution: Solution,
    instance: &Instance,
    trial: usize,
    started: Instant,
) -> TrialOutcome {
    let feasible = solution
        .tours
        .iter()
        .all(|t| t.cached_cost <= instance.c_max + COST_EPS);
    let stats = TrialStats {
        trial,
        cost: solution.total_cost,
        penalized_cost: solution.total_penalized_cost,
        feasible,
        seconds: started.elapsed().as_secs_f64(),
    };
    TrialOutcome { solution, stats }
}

/// Independent per-trial RNG stream derived from the base seed, the tour
/// count, and the trial index, so results do not depend on thread scheduling.
fn trial_rng(seed: u64, n_t: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n_t as u64) << 32) | trial);
    rng
}

fn run_all_trials(
    instance: &Instance,
    matrix: &CostMatrix,
    config: &GraspConfig,
    n_t: usize,
) -> Vec<TrialOutcome> {
    let trials = config.trials;
    if config.jobs <= 1 || trials <= 1 {
        return (0..trials)
            .map(|t| run_trial(instance, matrix, config, n_t, t))
            .collect();
    }

    let next = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<std::sync::Mutex<Option<TrialOutcome>>> =
        (0..trials).map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..config.jobs.min(trials) {
            scope.spawn(|| loop {
                let trial = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if trial >= trials {
                    break;
                }
                let outcome = run_trial(instance, matrix, config, n_t, trial);
                *results[trial].lock().unwrap() = Some(outcome);
            });
        }
    });
    results
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("trial completed"))
        .collect()
}

/// Full solver driver: starting from `n_t_hint` (or the workload bound),
/// runs `trials` independent GRP + tabu-search trials and returns the best
/// feasible solution found, escalating the tour count until one exists.
/// Empty tours are pruned from the returned solution.
pub fn solve(
    instance: &Instance,
    matrix: &CostMatrix,
    config: &GraspConfig,
    n_t_hint: Option<usize>,
) -> Result<(Solution, SolveReport)> {
    config.validate()?;
    instance.ensure_coverable(matrix)?;
    let n_s = instance.n_s();
    let started = Instant::now();
    let start_n_t = n_t_hint.unwrap_or_else(|| tour_count_lower_bound(instance, matrix));
    let start_n_t = start_n_t.clamp(1, n_s);

    for n_t in start_n_t..=n_s {
        let mut outcomes = run_all_trials(instance, matrix, config, n_t);

        if n_t == n_s && !outcomes.iter().any(|o| o.stats.feasible) {
            // One segment per tour is feasible by instance validation; polish
            // it with a deterministic extra trial so the escalation cap can
            // always return a feasible solution.
            let trial_started = Instant::now();
            let mut rng = trial_rng(config.seed, n_t, config.trials as u64);
            let trivial = trivial_solution(instance, matrix, config);
            let polished = tabu_search(trivial.clone(), instance, matrix, config, &mut rng);
            let outcome = finish_trial(polished, instance, config.trials, trial_started);
            outcomes.push(if outcome.stats.feasible {
                outcome
            } else {
                finish_trial(trivial, instance, config.trials, trial_started)
            });
        }

        let feasible: Vec<&TrialOutcome> = outcomes.iter().filter(|o| o.stats.feasible).collect();
        if feasible.is_empty() {
            continue;
        }

        let best = feasible
            .iter()
            .min_by(|a, b| a.stats.cost.total_cmp(&b.stats.cost))
            .expect("nonempty feasible set");
        let best_cost = best.stats.cost;
        let mean_cost = feasible.iter().map(|o| o.stats.cost).sum::<f64>() / feasible.len() as f64;
        let solution = best.solution.pruned(instance.c_max, config.penalty());
        let trials: Vec<TrialStats> = outcomes.iter().map(|o| o.stats.clone()).collect();
        let mean_trial_seconds =
            trials.iter().map(|t| t.seconds).sum::<f64>() / trials.len() as f64;
        let report = SolveReport {
            n_t,
            reported_tours: solution.tour_count(),
            best_cost,
            mean_cost,
            pdm_vs_best: pdb(mean_cost, best_cost).unwrap_or(0.0),
            feasible_trials: feasible.len(),
            trials,
            mean_trial_seconds,
            total_seconds: started.elapsed().as_secs_f64(),
        };
        return Ok((solution, report));
    }
    unreachable!("escalation always terminates with the trivial fallback")
}

/// One segment per tour, each in its cheaper direction. Feasible whenever
/// the instance passed the coverability check.
fn trivial_solution(instance: &Instance, matrix: &CostMatrix, config: &GraspConfig) -> Solution {
    let tours: Vec<Tour> = (1..=instance.n_s() as u32)
        .map(|id| {
            let pick = Direction::BOTH
                .into_iter()
                .min_by(|&a, &b| {
                    let cost = |d: Direction| {
                        let v = Visit::new(id, d).vertex();
                        matrix.get(DEPOT_START, v) + matrix.get(v, DEPOT_END)
                    };
                    cost(a).total_cmp(&cost(b))
                })
                .unwrap();
            Tour::new(vec![Visit::new(id, pick)], matrix)
        })
        .collect();
    Solution::new(tours, instance, config.penalty())
}
