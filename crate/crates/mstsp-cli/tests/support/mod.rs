//! Shared support for the CLI and acceptance suites: an independent
//! velocity-profile integrator, a brute-force solution-space enumerator, and
//! the seeded evaluation corpus with oracle references.

#![allow(dead_code)]

use std::sync::OnceLock;
use std::time::Instant;

use mstsp::gen::{synthetic_instance, EndpointRule, SyntheticConfig};
use mstsp::geometry::{CostMatrix, Direction, Instance, KinematicLimits};
use mstsp::grasp::{self, GraspConfig};
use mstsp::model::{PenaltyConfig, Solution, Tour, Visit};
use mstsp::oracle::{exact_min_tours, OracleLimits};

/// Rest-to-rest travel time from simulating the bang-bang profile with basic
/// kinematics and bisection on the phase boundaries; independent of the
/// closed form under test.
pub fn integrated_profile_time(distance: f64, cruise: f64, accel: f64) -> f64 {
    assert!(distance >= 0.0 && cruise > 0.0 && accel > 0.0);
    if distance == 0.0 {
        return 0.0;
    }
    let step_x = |x: f64, v: f64, a: f64, t: f64| x + v * t + 0.5 * a * t * t;
    let step_v = |v: f64, a: f64, t: f64| v + a * t;
    let bisect = |f: &dyn Fn(f64) -> f64, hi: f64| -> f64 {
        let (mut lo, mut hi) = (0.0_f64, hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let mut x = 0.0;
    let mut v = 0.0;
    let mut total = 0.0;
    let horizon = 10.0 * (distance / cruise + cruise / accel + 1.0);
    let braking = |v: f64| v * v / (2.0 * accel);

    let to_cruise = bisect(&|t| step_v(v, accel, t) - cruise, horizon);
    let to_brake = bisect(
        &|t| braking(step_v(v, accel, t)) - (distance - step_x(x, v, accel, t)),
        horizon,
    );
    let t1 = to_cruise.min(to_brake);
    x = step_x(x, v, accel, t1);
    v = step_v(v, accel, t1);
    total += t1;

    if to_cruise < to_brake {
        let t2 = bisect(&|t| braking(v) - (distance - step_x(x, v, 0.0, t)), horizon);
        x = step_x(x, v, 0.0, t2);
        total += t2;
    }

    let t3 = bisect(&|t| -step_v(v, -accel, t), horizon);
    x = step_x(x, v, -accel, t3);
    total += t3;

    assert!(
        (x - distance).abs() <= 1e-6 * distance.max(1.0),
        "integrator landed at {x} instead of {distance}"
    );
    total
}

/// Every distinct solution over the instance: all partitions of segments into
/// at most `max_tours` non-empty ordered tours, all orders, all directions.
pub fn enumerate_all_solutions(
    instance: &Instance,
    matrix: &CostMatrix,
    max_tours: usize,
) -> Vec<Solution> {
    let n_s = instance.n_s();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut assignment = vec![0usize; n_s];
    assignments(&mut assignment, 0, max_tours, &mut |assignment| {
        let tours = assignment.iter().copied().max().unwrap() + 1;
        let mut groups: Vec<Vec<u32>> = vec![Vec::new(); tours];
        for (k, &tour) in assignment.iter().enumerate() {
            groups[tour].push(k as u32 + 1);
        }
        if groups.iter().any(Vec::is_empty) {
            return;
        }
        let ordered: Vec<Vec<Vec<u32>>> = groups.iter().map(|g| permutations(g)).collect();
        cartesian(&ordered, &mut |orders| {
            let directed: Vec<Vec<Vec<Visit>>> = orders
                .iter()
                .map(|order| direction_choices(order))
                .collect();
            cartesian(&directed, &mut |tours| {
                let solution = Solution::new(
                    tours
                        .iter()
                        .map(|v| Tour::new((*v).clone(), matrix))
                        .collect(),
                    instance,
                    PenaltyConfig::default(),
                );
                if seen.insert(solution.canonical_tours()) {
                    out.push(solution);
                }
            });
        });
    });
    out
}

fn assignments(
    assignment: &mut Vec<usize>,
    idx: usize,
    max_tours: usize,
    emit: &mut impl FnMut(&[usize]),
) {
    if idx == assignment.len() {
        emit(assignment);
        return;
    }
    for tour in 0..max_tours {
        assignment[idx] = tour;
        assignments(assignment, idx + 1, max_tours, emit);
    }
}

fn permutations(items: &[u32]) -> Vec<Vec<u32>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (k, &head) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn direction_choices(order: &[u32]) -> Vec<Vec<Visit>> {
    (0u32..(1 << order.len()))
        .map(|mask| {
            order
                .iter()
                .enumerate()
                .map(|(k, &seg)| {
                    let dir = if mask & (1 << k) == 0 {
                        Direction::AB
                    } else {
                        Direction::BA
                    };
                    Visit::new(seg, dir)
                })
                .collect()
        })
        .collect()
}

fn cartesian<'a, T>(choices: &'a [Vec<T>], emit: &mut impl FnMut(&[&'a T])) {
    fn rec<'a, T>(choices: &'a [Vec<T>], picked: &mut Vec<&'a T>, emit: &mut impl FnMut(&[&'a T])) {
        if picked.len() == choices.len() {
            emit(picked);
            return;
        }
        for item in &choices[picked.len()] {
            picked.push(item);
            rec(choices, picked, emit);
            picked.pop();
        }
    }
    rec(choices, &mut Vec::new(), emit);
}

/// One evaluation instance with its exact reference and heuristic results.
pub struct CorpusEntry {
    pub id: usize,
    pub instance: Instance,
    pub matrix: CostMatrix,
    pub oracle_n_t: usize,
    pub oracle_cost: f64,
    pub grasp_best: f64,
    pub grasp_mean: f64,
}

pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
    /// Wall time of oracle + 30-trial GRASP over the whole corpus.
    pub build_seconds: f64,
}

/// 20 seeded instances with 3..6 segments, each feasible within two tours,
/// alternating loose and tight budgets, solved by the oracle and by 30-trial
/// GRASP. Built once and shared by the acceptance criteria.
pub fn corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(build_corpus)
}

fn build_corpus() -> Corpus {
    let started = Instant::now();
    let limits = OracleLimits {
        max_segments: 6,
        max_tours: 2,
        node_budget: 50_000_000,
    };
    let mut entries = Vec::new();
    for id in 0..20usize {
        let (lines, pylons_per_line) = match id % 4 {
            0 => (1, 4), // 3 segments
            1 => (1, 5), // 4
            2 => (1, 6), // 5
            _ => (2, 4), // 6
        };
        let topology = SyntheticConfig {
            lines,
            pylons_per_line,
            seed: 1_000 + id as u64,
            ..SyntheticConfig::default()
        };
        let mut instance = synthetic_instance(
            &topology,
            1e9,
            EndpointRule::AnyEndpoint,
            KinematicLimits::default(),
            1e12,
        )
        .unwrap();
        let matrix = CostMatrix::build(&instance).unwrap();
        let single_total: f64 = (1..=instance.n_s() as u32)
            .map(|seg| {
                Direction::BOTH
                    .iter()
                    .map(|&d| {
                        let v = Visit::new(seg, d).vertex();
                        matrix.get(0, v) + matrix.get(v, 1)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();

        // Alternate loose single-tour budgets with tight ones that force a
        // second tour; bump until the oracle confirms two tours suffice.
        instance.c_max = if id % 2 == 0 {
            single_total
        } else {
            0.55 * single_total
        };
        let (oracle_n_t, oracle) = loop {
            if instance.ensure_coverable(&matrix).is_ok() {
                if let Some(found) = exact_min_tours(&instance, &matrix, &limits).unwrap() {
                    break found;
                }
            }
            instance.c_max += 0.1 * single_total;
        };

        let config = GraspConfig {
            trials: 30,
            seed: 9_000 + id as u64,
            ..GraspConfig::default()
        };
        let (_, report) = grasp::solve(&instance, &matrix, &config, Some(1)).unwrap();
        entries.push(CorpusEntry {
            id,
            instance,
            matrix,
            oracle_n_t,
            oracle_cost: oracle.total_cost,
            grasp_best: report.best_cost,
            grasp_mean: report.mean_cost,
        });
    }
    Corpus {
        entries,
        build_seconds: started.elapsed().as_secs_f64(),
    }
}
