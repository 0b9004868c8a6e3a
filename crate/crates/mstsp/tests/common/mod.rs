//! Shared test support: an independent numerical oracle for the velocity
//! profile, small-instance builders, and a brute-force enumerator of the
//! whole solution space.

#![allow(dead_code)]

use mstsp::geometry::{CostMatrix, Direction, Instance, KinematicLimits, Point, Pylon, Segment};
use mstsp::model::{PenaltyConfig, Solution, Tour, Visit};

/// Rest-to-rest travel time found by simulating the bang-bang profile with
/// basic kinematics (x = x0 + v0·t + a·t²/2) and bisection on the phase
/// boundaries. Never uses the closed form under test.
pub fn integrated_profile_time(distance: f64, cruise: f64, accel: f64) -> f64 {
    assert!(distance >= 0.0 && cruise > 0.0 && accel > 0.0);
    if distance == 0.0 {
        return 0.0;
    }
    let step_x = |x: f64, v: f64, a: f64, t: f64| x + v * t + 0.5 * a * t * t;
    let step_v = |v: f64, a: f64, t: f64| v + a * t;
    // Largest t in [0, hi] with f(t) <= 0, for f increasing.
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

    // Phase 1: full acceleration until cruise speed or the braking point,
    // whichever event happens first.
    let braking = |v: f64| v * v / (2.0 * accel);
    let to_cruise = bisect(&|t| step_v(v, accel, t) - cruise, horizon);
    let to_brake = bisect(
        &|t| {
            let xt = step_x(x, v, accel, t);
            let vt = step_v(v, accel, t);
            braking(vt) - (distance - xt)
        },
        horizon,
    );
    let t1 = to_cruise.min(to_brake);
    x = step_x(x, v, accel, t1);
    v = step_v(v, accel, t1);
    total += t1;

    // Phase 2: cruise until the braking point (skipped on triangular legs).
    if to_cruise < to_brake {
        let t2 = bisect(&|t| braking(v) - (distance - step_x(x, v, 0.0, t)), horizon);
        x = step_x(x, v, 0.0, t2);
        total += t2;
    }

    // Phase 3: full deceleration to rest.
    let t3 = bisect(&|t| -step_v(v, -accel, t), horizon);
    x = step_x(x, v, -accel, t3);
    total += t3;

    // The simulation must land on the target; this validates the integrator
    // itself, not the code under test.
    assert!(
        (x - distance).abs() <= 1e-6 * distance.max(1.0),
        "integrator landed at {x} instead of {distance}"
    );
    total
}

pub fn build_instance(
    depot: Point,
    pylons: Vec<(u32, f64, f64)>,
    segments: Vec<(u32, u32, u32)>,
    c_max: f64,
) -> (Instance, CostMatrix) {
    let instance = Instance::new(
        depot,
        None,
        pylons
            .into_iter()
            .map(|(id, x, y)| Pylon {
                id,
                position: Point::new(x, y),
            })
            .collect(),
        segments
            .into_iter()
            .map(|(id, a, b)| Segment {
                id,
                endpoint_a: a,
                endpoint_b: b,
            })
            .collect(),
        KinematicLimits::default(),
        c_max,
        None,
    )
    .unwrap();
    let matrix = CostMatrix::build(&instance).unwrap();
    (instance, matrix)
}

/// Deterministic pseudo-random small instance: `n_s` chained segments with
/// coordinates derived from a simple splitmix stream.
pub fn random_chain_instance(seed: u64, n_s: usize, c_max: f64) -> (Instance, CostMatrix) {
    let mut state = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut next = move || {
        state = state
            .wrapping_mul(0xBF58_476D_1CE4_E5B9)
            .wrapping_add(0x94D0_49BB_1331_11EB);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut pylons = Vec::new();
    let mut at = (40.0 + 80.0 * next(), -60.0 + 120.0 * next());
    pylons.push((1u32, at.0, at.1));
    for k in 0..n_s {
        let angle = next() * std::f64::consts::TAU;
        let len = 40.0 + 90.0 * next();
        at = (at.0 + len * angle.cos(), at.1 + len * angle.sin());
        pylons.push((k as u32 + 2, at.0, at.1));
    }
    let segments: Vec<(u32, u32, u32)> = (0..n_s)
        .map(|k| (k as u32 + 1, k as u32 + 1, k as u32 + 2))
        .collect();
    build_instance(Point::new(0.0, 0.0), pylons, segments, c_max)
}

/// Every distinct solution over the instance: all partitions of segments
/// into at most `max_tours` non-empty ordered tours, all visit orders, and
/// all direction choices.
pub fn enumerate_all_solutions(
    instance: &Instance,
    matrix: &CostMatrix,
    max_tours: usize,
) -> Vec<Solution> {
    let n_s = instance.n_s();
    let segments: Vec<u32> = (1..=n_s as u32).collect();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();

    let mut assignment = vec![0usize; n_s];
    enumerate_assignments(
        &segments,
        &mut assignment,
        0,
        max_tours,
        &mut |assignment| {
            let tour_count = assignment.iter().copied().max().unwrap() + 1;
            let mut groups: Vec<Vec<u32>> = vec![Vec::new(); tour_count];
            for (k, &tour) in assignment.iter().enumerate() {
                groups[tour].push(segments[k]);
            }
            if groups.iter().any(Vec::is_empty) {
                return;
            }
            let ordered: Vec<Vec<Vec<u32>>> = groups.iter().map(|g| permutations(g)).collect();
            cartesian(&ordered, &mut |orders| {
                let dirs_per_tour: Vec<Vec<Vec<Visit>>> = orders
                    .iter()
                    .map(|order| direction_choices(order))
                    .collect();
                cartesian(&dirs_per_tour, &mut |tours| {
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
        },
    );
    out
}

fn enumerate_assignments(
    segments: &[u32],
    assignment: &mut Vec<usize>,
    idx: usize,
    max_tours: usize,
    emit: &mut impl FnMut(&[usize]),
) {
    if idx == segments.len() {
        emit(assignment);
        return;
    }
    for tour in 0..max_tours {
        assignment[idx] = tour;
        enumerate_assignments(segments, assignment, idx + 1, max_tours, emit);
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
    let mut out = Vec::with_capacity(1 << order.len());
    for mask in 0u32..(1 << order.len()) {
        out.push(
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
                .collect(),
        );
    }
    out
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
