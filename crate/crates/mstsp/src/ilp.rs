//! Integer-linear-programming formulation of the inspection problem:
//! binary edge-traversal variables `x_{m,i,j}` per tour, integer traversal
//! order variables `t_{m,i}`, the minimum-total-cost objective, and the
//! seven constraint groups (tour start/end, set in/out coverage, flow
//! conservation, per-tour budget, Miller-Tucker-Zemlin subtour elimination).
//!
//! The module builds the model explicitly, exports it in the LP text
//! interchange format for off-the-shelf MIP solvers, and audits candidate
//! assignments row by row. Solving at desk scale is the oracle's job; no
//! MIP solver is embedded.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{segment_of, CostMatrix, Instance, DEPOT_END, DEPOT_START};
use crate::model::{Solution, Visit};

/// Binary edge-traversal variable `x_{m,i,j}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct XVar {
    pub m: usize,
    pub i: usize,
    pub j: usize,
}

/// Integer traversal-order variable `t_{m,i}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TVar {
    pub m: usize,
    pub i: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VarRef {
    X(XVar),
    T(TVar),
}

impl VarRef {
    fn name(&self) -> String {
        match self {
            VarRef::X(x) => format!("x_{}_{}_{}", x.m, x.i, x.j),
            VarRef::T(t) => format!("t_{}_{}", t.m, t.i),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowOp {
    Eq,
    Le,
}

/// One materialized linear constraint.
#[derive(Clone, Debug)]
pub struct LinearRow {
    pub name: String,
    pub terms: Vec<(VarRef, f64)>,
    pub op: RowOp,
    pub rhs: f64,
}

/// Constraint family tags, one per equation of the formulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupTag {
    /// Each tour departs the start depot exactly once.
    Start,
    /// Each tour arrives at the termination depot exactly once.
    End,
    /// Each segment's vertex pair is exited exactly once across all tours.
    SetIn,
    /// Each segment's vertex pair is entered exactly once across all tours.
    SetOut,
    /// Entering a segment vertex implies leaving it, per tour.
    Flow,
    /// Per-tour travel budget.
    Budget,
    /// Miller-Tucker-Zemlin ordering over segment vertices, per tour.
    Mtz,
}

impl GroupTag {
    pub const ALL: [GroupTag; 7] = [
        GroupTag::Start,
        GroupTag::End,
        GroupTag::SetIn,
        GroupTag::SetOut,
        GroupTag::Flow,
        GroupTag::Budget,
        GroupTag::Mtz,
    ];

    /// Equation number of the group in the formulation (2 through 8).
    pub fn equation(&self) -> u8 {
        match self {
            GroupTag::Start => 2,
            GroupTag::End => 3,
            GroupTag::SetIn => 4,
            GroupTag::SetOut => 5,
            GroupTag::Flow => 6,
            GroupTag::Budget => 7,
            GroupTag::Mtz => 8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConstraintGroup {
    pub tag: GroupTag,
    pub rows: Vec<LinearRow>,
}

/// The fully materialized model: `n_t·n²` binaries, `n_t·n` integers, the
/// objective, and every constraint row. Immutable once built.
#[derive(Clone, Debug)]
pub struct IlpModel {
    pub n_t: usize,
    pub n: usize,
    pub n_s: usize,
    pub c_max: f64,
    pub allow_empty_tours: bool,
    /// Objective terms over the usable x variables, in (m, i, j) order.
    pub objective: Vec<(XVar, f64)>,
    pub groups: Vec<ConstraintGroup>,
    /// Unusable arcs whose x variables are pinned to zero.
    pub fixed_zero: Vec<XVar>,
    /// Arc costs copied from the cost matrix (row-major, +inf on sentinels).
    arc_costs: Vec<f64>,
}

impl IlpModel {
    pub fn group(&self, tag: GroupTag) -> &ConstraintGroup {
        self.groups
            .iter()
            .find(|g| g.tag == tag)
            .expect("all groups present")
    }

    pub fn binary_count(&self) -> usize {
        self.n_t * self.n * self.n
    }

    pub fn integer_count(&self) -> usize {
        self.n_t * self.n
    }

    fn arc_cost(&self, i: usize, j: usize) -> f64 {
        self.arc_costs[i * self.n + j]
    }

    /// Whether the arc `(i, j)` has a usable x variable in this model.
    fn arc_usable(&self, i: usize, j: usize) -> bool {
        if i == DEPOT_START && j == DEPOT_END {
            self.allow_empty_tours
        } else {
            self.arc_cost(i, j).is_finite()
        }
    }

    /// Objective cost of the arc: the matrix entry, except the explicit
    /// empty-tour arc which is free.
    fn model_cost(&self, i: usize, j: usize) -> f64 {
        if i == DEPOT_START && j == DEPOT_END {
            0.0
        } else {
            self.arc_cost(i, j)
        }
    }
}

/// Dense variable assignment checked by [`verify`].
#[derive(Clone, Debug)]
pub struct IlpAssignment {
    pub n_t: usize,
    pub n: usize,
    x: Vec<bool>,
    t: Vec<i64>,
}

impl IlpAssignment {
    pub fn zero(n_t: usize, n: usize) -> IlpAssignment {
        IlpAssignment {
            n_t,
            n,
            x: vec![false; n_t * n * n],
            t: vec![0; n_t * n],
        }
    }

    #[inline]
    pub fn x(&self, m: usize, i: usize, j: usize) -> bool {
        self.x[(m * self.n + i) * self.n + j]
    }

    pub fn set_x(&mut self, m: usize, i: usize, j: usize, value: bool) {
        self.x[(m * self.n + i) * self.n + j] = value;
    }

    #[inline]
    pub fn t(&self, m: usize, i: usize) -> i64 {
        self.t[m * self.n + i]
    }

    pub fn set_t(&mut self, m: usize, i: usize, value: i64) {
        self.t[m * self.n + i] = value;
    }

    fn value(&self, var: &VarRef) -> f64 {
        match var {
            VarRef::X(x) => self.x(x.m, x.i, x.j) as u8 as f64,
            VarRef::T(t) => self.t(t.m, t.i) as f64,
        }
    }
}

/// Builds the model for `n_t` tours over the given instance. With
/// `allow_empty_tours` the direct depot-to-depot arc is added at zero cost so
/// unused tours stay feasible; the default (off) matches the strict
/// formulation in which every tour must depart.
pub fn build_model(
    instance: &Instance,
    matrix: &CostMatrix,
    n_t: usize,
    allow_empty_tours: bool,
) -> Result<IlpModel> {
    if n_t == 0 {
        return Err(Error::invalid_argument("n_t must be >= 1"));
    }
    let n = matrix.n();
    let n_s = matrix.n_s();
    let mut model = IlpModel {
        n_t,
        n,
        n_s,
        c_max: instance.c_max,
        allow_empty_tours,
        objective: Vec::new(),
        groups: Vec::new(),
        fixed_zero: Vec::new(),
        arc_costs: (0..n * n).map(|k| matrix.get(k / n, k % n)).collect(),
    };

    for m in 0..n_t {
        for i in 0..n {
            for j in 0..n {
                let var = XVar { m, i, j };
                if model.arc_usable(i, j) {
                    model.objective.push((var, model.model_cost(i, j)));
                } else {
                    model.fixed_zero.push(var);
                }
            }
        }
    }

    let x = |m, i, j| VarRef::X(XVar { m, i, j });
    let t = |m, i| VarRef::T(TVar { m, i });

    // Start: each tour leaves the start depot exactly once.
    let mut start_rows = Vec::with_capacity(n_t);
    for m in 0..n_t {
        let mut terms: Vec<(VarRef, f64)> = (2..n).map(|i| (x(m, DEPOT_START, i), 1.0)).collect();
        if allow_empty_tours {
            terms.push((x(m, DEPOT_START, DEPOT_END), 1.0));
        }
        start_rows.push(LinearRow {
            name: format!("start_m{m}"),
            terms,
            op: RowOp::Eq,
            rhs: 1.0,
        });
    }

    // End: each tour reaches the termination depot exactly once.
    let mut end_rows = Vec::with_capacity(n_t);
    for m in 0..n_t {
        let mut terms: Vec<(VarRef, f64)> = (2..n).map(|i| (x(m, i, DEPOT_END), 1.0)).collect();
        if allow_empty_tours {
            terms.push((x(m, DEPOT_START, DEPOT_END), 1.0));
        }
        end_rows.push(LinearRow {
            name: format!("end_m{m}"),
            terms,
            op: RowOp::Eq,
            rhs: 1.0,
        });
    }

    // SetIn / SetOut: each segment's vertex pair exited and entered exactly
    // once across all tours.
    let mut set_in_rows = Vec::with_capacity(n_s);
    let mut set_out_rows = Vec::with_capacity(n_s);
    for seg in 1..=n_s {
        let (even, odd) = (2 * seg, 2 * seg + 1);
        let mut out_terms = Vec::new();
        let mut in_terms = Vec::new();
        for m in 0..n_t {
            for other in 0..n {
                for src in [even, odd] {
                    if model.arc_usable(src, other) {
                        out_terms.push((x(m, src, other), 1.0));
                    }
                    if model.arc_usable(other, src) {
                        in_terms.push((x(m, other, src), 1.0));
                    }
                }
            }
        }
        set_in_rows.push(LinearRow {
            name: format!("set_in_s{seg}"),
            terms: out_terms,
            op: RowOp::Eq,
            rhs: 1.0,
        });
        set_out_rows.push(LinearRow {
            name: format!("set_out_s{seg}"),
            terms: in_terms,
            op: RowOp::Eq,
            rhs: 1.0,
        });
    }

    // Flow: per tour, a visited segment vertex is entered and left equally.
    let mut flow_rows = Vec::with_capacity(n_t * (n - 2));
    for m in 0..n_t {
        for j in 2..n {
            let mut terms = Vec::new();
            for i in 0..n {
                if model.arc_usable(i, j) {
                    terms.push((x(m, i, j), 1.0));
                }
                if model.arc_usable(j, i) {
                    terms.push((x(m, j, i), -1.0));
                }
            }
            flow_rows.push(LinearRow {
                name: format!("flow_m{m}_v{j}"),
                terms,
                op: RowOp::Eq,
                rhs: 0.0,
            });
        }
    }

    // Budget: per-tour travel time within c_max.
    let mut budget_rows = Vec::with_capacity(n_t);
    for m in 0..n_t {
        let terms: Vec<(VarRef, f64)> = model
            .objective
            .iter()
            .filter(|(v, _)| v.m == m)
            .map(|(v, c)| (VarRef::X(*v), *c))
            .collect();
        budget_rows.push(LinearRow {
            name: format!("budget_m{m}"),
            terms,
            op: RowOp::Le,
            rhs: instance.c_max,
        });
    }

    // MTZ subtour elimination over ordered pairs of segment vertices:
    // t_i − t_j + n·x_{m,i,j} ≤ n − 1.
    let mut mtz_rows = Vec::with_capacity(n_t * (n - 2) * (n - 3));
    for m in 0..n_t {
        for i in 2..n {
            for j in 2..n {
                if i == j {
                    continue;
                }
                let mut terms = vec![(t(m, i), 1.0), (t(m, j), -1.0)];
                if model.arc_usable(i, j) {
                    terms.push((x(m, i, j), n as f64));
                }
                mtz_rows.push(LinearRow {
                    name: format!("mtz_m{m}_i{i}_j{j}"),
                    terms,
                    op: RowOp::Le,
                    rhs: (n - 1) as f64,
                });
            }
        }
    }

    model.groups = vec![
        ConstraintGroup {
            tag: GroupTag::Start,
            rows: start_rows,
        },
        ConstraintGroup {
            tag: GroupTag::End,
            rows: end_rows,
        },
        ConstraintGroup {
            tag: GroupTag::SetIn,
            rows: set_in_rows,
        },
        ConstraintGroup {
            tag: GroupTag::SetOut,
            rows: set_out_rows,
        },
        ConstraintGroup {
            tag: GroupTag::Flow,
            rows: flow_rows,
        },
        ConstraintGroup {
            tag: GroupTag::Budget,
            rows: budget_rows,
        },
        ConstraintGroup {
            tag: GroupTag::Mtz,
            rows: mtz_rows,
        },
    ];
    Ok(model)
}

/// A violated row (or pinned variable) with its slack.
#[derive(Clone, Debug)]
pub struct RowViolation {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; negative for exceeded ≤ rows.
    pub slack: f64,
}

const ROW_TOL: f64 = 1e-6;

/// Evaluates every constraint row against the assignment and returns the
/// violated ones. An empty list means the assignment is ILP-feasible. The
/// decoded tours are additionally cross-checked against the plain tour-based
/// feasibility rules; any disagreement is reported as a `consistency` entry.
pub fn verify(model: &IlpModel, assignment: &IlpAssignment) -> Result<Vec<RowViolation>> {
    if assignment.n_t != model.n_t || assignment.n != model.n {
        return Err(Error::DimensionMismatch(format!(
            "assignment is {}x{} vertices, model needs {}x{}",
            assignment.n_t, assignment.n, model.n_t, model.n
        )));
    }
    let mut violations = Vec::new();

    for var in &model.fixed_zero {
        if assignment.x(var.m, var.i, var.j) {
            violations.push(RowViolation {
                name: format!("fixed_{}", VarRef::X(*var).name()),
                lhs: 1.0,
                rhs: 0.0,
                slack: -1.0,
            });
        }
    }

    for group in &model.groups {
        for row in &group.rows {
            let lhs: f64 = row.terms.iter().map(|(v, c)| c * assignment.value(v)).sum();
            let violated = match row.op {
                RowOp::Eq => (lhs - row.rhs).abs() > ROW_TOL,
                RowOp::Le => lhs > row.rhs + ROW_TOL,
            };
            if violated {
                violations.push(RowViolation {
                    name: row.name.clone(),
                    lhs,
                    rhs: row.rhs,
                    slack: row.rhs - lhs,
                });
            }
        }
    }

    // Cross-formulation consistency: an ILP-feasible assignment must decode
    // to tours that satisfy the plain coverage and budget rules.
    if violations.is_empty() {
        match decode_assignment(model, assignment) {
            Some(tours) => {
                let mut seen = vec![false; model.n_s + 1];
                let mut consistent = true;
                for tour in &tours {
                    let mut cost = 0.0;
                    let mut prev = DEPOT_START;
                    for visit in tour {
                        let id = visit.segment_id as usize;
                        if seen[id] {
                            consistent = false;
                        }
                        seen[id] = true;
                        cost += model.arc_cost(prev, visit.vertex());
                        prev = visit.vertex();
                    }
                    if !tour.is_empty() {
                        cost += model.arc_cost(prev, DEPOT_END);
                        if cost > model.c_max + ROW_TOL {
                            consistent = false;
                        }
                    }
                }
                if !seen[1..].iter().all(|&s| s) {
                    consistent = false;
                }
                if !consistent {
                    violations.push(RowViolation {
                        name: "consistency".into(),
                        lhs: 1.0,
                        rhs: 0.0,
                        slack: -1.0,
                    });
                }
            }
            None => violations.push(RowViolation {
                name: "consistency".into(),
                lhs: 1.0,
                rhs: 0.0,
                slack: -1.0,
            }),
        }
    }
    Ok(violations)
}

/// Encodes tours as an (X, T) assignment: arcs along each tour including the
/// depot legs, and 1-based visit positions in T (unvisited vertices hold 0).
/// Tours beyond `solution.tours.len()` stay all-zero.
pub fn encode_solution(solution: &Solution, n_s: usize, n_t: usize) -> Result<IlpAssignment> {
    let non_empty: Vec<&Vec<Visit>> = solution
        .tours
        .iter()
        .filter(|t| !t.is_empty())
        .map(|t| &t.visits)
        .collect();
    if non_empty.len() > n_t {
        return Err(Error::invalid_argument(format!(
            "solution has {} non-empty tours, model allows {n_t}",
            non_empty.len()
        )));
    }
    let n = 2 + 2 * n_s;
    let mut assignment = IlpAssignment::zero(n_t, n);
    for (m, visits) in non_empty.iter().enumerate() {
        let mut prev = DEPOT_START;
        for (k, visit) in visits.iter().enumerate() {
            let v = visit.vertex();
            assignment.set_x(m, prev, v, true);
            assignment.set_t(m, v, k as i64 + 1);
            prev = v;
        }
        assignment.set_x(m, prev, DEPOT_END, true);
    }
    Ok(assignment)
}

/// Recovers per-tour visit sequences from an assignment by walking each
/// tour's arcs from the start depot. Returns `None` when the arcs do not
/// form simple depot-to-depot paths.
pub fn decode_assignment(model: &IlpModel, assignment: &IlpAssignment) -> Option<Vec<Vec<Visit>>> {
    let n = model.n;
    let mut tours = Vec::with_capacity(model.n_t);
    for m in 0..model.n_t {
        let mut used_arcs = 0usize;
        for i in 0..n {
            for j in 0..n {
                used_arcs += assignment.x(m, i, j) as usize;
            }
        }
        let successor = |i: usize| -> Option<Option<usize>> {
            let mut next = None;
            for j in 0..n {
                if assignment.x(m, i, j) {
                    if next.is_some() {
                        return None; // branching path
                    }
                    next = Some(j);
                }
            }
            Some(next)
        };

        let mut visits = Vec::new();
        let mut walked = 0usize;
        let mut at = DEPOT_START;
        loop {
            let next = match successor(at)? {
                Some(next) => next,
                None if at == DEPOT_START && used_arcs == 0 => break, // empty tour
                None => return None,                                  // dead end
            };
            walked += 1;
            if next == DEPOT_END {
                break;
            }
            if next < 2 || walked > n {
                return None;
            }
            let (id, dir) = segment_of(next, model.n_s).ok()?;
            visits.push(Visit::new(id, dir));
            at = next;
        }
        if walked != used_arcs {
            return None; // stray arcs disconnected from the depot path
        }
        tours.push(visits);
    }
    Some(tours)
}

/// Objective value of an assignment under the model's cost terms.
pub fn objective_value(model: &IlpModel, assignment: &IlpAssignment) -> f64 {
    model
        .objective
        .iter()
        .map(|(v, c)| if assignment.x(v.m, v.i, v.j) { *c } else { 0.0 })
        .sum()
}

/// Renders a number with nine significant digits, shortest-form.
fn fmt_num(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{value:.8e}").parse().expect("well-formed float");
    format!("{rounded}")
}

fn push_terms(out: &mut String, terms: &[(VarRef, f64)], indent: &str) {
    let mut line = String::new();
    let mut first = true;
    for (var, coeff) in terms {
        let piece = if first {
            first = false;
            if *coeff < 0.0 {
                format!("- {} {}", fmt_num(-coeff), var.name())
            } else {
                format!("{} {}", fmt_num(*coeff), var.name())
            }
        } else if *coeff < 0.0 {
            format!(" - {} {}", fmt_num(-coeff), var.name())
        } else {
            format!(" + {} {}", fmt_num(*coeff), var.name())
        };
        if line.len() + piece.len() > 200 {
            out.push_str(&line);
            out.push('\n');
            line = indent.to_string();
        }
        line.push_str(&piece);
    }
    out.push_str(&line);
}

/// Writes the model in LP interchange format: objective, named constraint
/// rows, pinned bounds, binary and general-integer declarations. Output is
/// byte-deterministic for a given model.
pub fn export_lp(model: &IlpModel) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "\\ mstsp model: n={} n_s={} n_t={}",
        model.n, model.n_s, model.n_t
    )
    .unwrap();
    out.push_str("Minimize\n obj: ");
    let objective_terms: Vec<(VarRef, f64)> = model
        .objective
        .iter()
        .map(|(v, c)| (VarRef::X(*v), *c))
        .collect();
    push_terms(&mut out, &objective_terms, "   ");
    out.push_str("\nSubject To\n");
    for group in &model.groups {
        for row in &group.rows {
            write!(out, " {}: ", row.name).unwrap();
            push_terms(&mut out, &row.terms, "   ");
            let op = match row.op {
                RowOp::Eq => "=",
                RowOp::Le => "<=",
            };
            writeln!(out, " {} {}", op, fmt_num(row.rhs)).unwrap();
        }
    }
    out.push_str("Bounds\n");
    for var in &model.fixed_zero {
        writeln!(out, " {} = 0", VarRef::X(*var).name()).unwrap();
    }
    out.push_str("Binaries\n");
    let mut line = String::new();
    for m in 0..model.n_t {
        for i in 0..model.n {
            for j in 0..model.n {
                let name = VarRef::X(XVar { m, i, j }).name();
                if line.len() + name.len() + 1 > 200 {
                    writeln!(out, " {line}").unwrap();
                    line.clear();
                }
                if !line.is_empty() {
                    line.push(' ');
                }
                line.push_str(&name);
            }
        }
    }
    if !line.is_empty() {
        writeln!(out, " {line}").unwrap();
        line.clear();
    }
    out.push_str("Generals\n");
    for m in 0..model.n_t {
        for i in 0..model.n {
            let name = VarRef::T(TVar { m, i }).name();
            if line.len() + name.len() + 1 > 200 {
                writeln!(out, " {line}").unwrap();
                line.clear();
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(&name);
        }
    }
    if !line.is_empty() {
        writeln!(out, " {line}").unwrap();
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Direction, KinematicLimits, Point, Pylon, Segment};
    use crate::grasp::{grp_construct, GraspConfig};
    use crate::model::{PenaltyConfig, Tour};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// `count` segments chained along the x axis.
    fn chain_instance(count: usize, c_max: f64) -> (Instance, CostMatrix) {
        let pylons: Vec<Pylon> = (0..=count)
            .map(|k| Pylon {
                id: k as u32 + 1,
                position: Point::new(10.0 + 50.0 * k as f64, 15.0 * (k % 2) as f64),
            })
            .collect();
        let segments: Vec<Segment> = (0..count)
            .map(|k| Segment {
                id: k as u32 + 1,
                endpoint_a: k as u32 + 1,
                endpoint_b: k as u32 + 2,
            })
            .collect();
        let instance = Instance::new(
            Point::new(0.0, 0.0),
            None,
            pylons,
            segments,
            KinematicLimits::default(),
            c_max,
            None,
        )
        .unwrap();
        let matrix = CostMatrix::build(&instance).unwrap();
        (instance, matrix)
    }

    #[test]
    fn variable_and_row_counts_match_closed_forms() {
        for n_s in 1..=8 {
            for n_t in 1..=4 {
                let (instance, matrix) = chain_instance(n_s, 1e9);
                let model = build_model(&instance, &matrix, n_t, false).unwrap();
                let n = 2 + 2 * n_s;
                assert_eq!(model.binary_count(), n_t * n * n);
                assert_eq!(model.integer_count(), n_t * n);
                assert_eq!(model.objective.len() + model.fixed_zero.len(), n_t * n * n);
                assert_eq!(model.group(GroupTag::Start).rows.len(), n_t);
                assert_eq!(model.group(GroupTag::End).rows.len(), n_t);
                assert_eq!(model.group(GroupTag::SetIn).rows.len(), n_s);
                assert_eq!(model.group(GroupTag::SetOut).rows.len(), n_s);
                assert_eq!(model.group(GroupTag::Flow).rows.len(), n_t * (n - 2));
                assert_eq!(model.group(GroupTag::Budget).rows.len(), n_t);
                assert_eq!(
                    model.group(GroupTag::Mtz).rows.len(),
                    n_t * (n - 2) * (n - 3)
                );
            }
        }
    }

    #[test]
    fn model_dimensions_for_two_segments_two_tours() {
        let (instance, matrix) = chain_instance(2, 1e9);
        let model = build_model(&instance, &matrix, 2, false).unwrap();
        assert_eq!(model.binary_count(), 72);
        assert_eq!(model.integer_count(), 12);
    }

    #[test]
    fn start_rows_sum_departures_to_segment_vertices() {
        let (instance, matrix) = chain_instance(2, 1e9);
        let model = build_model(&instance, &matrix, 2, false).unwrap();
        let start = model.group(GroupTag::Start);
        assert_eq!(start.rows.len(), 2);
        for (m, row) in start.rows.iter().enumerate() {
            assert_eq!(row.op, RowOp::Eq);
            assert_eq!(row.rhs, 1.0);
            let expected: Vec<VarRef> = (2..6).map(|i| VarRef::X(XVar { m, i: 0, j: i })).collect();
            let actual: Vec<VarRef> = row.terms.iter().map(|(v, _)| *v).collect();
            assert_eq!(actual, expected);
        }
    }

    #[test]
    fn all_zero_assignment_violates_start_end_and_set_rows() {
        let (instance, matrix) = chain_instance(2, 1e9);
        let model = build_model(&instance, &matrix, 2, false).unwrap();
        let assignment = IlpAssignment::zero(2, 6);
        let violations = verify(&model, &assignment).unwrap();
        // 2 start + 2 end + 2 set_in + 2 set_out; flow/budget/mtz hold at 0.
        assert_eq!(violations.len(), 8);
        for tag in ["start_", "end_", "set_in_", "set_out_"] {
            assert_eq!(
                violations
                    .iter()
                    .filter(|v| v.name.starts_with(tag))
                    .count(),
                2
            );
        }
    }

    #[test]
    fn disconnected_two_vertex_subtour_violates_mtz() {
        let (instance, matrix) = chain_instance(2, 1e9);
        let model = build_model(&instance, &matrix, 1, false).unwrap();
        // A 2↔4 cycle with equal t values, nowhere attached to the depot.
        let mut assignment = IlpAssignment::zero(1, 6);
        assignment.set_x(0, 2, 4, true);
        assignment.set_x(0, 4, 2, true);
        assignment.set_t(0, 2, 3);
        assignment.set_t(0, 4, 3);
        let violations = verify(&model, &assignment).unwrap();
        assert!(violations.iter().any(|v| v.name.starts_with("mtz_")));
    }

    #[test]
    fn encoding_a_single_tour_sets_expected_entries() {
        let (instance, matrix) = chain_instance(1, 1e9);
        let solution = Solution::new(
            vec![Tour::new(vec![Visit::new(1, Direction::AB)], &matrix)],
            &instance,
            PenaltyConfig::default(),
        );
        let assignment = encode_solution(&solution, 1, 1).unwrap();
        assert!(assignment.x(0, 0, 2));
        assert!(assignment.x(0, 2, 1));
        assert_eq!(assignment.t(0, 2), 1);
        let set: usize = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|&(i, j)| assignment.x(0, i, j))
            .count();
        assert_eq!(set, 2);
        let others: i64 = (0..4).filter(|&i| i != 2).map(|i| assignment.t(0, i)).sum();
        assert_eq!(others, 0);
    }

    #[test]
    fn encoded_empty_tour_violates_the_start_row() {
        let (instance, matrix) = chain_instance(2, 1e9);
        let model = build_model(&instance, &matrix, 2, false).unwrap();
        let solution = Solution::new(
            vec![Tour::new(
                vec![Visit::new(1, Direction::AB), Visit::new(2, Direction::AB)],
                &matrix,
            )],
            &instance,
            PenaltyConfig::default(),
        );
        let assignment = encode_solution(&solution, 2, 2).unwrap();
        let violations = verify(&model, &assignment).unwrap();
        assert!(violations.iter().any(|v| v.name == "start_m1"));

        // With the empty-tour arc enabled, pointing tour 1 straight at the
        // termination depot satisfies the model.
        let relaxed = build_model(&instance, &matrix, 2, true).unwrap();
        let mut assignment = encode_solution(&solution, 2, 2).unwrap();
        assignment.set_x(1, 0, 1, true);
        assert!(verify(&relaxed, &assignment).unwrap().is_empty());
    }

    #[test]
    fn oracle_solution_encodes_cleanly_and_objective_matches() {
        let (instance, matrix) = chain_instance(3, 1e9);
        let solution = crate::oracle::exact_solve(
            &instance,
            &matrix,
            2,
            &crate::oracle::OracleLimits::default(),
        )
        .unwrap()
        .unwrap();
        let model = build_model(&instance, &matrix, solution.tour_count(), false).unwrap();
        let assignment = encode_solution(&solution, instance.n_s(), solution.tour_count()).unwrap();
        assert!(verify(&model, &assignment).unwrap().is_empty());
        assert!((objective_value(&model, &assignment) - solution.total_cost).abs() < 1e-6);
    }

    #[test]
    fn encode_decode_round_trip_on_constructed_solutions() {
        let (instance, matrix) = chain_instance(5, 1e9);
        let config = GraspConfig::default();
        let model = build_model(&instance, &matrix, 3, false).unwrap();
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let solution = grp_construct(&instance, &matrix, 3, &config, &mut rng);
            let assignment = encode_solution(&solution, instance.n_s(), 3).unwrap();
            let decoded = decode_assignment(&model, &assignment).unwrap();
            let mut expected = solution.canonical_tours();
            expected.sort();
            let mut got: Vec<Vec<Visit>> = decoded.into_iter().filter(|t| !t.is_empty()).collect();
            got.sort();
            assert_eq!(expected, got);
            assert!((objective_value(&model, &assignment) - solution.total_cost).abs() < 1e-6);
        }
    }

    #[test]
    fn encode_rejects_too_many_tours() {
        let (instance, matrix) = chain_instance(2, 1e9);
        let solution = Solution::new(
            vec![
                Tour::new(vec![Visit::new(1, Direction::AB)], &matrix),
                Tour::new(vec![Visit::new(2, Direction::AB)], &matrix),
            ],
            &instance,
            PenaltyConfig::default(),
        );
        assert!(encode_solution(&solution, 2, 1).is_err());
    }

    #[test]
    fn verify_rejects_dimension_mismatch() {
        let (instance, matrix) = chain_instance(2, 1e9);
        let model = build_model(&instance, &matrix, 2, false).unwrap();
        let assignment = IlpAssignment::zero(1, 6);
        assert!(matches!(
            verify(&model, &assignment),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn lp_export_is_deterministic_with_declared_variables() {
        let (instance, matrix) = chain_instance(1, 1e9);
        let model = build_model(&instance, &matrix, 1, false).unwrap();
        let first = export_lp(&model);
        let second = export_lp(&model);
        assert_eq!(first, second);

        // All 16 binaries (n = 4) are declared, usable or pinned.
        let binaries_section = first
            .split("Binaries\n")
            .nth(1)
            .unwrap()
            .split("Generals\n")
            .next()
            .unwrap();
        let declared = binaries_section
            .split_whitespace()
            .filter(|t| t.starts_with("x_"))
            .count();
        assert_eq!(declared, 16);
        let generals = first.split("Generals\n").nth(1).unwrap();
        assert_eq!(
            generals
                .split_whitespace()
                .filter(|t| t.starts_with("t_"))
                .count(),
            4
        );
        assert!(first.contains("budget_m0"));
        assert!(first.ends_with("End\n"));
    }
}
