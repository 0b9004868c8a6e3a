//! Solver toolkit for the multi-tour set traveling salesman problem arising
//! in power-transmission-line inspection: a UAV must traverse every line
//! segment exactly once, in either direction, over one or more depot-anchored
//! tours that each respect a flight-time budget.
//!
//! The crate provides:
//! - [`geometry`]: kinematic edge costing over the direction-expanded graph,
//! - [`model`]: solutions, the soft budget penalty, feasibility, metrics,
//! - [`grasp`]: greedy randomized construction plus adaptive tabu search,
//! - [`ilp`]: the integer-linear-programming model, LP export, and auditing,
//! - [`oracle`]: an exhaustive exact solver for small instances,
//! - [`gen`]: instance sampling from pylon data and synthetic topologies.

pub mod error;
pub mod gen;
pub mod geometry;
pub mod grasp;
pub mod ilp;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
pub use geometry::{CostMatrix, Direction, Instance, KinematicLimits, Point, Pylon, Segment};
pub use model::{PenaltyConfig, Solution, Tour, Visit};
