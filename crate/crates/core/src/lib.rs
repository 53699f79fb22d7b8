//! Fault-tolerant inspection planning for fleets of battery-limited
//! multicopters.
//!
//! A fleet covers a set of power-line segments with depot-to-depot tours
//! (each segment flown once, in either direction). Plans are found with a
//! GRASP solver under one of three plan-level objectives, and their
//! robustness is measured by injecting a single-vehicle failure at every
//! point of the mission and re-planning with the survivors.

pub mod cli;
pub mod costs;
pub mod error;
pub mod failure;
pub mod grasp;
pub mod io;
pub mod model;
pub mod oracle;

pub use costs::{CostFunction, CostKind};
pub use error::{Error, Result};
pub use failure::{compute_window, inject_failure, replan, FailureScenario, WindowOptions, WindowReport};
pub use grasp::{solve, solve_problem, SolveResult, SolverConfig};
pub use model::{Direction, Instance, Plan, Point, Problem, Segment, Tour, Visit};
pub use oracle::{exact_solve, OracleResult};
