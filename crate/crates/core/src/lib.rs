//! Minimum-cost synthesis of hierarchical control-system hardware.
//!
//! A [`ProblemInstance`] lists device types and control loops. The
//! [`aco`] module searches for a cheap tree of devices that wires every loop
//! to a leaf and runs it on a processor within the timing, memory and
//! reliability limits. [`oracle`] solves small instances exactly and
//! [`feasibility`] checks any architecture against every constraint.

pub mod aco;
pub mod batch;
pub mod bundled;
pub mod cli;
pub mod catalogs;
pub mod constructor;
pub mod error;
pub mod feasibility;
pub mod io;
pub mod model;
pub mod oracle;
pub mod render;

pub use aco::{solve, solve_random_baseline, AcoParams, HeuristicMode, SolveResult};
pub use error::{ModelError, OracleError, ParseError};
pub use feasibility::{validate, ConstraintFamily, FeasibilityReport};
pub use model::{Architecture, ArchitectureBuilder, ControlLoop, DeviceType, ProblemInstance};
