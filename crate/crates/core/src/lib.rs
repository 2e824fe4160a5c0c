//! Parallel machine scheduling with job families, sequence-independent
//! family setups and machine qualification thresholds.
//!
//! The crate minimizes total flow time and then the number of machine
//! qualifications lost by the end of the schedule. It contains the
//! single-machine relaxation used for bounding, the cost-based filtering
//! rules built on it, an exact branch and bound, two greedy heuristics and
//! brute-force oracles for testing.
//!
//! Everything is generic over an integer time type; the aliases below fix
//! it to `i64`.

pub mod filtering;
pub mod heuristics;
pub mod instance;
pub mod num;
pub mod oracle;
pub mod relaxation;
pub mod schedule;
pub mod solver;

pub use filtering::{propagate, Bounds, Inconsistency, RuleSet};
pub use instance::{generate_instance, load_instance, save_instance, GenConfig, GenError, InstanceError, Violation};
pub use schedule::{check_validity, count_disqualifications, left_pack, load_schedule, save_schedule, ScheduleError};
pub use solver::{solve, solve_lex, solve_weighted, Aggregation, SearchStats, SolverConfig, Status};

/// Time unit of the concrete aliases.
pub type Time = i64;

pub type Family = instance::Family<Time>;
pub type Instance = instance::Instance<Time>;
pub type Schedule = schedule::Schedule<Time>;
pub type Entry = schedule::Entry<Time>;
pub type DomainStore = filtering::DomainStore<Time>;
pub type Objective = solver::Objective<Time>;
pub type SolveResult = solver::SolveResult<Time>;
pub type Node = solver::Node<Time>;
pub type JobGroup = relaxation::JobGroup<Time>;
