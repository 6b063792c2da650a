//! Greedy online scheduling of stochastic jobs on unrelated machines.
//!
//! The crate covers the whole verification stack around the greedy
//! "minimum instantaneous expected increase" policy:
//!
//! * [`model`]: instances, processing-time distributions, WSEPT priorities.
//! * [`greedy_list`]: the online-list greedy (all jobs at time 0).
//! * [`greedy_time`]: the online-time greedy with modified release dates and
//!   forced idleness, plus its event-driven simulator.
//! * [`lp`]: time-indexed LP relaxations, their duals and an exact simplex.
//! * [`dualfit`]: the dual certificates built from greedy runs and their checks.
//! * [`oracle`]: brute-force optima, the lower-bound family and auxiliary
//!   auxiliary checkers.
//!
//! Everything outside Monte Carlo estimation is computed with exact rationals.

pub mod dualfit;
pub mod error;
pub mod generate;
pub mod greedy_list;
pub mod greedy_time;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod stats;

pub use error::{Error, Result};
pub use model::{Assignment, Instance, Job, PrioritySplit, ProcDist};
pub use rational::Rational;
