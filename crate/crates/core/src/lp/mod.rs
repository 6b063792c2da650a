//! Time-indexed linear programming relaxations, their duals, and an exact
//! simplex solver.

pub mod export;
pub mod model;
pub mod relax;
pub mod solver;

pub use export::{export_lp, parse_lp};
pub use model::{Bound, Cmp, Constraint, LpModel, Sense, VarKey, Variable};
pub use relax::{
    build_dual, build_primal, completion_from_y, default_horizon, serial_witness, solve_primal,
    weighted_mass, y_from_x, DualVariant, Primal, StartDistribution, YSolution,
};
pub use solver::{certify, solve as solve_lp, LpSolution};
