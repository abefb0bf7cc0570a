//! Value-function solvers: the one-dimensional Eikonal reduction and
//! Monte-Carlo searches over piecewise-constant control signals.

pub mod dpp;
pub mod eikonal;
pub mod lipschitz;
pub mod lookup;
pub mod search;

pub use eikonal::{
    classical_residual, eikonal_solve, eikonal_trajectory_oracle, oracle_ladder, reduced_value, semi_lagrangian,
    ClassicalResidual, EikonalProblem, OracleLadder, OracleResult, ReducedValue, Scheme, ValueTable,
};
pub use dpp::{dpp_residual, DppReport};
pub use lipschitz::{lipschitz_probe_space, lipschitz_probe_time, SpaceLipschitzReport, TimeLipschitzReport, TimeLipschitzRow};
pub use lookup::PeriodicLookup;
pub use search::{evaluate_signal, value_search, Continuation, SearchConfig, SearchResult};
