//! Euler–Maruyama simulation of the controlled mean-field SDE, payoffs, and
//! empirical probes along simulated flows.

pub mod config;
pub mod ito;
pub mod probes;
pub mod system;

pub use config::{ControlSignal, SimulationConfig};
pub use ito::{ito_flow_residual, ConstantTest, FlowTestFunction, HalfSquaredDistance, ItoResidual, LinearFunctional};
pub use probes::{flow_lipschitz_probe, law_invariance_probe, FlowLipschitzReport, LawInvarianceReport, LawInvarianceRow};
pub use system::{initial_positions, payoff, simulate_flow, FlowTrajectory};
