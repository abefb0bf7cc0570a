//! Linear derivatives on measures, the controlled generator, the
//! Hamiltonian, and doubled-variables test functions.

pub mod family;
pub mod gadget;
pub mod generator;
pub mod regularity;

pub use family::{CoefficientFamily, Control, ControlDictionary, EikonalFamily, MomentFamily};
pub use gadget::{doubling_functional, hamiltonian_split, kappa_epsilon, HamiltonianSplit, TestFunctionGadget};
pub use generator::{
    generator_apply, hamiltonian, linear_derivative_from_tables, linear_derivative_rho_sq, DiffusionConvention, HamiltonianValue,
    SmoothFunction,
};
pub use regularity::{validate_regularity, RegularityReport};
