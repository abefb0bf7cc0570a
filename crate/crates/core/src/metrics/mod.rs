//! Fourier–Sobolev metrics `ρ_λ`, dual norms, and circular transport.

pub mod sobolev;
pub mod w1;

pub use sobolev::{
    dual_maximizer, embedding_constant, n_star, rho_from_tables, rho_lambda, sobolev_norm, tail_constant_c, tail_sum_bound,
    DecayCertificate, DualMaximizer, MetricResult, SobolevWeight, TAIL_CONSTANT_CUTOFF,
};
pub use w1::w1_circle;
