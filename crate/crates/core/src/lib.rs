//! Probability measures on the flat torus, Fourier–Sobolev metrics between
//! them, and controlled mean-field particle dynamics.

pub mod calculus;
pub mod dynamics;
pub mod error;
pub mod metrics;
pub mod parallel;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod torus;
pub mod value;

pub use error::{Error, Result};
pub use scalar::Real;
pub use num_complex::Complex;

pub type FourierTable64 = torus::FourierTable<f64>;
pub type ParticleCloud64 = torus::ParticleCloud<f64>;
pub type TorusMeasure64 = torus::TorusMeasure<f64>;
pub type SobolevWeight64 = metrics::SobolevWeight<f64>;
pub type ControlDictionary64 = calculus::ControlDictionary<f64>;
pub type MomentFamily64 = calculus::MomentFamily<f64>;
pub type EikonalFamily64 = calculus::EikonalFamily<f64>;
pub type SimulationConfig64 = dynamics::SimulationConfig<f64>;
pub type ControlSignal64 = dynamics::ControlSignal<f64>;
pub type SearchConfig64 = value::SearchConfig<f64>;
pub type ValueTable64 = value::ValueTable<f64>;
