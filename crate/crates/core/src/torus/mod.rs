//! Points, probability measures and Fourier transforms on `T^d = [0, 2π)^d`.

pub mod fourier;
pub mod io;
pub mod measure;
pub mod point;
pub mod sampling;

pub use fourier::{fourier_coefficient, fourier_table, table_of_atoms, FourierTable, Jet};
pub use measure::{lift_mean, mixture, Atoms, GridDensity, LiftMean, ParticleCloud, TorusMeasure};
pub use point::{circle_distance, reduce_to_torus, torus_distance, wrap, wrap_centered, TorusPoint, MAX_DIM};
pub use io::{parse_measure, read_measure, write_measure};
pub use sampling::sample_measure;
