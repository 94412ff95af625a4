//! Regularized backward solves of the 1-D Burgers equation
//! `u_t − (A(x,t) u_x)_x = u u_x + G` on `(0, π)` from noisy terminal,
//! source and coefficient observations.
//!
//! The numerical core is generic over [`Scalar`]; the aliases below fix it
//! to `f64`.

pub mod error;
pub mod harness;
pub mod noise;
pub mod operators;
pub mod regression;
pub mod scalar;
pub mod solver;
pub mod spectral;
pub mod tridiag;

pub use error::{Error, Result};
pub use noise::{observe, BrownianPath, NoiseConfig, NoisyObservations};
pub use operators::{CutoffMode, RegParams};
pub use regression::{KnownSeries, ParabolaProfile, TruncationSet};
pub use scalar::Scalar;
pub use solver::{
    backward_solve_regularized, error_at, forward_solve, manufacture, BackwardOptions,
    ForwardOptions, TimeScheme,
};
pub use spectral::SmoothnessParams;

pub type SpatialGrid = spectral::SpatialGrid<f64>;
pub type GridFunction = spectral::GridFunction<f64>;
pub type SpectralCoeffs = spectral::SpectralCoeffs<f64>;
pub type SineBasis = spectral::SineBasis<f64>;
pub type TimeGrid = noise::TimeGrid<f64>;
pub type TimeField = regression::TimeField<f64>;
pub type Params = operators::RegParams<f64>;
pub type Tridiagonal = tridiag::Tridiagonal<f64>;
pub type ManufacturedProblem = solver::ManufacturedProblem<f64>;
pub type TrajectorySolution = solver::TrajectorySolution<f64>;
