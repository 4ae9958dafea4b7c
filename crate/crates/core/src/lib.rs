//! Numerical laboratory for the radial inhomogeneous biharmonic Schrödinger
//! equation `i∂_t v + Δ²v = −ε|x|^b|v|^{q−1}v`.
//!
//! * [`params`]: exact exponent algebra, admissible pairs and hypothesis
//!   classifiers for the well-posedness results.
//! * [`grid`]: radial quadrature and the spectral discrete Laplacian.
//! * [`inequalities`]: ratio sweeps for the functional inequalities.
//! * [`evolution`]: free flow, split-step and Picard solvers, Strichartz
//!   sampling and scattering diagnostics.

pub mod error;
pub mod evolution;
pub mod grid;
pub mod inequalities;
pub mod params;

pub use error::{Error, Result};
pub use evolution::{EvolutionConfig, TrajectoryRecord};
pub use grid::{GridSpec, RadialField, RadialGrid, SpectralLaplacian};
pub use inequalities::{Inequality, RatioReport, TestFamily};
pub use params::{ExtReal, ModelParams, Num, Sign};
