//! Time evolution of `i∂_t v + Δ²v = −ε|x|^b|v|^{q−1}v` on a radial grid.
//!
//! On the eigenbasis of the discrete `−Δ` the biharmonic operator is
//! diagonal with symbol `μ_k²`, so the free flow is exact. The nonlinear
//! sub-flow is an exact pointwise phase rotation. Strang splitting composes
//! the two; a Duhamel/Picard solver provides an independent reference.

mod bounds;
mod duhamel;
mod flow;
mod run;
mod scattering;
mod strichartz;

use crate::error::{Error, Result};
use crate::grid::{RadialField, SpectralLaplacian};

pub use bounds::{global_bound_check, GlobalBoundReport};
pub use duhamel::{
    distance_pairs, duhamel_apply, picard_cross_check, picard_solve, spacetime_distance,
    split_step_trajectory, PicardDiagnostics,
};
pub use flow::{free_propagate, free_trajectory, nonlinear_phase, strang_step};
pub use run::{
    evolve, evolve_from, EvolutionConfig, HaltReason, InitialData, TrajectoryRecord,
    TrajectorySummary, BOUNDARY_HALT_FRACTION,
};
pub use scattering::{scattering_cauchy_check, scattering_profile, ScatteringReport};
pub use strichartz::{
    critical_pairs, lambda_echo, spacetime_norm, strichartz_ratio, strichartz_sweep, LambdaEcho,
    SpacetimePair,
};

/// Fields sampled at increasing times on a common grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<RadialField>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, fields: Vec<RadialField>) -> Result<Trajectory> {
        if times.len() != fields.len() || times.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "trajectory needs matching non-empty times and fields ({} vs {})",
                times.len(),
                fields.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("trajectory times must increase strictly".into()));
        }
        if fields.iter().any(|f| !f.same_grid(&fields[0])) {
            return Err(Error::GridMismatch);
        }
        Ok(Trajectory { times, fields })
    }

    /// `n_t + 1` uniform times on `[0, T]`.
    pub fn uniform_times(horizon: f64, steps: usize) -> Vec<f64> {
        (0..=steps).map(|i| horizon * i as f64 / steps as f64).collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `sup_i ‖a(t_i) − b(t_i)‖` in `L²`; the time samples must coincide.
    pub fn max_l2_distance(&self, other: &Trajectory) -> Result<f64> {
        if !self.same_times(other) {
            return Err(Error::InvalidParameter("trajectories are sampled at different times".into()));
        }
        Ok(self
            .fields
            .iter()
            .zip(&other.fields)
            .map(|(a, b)| crate::grid::mass(&(a - b)).sqrt())
            .fold(0.0, f64::max))
    }

    pub fn same_times(&self, other: &Trajectory) -> bool {
        self.times.len() == other.times.len()
            && self.times.iter().zip(&other.times).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0))
    }

    pub fn check_grid(&self, op: &SpectralLaplacian) -> Result<()> {
        self.fields.iter().try_for_each(|f| op.check_grid(f))
    }
}
