use num_complex::Complex64;

use super::Trajectory;
use crate::error::Result;
use crate::grid::{RadialField, SpectralLaplacian};
use crate::params::ModelParams;

/// `e^{itΔ²}u`: each coefficient rotates by `e^{itμ_k²}`. Uses the
/// compensated transforms so that long step sequences conserve mass.
pub fn free_propagate(op: &SpectralLaplacian, u: &RadialField, t: f64) -> Result<RadialField> {
    let mut c = op.analysis_compensated(u)?;
    for (ck, &mu) in c.iter_mut().zip(op.eigenvalues()) {
        *ck *= Complex64::cis(t * mu * mu);
    }
    Ok(op.synthesis_compensated(&c))
}

/// Free flow of `v0` at the given times, with a single analysis and one
/// batched synthesis.
pub fn free_trajectory(op: &SpectralLaplacian, v0: &RadialField, times: &[f64]) -> Result<Trajectory> {
    let c = op.analysis(v0)?;
    let rotated: Vec<Vec<Complex64>> = times
        .iter()
        .map(|&t| c.iter().zip(op.eigenvalues()).map(|(ck, mu)| ck * Complex64::cis(t * mu * mu)).collect())
        .collect();
    let refs: Vec<&[Complex64]> = rotated.iter().map(Vec::as_slice).collect();
    let fields = op
        .synthesis_batch(&refs)
        .into_iter()
        .map(|values| RadialField::new(v0.grid().clone(), values))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(times.to_vec(), fields)
}

/// Exact solution of `i∂_t v = −ε|x|^b|v|^{q−1}v` over `dt`.
pub fn nonlinear_phase(u: &RadialField, dt: f64, params: &ModelParams) -> RadialField {
    let (b, q, eps) = (params.b_f64(), params.q_f64(), params.eps.value());
    u.map(|r, z| z * Complex64::cis(eps * dt * r.powf(b) * z.norm().powf(q - 1.0)))
}

/// One Strang step: half phase, full free flow, half phase.
pub fn strang_step(op: &SpectralLaplacian, u: &RadialField, dt: f64, params: &ModelParams) -> Result<RadialField> {
    let half = nonlinear_phase(u, dt / 2.0, params);
    let free = free_propagate(op, &half, dt)?;
    Ok(nonlinear_phase(&free, dt / 2.0, params))
}
