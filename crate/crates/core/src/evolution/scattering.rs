use num_complex::Complex64;
use serde::Serialize;

use super::Trajectory;
use crate::error::{Error, Result};
use crate::grid::{RadialField, SpectralLaplacian};

/// Cauchy increments of the pulled-back profiles `w(t_i) = e^{−it_iΔ²}v(t_i)`.
#[derive(Clone, Debug, Serialize)]
pub struct ScatteringReport {
    pub times: Vec<f64>,
    /// `δ_i = ‖w(t_{i+1}) − w(t_i)‖_{H²}`.
    pub increments: Vec<f64>,
    /// First increment index of the final third.
    pub final_third_start: usize,
    pub final_third_nonincreasing: bool,
    pub max_increment: f64,
    /// `‖w(T)‖_{H²}`, the norm of the candidate scattering state.
    pub profile_h2_norm: f64,
}

fn pulled_back_coeffs(op: &SpectralLaplacian, traj: &Trajectory) -> Result<Vec<Vec<Complex64>>> {
    traj.check_grid(op)?;
    let refs: Vec<&[Complex64]> = traj.fields.iter().map(|f| f.values()).collect();
    let mut coeffs = op.analysis_batch(&refs);
    for (c, &t) in coeffs.iter_mut().zip(&traj.times) {
        for (ck, mu) in c.iter_mut().zip(op.eigenvalues()) {
            *ck *= Complex64::cis(-t * mu * mu);
        }
    }
    Ok(coeffs)
}

/// `w(t_i) = e^{−it_iΔ²}v(t_i)` for every stored sample.
pub fn scattering_profile(op: &SpectralLaplacian, traj: &Trajectory) -> Result<Trajectory> {
    let coeffs = pulled_back_coeffs(op, traj)?;
    let refs: Vec<&[Complex64]> = coeffs.iter().map(Vec::as_slice).collect();
    let grid = op.grid().clone();
    let fields = op
        .synthesis_batch(&refs)
        .into_iter()
        .map(|values| RadialField::new(grid.clone(), values))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(traj.times.clone(), fields)
}

/// Reports `δ_i` and whether it is non-increasing over the last third of the
/// increments. Differences below `1e−14‖w(0)‖_{H²}` count as ties.
pub fn scattering_cauchy_check(op: &SpectralLaplacian, traj: &Trajectory) -> Result<ScatteringReport> {
    if traj.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "scattering check needs at least 3 snapshots, got {}",
            traj.len()
        )));
    }
    let coeffs = pulled_back_coeffs(op, traj)?;
    let increments: Vec<f64> = coeffs
        .windows(2)
        .map(|w| {
            let diff: Vec<Complex64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
            op.bracket_norm_coeffs(2.0, &diff)
        })
        .collect();
    let scale = op.bracket_norm_coeffs(2.0, &coeffs[0]);
    let start = 2 * increments.len() / 3;
    let tie = 1e-14 * scale;
    let final_third_nonincreasing = increments[start..].windows(2).all(|w| w[1] <= w[0] + tie);
    Ok(ScatteringReport {
        times: traj.times.clone(),
        max_increment: increments.iter().copied().fold(0.0, f64::max),
        increments,
        final_third_start: start,
        final_third_nonincreasing,
        profile_h2_norm: op.bracket_norm_coeffs(2.0, coeffs.last().unwrap()),
    })
}
