use std::fmt;

use serde::Serialize;

use super::{free_trajectory, Trajectory};
use crate::error::{Error, Result};
use crate::grid::{lebesgue_norm, RadialField, SpectralLaplacian};
use crate::inequalities::{RatioReport, RatioSample, TestFamily};
use crate::params::{admissible_window, is_admissible, pair_exponent, ExtReal, ModelParams, Num};

/// A space-time exponent pair `(p, r)` for `L^p_t L^r_x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpacetimePair {
    pub p: ExtReal,
    pub r: Num,
}

impl SpacetimePair {
    pub fn new(p: ExtReal, r: Num) -> SpacetimePair {
        SpacetimePair { p, r }
    }
}

impl fmt::Display for SpacetimePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.r)
    }
}

/// `‖v‖_{L^p_t L^r_x}` with the trapezoid rule in time; `p = ∞` takes the
/// maximum over samples.
pub fn spacetime_norm(traj: &Trajectory, p: ExtReal, r: Num) -> f64 {
    let r = r.to_f64();
    let spatial: Vec<f64> = traj.fields.iter().map(|f| lebesgue_norm(f, r)).collect();
    match p {
        ExtReal::Infinity => spatial.iter().copied().fold(0.0, f64::max),
        ExtReal::Finite(p) => {
            let p = p.to_f64();
            if traj.len() == 1 {
                return 0.0;
            }
            let integral: f64 = traj
                .times
                .windows(2)
                .zip(spatial.windows(2))
                .map(|(t, x)| 0.5 * (t[1] - t[0]) * (x[0].powf(p) + x[1].powf(p)))
                .sum();
            integral.powf(1.0 / p)
        }
    }
}

fn check_pairs(dim: u32, s: f64, pairs: &[SpacetimePair]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("need at least one exponent pair".into()));
    }
    let s_num = Num::float(s);
    for pair in pairs {
        if !is_admissible(dim, s_num, pair.p, pair.r) {
            return Err(Error::Admissibility(format!("{pair} is not {s}-admissible in N = {dim}")));
        }
    }
    Ok(())
}

/// `‖e^{itΔ²}v₀‖_{L^p_t L^r_x} / ‖|∇|^s v₀‖` for each pair on `[0, T]`.
pub fn strichartz_ratio(
    op: &SpectralLaplacian,
    v0: &RadialField,
    s: f64,
    pairs: &[SpacetimePair],
    horizon: f64,
    steps: usize,
) -> Result<RatioReport> {
    let samples = strichartz_samples(op, v0, s, pairs, horizon, steps, "")?;
    Ok(RatioReport::from_samples("strichartz", format!("free flow on [0, {horizon}], s = {s}"), samples))
}

fn strichartz_samples(
    op: &SpectralLaplacian,
    v0: &RadialField,
    s: f64,
    pairs: &[SpacetimePair],
    horizon: f64,
    steps: usize,
    prefix: &str,
) -> Result<Vec<RatioSample>> {
    check_pairs(op.grid().dim(), s, pairs)?;
    if steps == 0 || !(horizon > 0.0) {
        return Err(Error::InvalidParameter("need T > 0 and n_t >= 1".into()));
    }
    let denom = op.sobolev_norm(s, v0)?;
    if !(denom > 0.0) {
        return Err(Error::ZeroDenominator("‖|∇|^s v0‖"));
    }
    let traj = free_trajectory(op, v0, &Trajectory::uniform_times(horizon, steps))?;
    Ok(pairs
        .iter()
        .map(|pair| RatioSample {
            label: format!("{prefix}{pair}"),
            family: None,
            ratio: spacetime_norm(&traj, pair.p, pair.r) / denom,
            scale_residual: None,
            boundary_mass_fraction: None,
        })
        .collect())
}

/// [`strichartz_ratio`] over a family of initial data scaled by `amplitude`.
#[allow(clippy::too_many_arguments)]
pub fn strichartz_sweep(
    op: &SpectralLaplacian,
    families: &[TestFamily],
    amplitude: f64,
    s: f64,
    pairs: &[SpacetimePair],
    horizon: f64,
    steps: usize,
) -> Result<RatioReport> {
    if families.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one test family".into()));
    }
    check_pairs(op.grid().dim(), s, pairs)?;
    let mut samples = Vec::new();
    for (index, family) in families.iter().enumerate() {
        let wrap = |source: Error| Error::SweepMember { index, member: family.to_string(), source: Box::new(source) };
        family.validate().map_err(wrap)?;
        let v0 = family.generate(op.grid()).scale(amplitude.into());
        let mut rows = strichartz_samples(op, &v0, s, pairs, horizon, steps, &format!("{family} ")).map_err(wrap)?;
        for row in &mut rows {
            row.family = Some(*family);
        }
        samples.extend(rows);
    }
    let description = format!("free flow on [0, {horizon}], s = {s}, {} initial data", families.len());
    Ok(RatioReport::from_samples("strichartz", description, samples))
}

/// Three `s_c`-admissible pairs: the `p = ∞` endpoint and two interior ones.
pub fn critical_pairs(params: &ModelParams) -> Result<Vec<SpacetimePair>> {
    let s_c = params.s_c();
    if s_c < Num::ZERO || s_c >= Num::int(2) {
        return Err(Error::Hypothesis(format!("critical index s_c = {s_c} outside [0, 2)")));
    }
    let dim = params.dim;
    let n = params.n();
    if params.dim < 5 && n <= 2 * s_c {
        return Err(Error::Hypothesis(format!("no s_c-admissible pairs for N = {dim}, s_c = {s_c}")));
    }
    let lower = 2 * n / (n - 2 * s_c);
    let (_, upper) = admissible_window(dim, s_c);
    let rs = match upper {
        ExtReal::Finite(hi) => {
            let gap = hi - lower;
            [lower, lower + gap / 3, lower + 2 * gap / 3]
        }
        ExtReal::Infinity => [lower, lower + 1, lower + 2],
    };
    rs.iter().map(|&r| Ok(SpacetimePair { p: pair_exponent(dim, s_c, r)?, r })).collect()
}

/// Sampled comparison of `‖v‖_{Λ_{s_c}}` against `2‖e^{itΔ²}v₀‖_{Λ_{s_c}}`.
///
/// Only finitely many quadrature-representable pairs enter, so the result is
/// reported, never asserted.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaEcho {
    pub pairs: Vec<SpacetimePair>,
    pub nonlinear_norms: Vec<f64>,
    pub free_norms: Vec<f64>,
    pub max_nonlinear: f64,
    pub max_free: f64,
    pub within_factor_two: bool,
    pub sup_mass_ratio: f64,
}

pub fn lambda_echo(
    op: &SpectralLaplacian,
    traj: &Trajectory,
    v0: &RadialField,
    params: &ModelParams,
) -> Result<LambdaEcho> {
    traj.check_grid(op)?;
    let pairs = critical_pairs(params)?;
    let free = free_trajectory(op, v0, &traj.times)?;
    let nonlinear_norms: Vec<f64> = pairs.iter().map(|pr| spacetime_norm(traj, pr.p, pr.r)).collect();
    let free_norms: Vec<f64> = pairs.iter().map(|pr| spacetime_norm(&free, pr.p, pr.r)).collect();
    let max_nonlinear = nonlinear_norms.iter().copied().fold(0.0, f64::max);
    let max_free = free_norms.iter().copied().fold(0.0, f64::max);
    let l2 = crate::grid::mass(v0).sqrt();
    let sup_l2 = traj.fields.iter().map(|f| crate::grid::mass(f).sqrt()).fold(0.0, f64::max);
    Ok(LambdaEcho {
        pairs,
        nonlinear_norms,
        free_norms,
        max_nonlinear,
        max_free,
        within_factor_two: max_nonlinear <= 2.0 * max_free,
        sup_mass_ratio: if l2 > 0.0 { sup_l2 / l2 } else { 0.0 },
    })
}
