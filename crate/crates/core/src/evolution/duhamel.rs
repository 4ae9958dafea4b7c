use num_complex::Complex64;
use serde::Serialize;

use super::strichartz::{spacetime_norm, SpacetimePair};
use super::{free_trajectory, strang_step, Trajectory};
use crate::error::{Error, Result};
use crate::grid::{RadialField, SpectralLaplacian};
use crate::params::{admissible_window, pair_exponent, ExtReal, ModelParams, Num};

#[derive(Clone, Debug, Default, Serialize)]
pub struct PicardDiagnostics {
    /// `d_n = dist(v_{n+1}, v_n)`.
    pub distances: Vec<f64>,
    /// `d_{n+1}/d_n`, skipped where `d_n = 0`.
    pub ratios: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub tolerance: f64,
    pub pairs: Vec<SpacetimePair>,
    /// `sup_t ‖v_picard(t) − v_split(t)‖` once a split-step reference was run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_mismatch: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_budget: Option<f64>,
}

impl PicardDiagnostics {
    pub fn contracting(&self) -> bool {
        self.ratios.iter().all(|&r| r < 1.0)
    }

    pub fn within_budget(&self) -> Option<bool> {
        Some(self.final_mismatch? <= self.error_budget?)
    }
}

fn check_uniform(v: &Trajectory, horizon: f64, steps: usize) -> Result<()> {
    let expected = Trajectory::uniform_times(horizon, steps);
    let ok = v.times.len() == expected.len()
        && v.times.iter().zip(&expected).all(|(a, b)| (a - b).abs() <= 1e-12 * horizon.max(1.0));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "trajectory must be sampled at {} uniform times on [0, {horizon}]",
            steps + 1
        )))
    }
}

/// `Ϝ(v)(t) = e^{itΔ²}v₀ + iε∫₀ᵗ e^{i(t−τ)Δ²}|x|^b|v|^{q−1}v dτ` at the sample
/// times of `v`, with the trapezoid rule over the samples in `τ`.
pub fn duhamel_apply(
    op: &SpectralLaplacian,
    v: &Trajectory,
    v0: &RadialField,
    params: &ModelParams,
    horizon: f64,
    steps: usize,
) -> Result<Trajectory> {
    if steps == 0 || !(horizon > 0.0) {
        return Err(Error::InvalidParameter("need T > 0 and n_t >= 1".into()));
    }
    check_uniform(v, horizon, steps)?;
    v.check_grid(op)?;
    op.check_grid(v0)?;
    let (b, q) = (params.b_f64(), params.q_f64());
    let sources: Vec<Vec<Complex64>> = v
        .fields
        .iter()
        .map(|f| f.map(|r, z| z * r.powf(b) * z.norm().powf(q - 1.0)).into_values())
        .collect();
    let refs: Vec<&[Complex64]> = sources.iter().map(Vec::as_slice).collect();
    let n = op.analysis_batch(&refs);
    let c0 = op.analysis(v0)?;
    let dt = horizon / steps as f64;
    let weight = Complex64::new(0.0, params.eps.value() * dt);
    let modes = c0.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); modes]; v.len()];
    for k in 0..modes {
        let mu2 = op.eigenvalues()[k].powi(2);
        let mut cumulative = Complex64::new(0.0, 0.0);
        let mut first = Complex64::new(0.0, 0.0);
        for (i, &t) in v.times.iter().enumerate() {
            let h = n[i][k] * Complex64::cis(-t * mu2);
            cumulative += h;
            if i == 0 {
                first = h;
            }
            let integral = cumulative - (first + h) * 0.5;
            out[i][k] = Complex64::cis(t * mu2) * (c0[k] + weight * integral);
        }
    }
    let refs: Vec<&[Complex64]> = out.iter().map(Vec::as_slice).collect();
    let fields = op
        .synthesis_batch(&refs)
        .into_iter()
        .map(|values| RadialField::new(v0.grid().clone(), values))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(v.times.clone(), fields)
}

/// Pairs used for the Picard distance: `(∞, 2)` and two interior
/// 0-admissible pairs.
pub fn distance_pairs(dim: u32) -> Result<Vec<SpacetimePair>> {
    let (_, upper) = admissible_window(dim, Num::ZERO);
    let interior: [Num; 2] = match upper {
        ExtReal::Finite(r_max) => {
            let gap = r_max - 2;
            [2 + gap / 3, 2 + 2 * gap / 3]
        }
        ExtReal::Infinity => [Num::int(3), Num::int(4)],
    };
    let mut pairs = vec![SpacetimePair { p: ExtReal::Infinity, r: Num::int(2) }];
    for r in interior {
        pairs.push(SpacetimePair { p: pair_exponent(dim, Num::ZERO, r)?, r });
    }
    Ok(pairs)
}

/// Maximum over `pairs` of the discrete `L^p_t L^r_x` norm of `a − b`.
pub fn spacetime_distance(a: &Trajectory, b: &Trajectory, pairs: &[SpacetimePair]) -> Result<f64> {
    if !a.same_times(b) {
        return Err(Error::InvalidParameter("trajectories are sampled at different times".into()));
    }
    let diff = Trajectory::new(a.times.clone(), a.fields.iter().zip(&b.fields).map(|(x, y)| x - y).collect())?;
    Ok(pairs.iter().map(|pair| spacetime_norm(&diff, pair.p, pair.r)).fold(0.0, f64::max))
}

/// Iterates `v_{n+1} = Ϝ(v_n)` from the free flow until `d_n < tol`.
///
/// Three consecutive increases of `d_n` abort with [`Error::Divergence`];
/// exhausting `max_iter` returns with `converged = false`.
pub fn picard_solve(
    op: &SpectralLaplacian,
    v0: &RadialField,
    horizon: f64,
    params: &ModelParams,
    steps: usize,
    tol: f64,
    max_iter: usize,
) -> Result<(Trajectory, PicardDiagnostics)> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidParameter("need tol > 0 and max_iter >= 1".into()));
    }
    if steps == 0 || !(horizon > 0.0) {
        return Err(Error::InvalidParameter("need T > 0 and n_t >= 1".into()));
    }
    let pairs = distance_pairs(op.grid().dim())?;
    let mut v = free_trajectory(op, v0, &Trajectory::uniform_times(horizon, steps))?;
    let mut diag = PicardDiagnostics { tolerance: tol, pairs: pairs.clone(), ..Default::default() };
    let mut rising = 0;
    for _ in 0..max_iter {
        let next = duhamel_apply(op, &v, v0, params, horizon, steps)?;
        let d = spacetime_distance(&next, &v, &pairs)?;
        if !d.is_finite() {
            return Err(Error::Numerical(format!("non-finite Picard distance after {} iterations", diag.iterations)));
        }
        if let Some(&prev) = diag.distances.last() {
            if prev > 0.0 {
                diag.ratios.push(d / prev);
            }
            rising = if d > prev { rising + 1 } else { 0 };
        }
        diag.distances.push(d);
        diag.iterations += 1;
        v = next;
        if d < tol {
            diag.converged = true;
            break;
        }
        if rising >= 3 {
            return Err(Error::Divergence { ratios: diag.ratios });
        }
    }
    Ok((v, diag))
}

/// Strang integration of `v0` sampled at `times`, with substeps no longer
/// than `dt` between consecutive samples.
pub fn split_step_trajectory(
    op: &SpectralLaplacian,
    v0: &RadialField,
    params: &ModelParams,
    times: &[f64],
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("dt must be > 0".into()));
    }
    op.check_grid(v0)?;
    let mut fields = vec![v0.clone()];
    let mut v = v0.clone();
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let sub = (span / dt - 1e-9).ceil().max(1.0) as usize;
        for _ in 0..sub {
            v = strang_step(op, &v, span / sub as f64, params)?;
        }
        if !v.is_finite() {
            return Err(Error::Numerical(format!("non-finite split-step field at t = {}", w[1])));
        }
        fields.push(v.clone());
    }
    Trajectory::new(times.to_vec(), fields)
}

/// [`picard_solve`] followed by a split-step reference on the same samples;
/// the budget for their `L^∞_t L²_x` mismatch is `10·(dt² + T/n_t)`.
#[allow(clippy::too_many_arguments)]
pub fn picard_cross_check(
    op: &SpectralLaplacian,
    v0: &RadialField,
    horizon: f64,
    params: &ModelParams,
    steps: usize,
    tol: f64,
    max_iter: usize,
    dt: f64,
) -> Result<(Trajectory, PicardDiagnostics)> {
    let (picard, mut diag) = picard_solve(op, v0, horizon, params, steps, tol, max_iter)?;
    let reference = split_step_trajectory(op, v0, params, &picard.times, dt)?;
    diag.final_mismatch = Some(picard.max_l2_distance(&reference)?);
    diag.error_budget = Some(10.0 * (dt * dt + horizon / steps as f64));
    Ok((picard, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::free_propagate;
    use crate::grid::{build_grid, mass};
    use crate::params::Sign;

    fn setup() -> (SpectralLaplacian, RadialField, ModelParams) {
        let g = build_grid(6, 15.0, 200).unwrap();
        let op = SpectralLaplacian::new(&g).unwrap();
        let v0 = RadialField::from_real(&g, |r| 1e-2 * (-r * r / 2.0).exp());
        let p = ModelParams::new(6, Num::int(1), Num::int(3), Sign::Minus).unwrap();
        (op, v0, p)
    }

    #[test]
    fn zero_trajectory_gives_free_flow() {
        let (op, v0, p) = setup();
        let times = Trajectory::uniform_times(0.1, 10);
        let zero = Trajectory::new(times.clone(), vec![RadialField::zeros(op.grid()); 11]).unwrap();
        let out = duhamel_apply(&op, &zero, &v0, &p, 0.1, 10).unwrap();
        for (t, f) in times.iter().zip(&out.fields) {
            assert!(free_propagate(&op, &v0, *t).unwrap().max_abs_diff(f) < 1e-12);
        }
    }

    #[test]
    fn linear_part_is_additive() {
        let (op, v0, p) = setup();
        let w0 = RadialField::from_real(op.grid(), |r| r * (-r * r).exp());
        let zero = Trajectory::new(Trajectory::uniform_times(0.1, 4), vec![RadialField::zeros(op.grid()); 5]).unwrap();
        let a = duhamel_apply(&op, &zero, &v0, &p, 0.1, 4).unwrap();
        let b = duhamel_apply(&op, &zero, &w0, &p, 0.1, 4).unwrap();
        let ab = duhamel_apply(&op, &zero, &(&v0 + &w0), &p, 0.1, 4).unwrap();
        for i in 0..5 {
            assert!((&a.fields[i] + &b.fields[i]).max_abs_diff(&ab.fields[i]) < 1e-12);
        }
    }

    #[test]
    fn rejects_mismatched_sampling() {
        let (op, v0, p) = setup();
        let zero = Trajectory::new(Trajectory::uniform_times(0.1, 4), vec![RadialField::zeros(op.grid()); 5]).unwrap();
        assert!(duhamel_apply(&op, &zero, &v0, &p, 0.1, 5).is_err());
        assert!(duhamel_apply(&op, &zero, &v0, &p, 0.2, 4).is_err());
    }

    #[test]
    fn pairs_are_admissible() {
        for dim in 1..=10 {
            let pairs = distance_pairs(dim).unwrap();
            assert_eq!(pairs.len(), 3);
            for pair in &pairs {
                assert!(crate::params::is_admissible(dim, Num::ZERO, pair.p, pair.r), "N={dim} {pair:?}");
            }
        }
    }

    #[test]
    fn zero_data_converges_at_once() {
        let (op, _, p) = setup();
        let zero = RadialField::zeros(op.grid());
        let (traj, diag) = picard_solve(&op, &zero, 0.1, &p, 10, 1e-14, 10).unwrap();
        assert!(diag.converged);
        assert_eq!(diag.iterations, 1);
        assert!(traj.fields.iter().all(|f| mass(f) == 0.0));
    }

    #[test]
    fn small_data_contracts_and_matches_split_step() {
        let (op, v0, p) = setup();
        let tol = 1e-14 * mass(&v0).sqrt();
        let (traj, diag) = picard_cross_check(&op, &v0, 0.1, &p, 50, tol, 30, 1e-3).unwrap();
        assert!(diag.converged, "{diag:?}");
        assert!(diag.contracting(), "{:?}", diag.ratios);
        assert_eq!(diag.within_budget(), Some(true));
        // the converged trajectory is a fixed point
        let again = duhamel_apply(&op, &traj, &v0, &p, 0.1, 50).unwrap();
        assert!(spacetime_distance(&again, &traj, &diag.pairs).unwrap() < 10.0 * tol);
    }

    #[test]
    fn smaller_amplitude_contracts_faster() {
        let (op, v0, p) = setup();
        let first_ratio = |u: &RadialField| {
            let (_, d) = picard_solve(&op, u, 0.1, &p, 20, 1e-30, 3).unwrap();
            d.ratios[0]
        };
        let big = first_ratio(&v0.scale(20.0.into()));
        let small = first_ratio(&v0.scale(10.0.into()));
        assert!(small < big, "{small} vs {big}");
    }

    #[test]
    fn large_data_diverges() {
        let (op, v0, p) = setup();
        let loud = v0.scale(3e3.into());
        match picard_solve(&op, &loud, 0.1, &p, 10, 1e-30, 20) {
            Err(Error::Divergence { ratios }) => assert!(!ratios.is_empty()),
            Ok((_, d)) => assert!(!d.converged, "{d:?}"),
            Err(e) => assert!(e.is_numerical(), "{e}"),
        }
    }
}
