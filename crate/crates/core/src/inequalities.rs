//! Functional inequalities for radial functions, measured as ratios.
//!
//! Each inequality `A(u) ≤ C·B(u)` is probed through `A(u)/B(u)` on families of
//! smooth radial test functions. The maximum over a sweep is an empirical
//! lower bound for the best constant; invariance of the ratio under
//! `u ↦ c·u` and `u ↦ u(λ·)` checks that the exponents balance.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    boundary_mass, dilate, fmt_f64, lebesgue_norm, mass, radial_derivative,
    weighted_source_integral, RadialField, RadialGrid, SpectralLaplacian,
};
use crate::params::{ExtReal, ModelParams, Num};

/// Dilation factors used for the scale-invariance residual.
pub const SCALE_PROBES: [f64; 2] = [0.5, 2.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum TestFamily {
    /// `e^{−a r²}`
    Gaussian { a: f64 },
    /// `e^{−(r−c)²/(2σ²)}`
    RingBump { center: f64, width: f64 },
    /// `r^m e^{−a r²}`
    PolyGaussian { m: u32, a: f64 },
}

impl TestFamily {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TestFamily::Gaussian { a } => a > 0.0,
            TestFamily::RingBump { center, width } => center > 0.0 && width > 0.0,
            TestFamily::PolyGaussian { a, .. } => a > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad test family parameters: {self}")))
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            TestFamily::Gaussian { a } => (-a * r * r).exp(),
            TestFamily::RingBump { center, width } => {
                let x = (r - center) / width;
                (-0.5 * x * x).exp()
            }
            TestFamily::PolyGaussian { m, a } => r.powi(m as i32) * (-a * r * r).exp(),
        }
    }

    pub fn generate(&self, grid: &Arc<RadialGrid>) -> RadialField {
        RadialField::from_real(grid, |r| self.eval(r))
    }
}

impl fmt::Display for TestFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFamily::Gaussian { a } => write!(f, "Gaussian(a={a})"),
            TestFamily::RingBump { center, width } => write!(f, "RingBump(c={center}, sigma={width})"),
            TestFamily::PolyGaussian { m, a } => write!(f, "PolyGaussian(m={m}, a={a})"),
        }
    }
}

/// Deterministic lattice of probes: Gaussians, off-centre bumps and
/// polynomially weighted Gaussians, all decaying well inside `R = 25` even
/// after dilation by `1/2`.
pub fn default_families() -> Vec<TestFamily> {
    let mut out: Vec<TestFamily> = [0.25, 0.5, 1.0, 2.0]
        .iter()
        .map(|&a| TestFamily::Gaussian { a })
        .collect();
    for (center, width) in [(3.0, 0.5), (4.0, 0.5), (4.0, 0.8), (5.0, 1.0)] {
        out.push(TestFamily::RingBump { center, width });
    }
    for m in 1..=4 {
        for a in [0.5, 1.0] {
            out.push(TestFamily::PolyGaussian { m, a });
        }
    }
    out
}

/// `n` Gaussians with `a` log-spaced over `[lo, hi]`.
pub fn gaussian_lattice(lo: f64, hi: f64, n: usize) -> Vec<TestFamily> {
    (0..n)
        .map(|i| {
            let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            TestFamily::Gaussian { a: lo * (hi / lo).powf(t) }
        })
        .collect()
}

/// One inequality with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "tag")]
pub enum Inequality {
    /// `|x|^{(N−2s)/2}|u| ≤ C ‖u‖^{1−s}‖∇u‖^s`, `1/2 ≤ s < 1`.
    Strauss { s: f64 },
    /// `|x|^{(N−2s)/2}|u| ≤ C ‖|∇|^s u‖`, `1/2 < s < N/2`.
    FractionalStrauss { s: f64 },
    /// `‖|x|^{−s} u‖_ρ ≤ C ‖|∇|^s u‖_ρ`, `1 < ρ < ∞`, `0 < s < N/ρ`.
    Hardy { s: f64, rho: f64 },
    /// `∫|x|^b |u|^{1+q} ≤ C ‖u‖^{1+q−D}‖Δu‖^D`, `1 + 2b/(N−1) < q < q^e`.
    GagliardoNirenberg { params: ModelParams },
    /// `‖∇u‖_ρ² ≤ C ‖u‖_ρ ‖Δu‖_ρ`, `1 ≤ ρ < ∞`.
    Interpolation { rho: f64 },
}

impl Inequality {
    pub fn tag(&self) -> &'static str {
        match self {
            Inequality::Strauss { .. } => "strauss",
            Inequality::FractionalStrauss { .. } => "fractional-strauss",
            Inequality::Hardy { .. } => "hardy",
            Inequality::GagliardoNirenberg { .. } => "gn",
            Inequality::Interpolation { .. } => "interpolation",
        }
    }

    /// Rejects parameters outside the range where the inequality holds.
    pub fn check_hypothesis(&self, dim: u32) -> Result<()> {
        let n = dim as f64;
        let fail = |msg: String| Err(Error::Hypothesis(msg));
        match *self {
            Inequality::Strauss { s } if !(0.5..1.0).contains(&s) => {
                fail(format!("Strauss estimate needs 1/2 <= s < 1, got s = {s}"))
            }
            Inequality::FractionalStrauss { s } if !(s > 0.5 && s < n / 2.0) => {
                fail(format!("fractional Strauss estimate needs 1/2 < s < N/2 = {}, got s = {s}", n / 2.0))
            }
            Inequality::Hardy { rho, .. } if !(rho > 1.0 && rho.is_finite()) => {
                fail(format!("Hardy estimate needs 1 < rho < inf, got rho = {rho}"))
            }
            Inequality::Hardy { s, rho } if !(s > 0.0 && s < n / rho) => {
                fail(format!("Hardy estimate needs 0 < s < N/rho = {}, got s = {s}", n / rho))
            }
            Inequality::Interpolation { rho } if !(rho >= 1.0 && rho.is_finite()) => {
                fail(format!("interpolation estimate needs 1 <= rho < inf, got rho = {rho}"))
            }
            Inequality::GagliardoNirenberg { params } => gn_hypothesis(&params, dim),
            _ => Ok(()),
        }
    }

    pub fn ratio(&self, op: &SpectralLaplacian, u: &RadialField) -> Result<f64> {
        match *self {
            Inequality::Strauss { s } => strauss_ratio(op, u, s),
            Inequality::FractionalStrauss { s } => fractional_strauss_ratio(op, u, s),
            Inequality::Hardy { s, rho } => hardy_ratio(op, u, s, rho),
            Inequality::GagliardoNirenberg { params } => gn_ratio(op, u, &params),
            Inequality::Interpolation { rho } => interpolation_ratio(op, u, rho),
        }
    }
}

fn gn_hypothesis(params: &ModelParams, dim: u32) -> Result<()> {
    if params.dim != dim {
        return Err(Error::InvalidParameter(format!(
            "model dimension N = {} differs from grid dimension {dim}",
            params.dim
        )));
    }
    let lower = if params.dim == 1 {
        if params.b.is_zero() { ExtReal::Finite(Num::ONE) } else { ExtReal::Infinity }
    } else {
        ExtReal::Finite(1 + 2 * params.b / (params.n() - 1))
    };
    if ExtReal::Finite(params.q) <= lower {
        return Err(Error::Hypothesis(format!(
            "Gagliardo-Nirenberg estimate needs q > 1+2b/(N-1) = {lower}, got q = {}",
            params.q
        )));
    }
    let q_e = params.q_energy();
    if ExtReal::Finite(params.q) >= q_e {
        return Err(Error::Hypothesis(format!(
            "Gagliardo-Nirenberg estimate needs q < q^e = {q_e}, got q = {}",
            params.q
        )));
    }
    Ok(())
}

/// `max_j r_j^α |u_j|`, refined by a parabola through the largest node and
/// its neighbours.
fn weighted_sup(u: &RadialField, alpha: f64) -> f64 {
    let r = u.grid().nodes();
    let f: Vec<f64> = r.iter().zip(u.values()).map(|(r, z)| r.powf(alpha) * z.norm()).collect();
    let (j, &peak) = f
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if j == 0 || j + 1 == f.len() {
        return peak;
    }
    let (left, right) = (f[j - 1], f[j + 1]);
    let curvature = 2.0 * peak - left - right;
    if curvature <= 0.0 {
        return peak;
    }
    peak + (right - left).powi(2) / (8.0 * curvature)
}

fn nonzero(x: f64, what: &'static str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::ZeroDenominator(what))
    }
}

pub fn strauss_ratio(op: &SpectralLaplacian, u: &RadialField, s: f64) -> Result<f64> {
    let dim = op.grid().dim();
    Inequality::Strauss { s }.check_hypothesis(dim)?;
    let l2 = nonzero(mass(u).sqrt(), "‖u‖")?;
    let grad = nonzero(op.sobolev_norm(1.0, u)?, "‖∇u‖")?;
    let sup = weighted_sup(u, (dim as f64 - 2.0 * s) / 2.0);
    Ok(sup / (l2.powf(1.0 - s) * grad.powf(s)))
}

pub fn fractional_strauss_ratio(op: &SpectralLaplacian, u: &RadialField, s: f64) -> Result<f64> {
    let dim = op.grid().dim();
    Inequality::FractionalStrauss { s }.check_hypothesis(dim)?;
    let denom = nonzero(op.sobolev_norm(s, u)?, "‖|∇|^s u‖")?;
    Ok(weighted_sup(u, (dim as f64 - 2.0 * s) / 2.0) / denom)
}

pub fn hardy_ratio(op: &SpectralLaplacian, u: &RadialField, s: f64, rho: f64) -> Result<f64> {
    Inequality::Hardy { s, rho }.check_hypothesis(op.grid().dim())?;
    let weighted = u.map(|r, z| z * r.powf(-s));
    let denom = nonzero(lebesgue_norm(&op.fractional_apply(s, u)?, rho), "‖|∇|^s u‖_ρ")?;
    Ok(lebesgue_norm(&weighted, rho) / denom)
}

pub fn gn_ratio(op: &SpectralLaplacian, u: &RadialField, params: &ModelParams) -> Result<f64> {
    gn_hypothesis(params, op.grid().dim())?;
    let d = params.gn_exponent().to_f64();
    let q = params.q_f64();
    let l2 = nonzero(mass(u).sqrt(), "‖u‖")?;
    let lap = nonzero(op.sobolev_norm(2.0, u)?, "‖Δu‖")?;
    Ok(weighted_source_integral(u, params) / (l2.powf(1.0 + q - d) * lap.powf(d)))
}

pub fn interpolation_ratio(op: &SpectralLaplacian, u: &RadialField, rho: f64) -> Result<f64> {
    Inequality::Interpolation { rho }.check_hypothesis(op.grid().dim())?;
    let grad = lebesgue_norm(&radial_derivative(u), rho);
    let lap = lebesgue_norm(&op.laplacian(u)?, rho);
    let denom = nonzero(lebesgue_norm(u, rho) * lap, "‖u‖_ρ‖Δu‖_ρ")?;
    Ok(grad * grad / denom)
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioSample {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<TestFamily>,
    pub ratio: f64,
    /// Worst relative change of the ratio under dilation by `1/2` and `2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_mass_fraction: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioReport {
    pub inequality: String,
    pub description: String,
    pub samples: Vec<RatioSample>,
    pub max_ratio: f64,
    pub scale_invariance_residual: f64,
}

impl RatioReport {
    pub fn from_samples(inequality: &str, description: String, samples: Vec<RatioSample>) -> RatioReport {
        let max_ratio = samples.iter().map(|s| s.ratio).fold(f64::NEG_INFINITY, f64::max);
        let scale_invariance_residual =
            samples.iter().filter_map(|s| s.scale_residual).fold(0.0, f64::max);
        RatioReport { inequality: inequality.into(), description, samples, max_ratio, scale_invariance_residual }
    }

    pub fn all_finite(&self) -> bool {
        self.samples.iter().all(|s| s.ratio.is_finite() && s.ratio >= 0.0)
    }

    /// One row per sample: family parameters, ratio, scale residual.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["label", "kind", "a", "center", "width", "m", "ratio", "scale_residual"])?;
        let num = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        for s in &self.samples {
            let (kind, a, center, width, m) = match s.family {
                Some(TestFamily::Gaussian { a }) => ("Gaussian", Some(a), None, None, None),
                Some(TestFamily::RingBump { center, width }) => ("RingBump", None, Some(center), Some(width), None),
                Some(TestFamily::PolyGaussian { m, a }) => ("PolyGaussian", Some(a), None, None, Some(m)),
                None => ("", None, None, None, None),
            };
            out.write_record([
                s.label.clone(),
                kind.into(),
                num(a),
                num(center),
                num(width),
                m.map(|m| m.to_string()).unwrap_or_default(),
                fmt_f64(s.ratio),
                num(s.scale_residual),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Relative change of `ratio` under dilation by each of [`SCALE_PROBES`].
pub fn scale_residual(op: &SpectralLaplacian, inequality: &Inequality, u: &RadialField) -> Result<f64> {
    let base = inequality.ratio(op, u)?;
    let mut worst: f64 = 0.0;
    for lambda in SCALE_PROBES {
        let scaled = inequality.ratio(op, &dilate(u, lambda, 0.0).field)?;
        worst = worst.max((scaled - base).abs() / base);
    }
    Ok(worst)
}

/// Evaluates `inequality` on every family member, with its scale residual.
pub fn sweep(op: &SpectralLaplacian, inequality: &Inequality, families: &[TestFamily]) -> Result<RatioReport> {
    if families.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one test family".into()));
    }
    inequality.check_hypothesis(op.grid().dim())?;
    let mut samples = Vec::with_capacity(families.len());
    for (index, family) in families.iter().enumerate() {
        let wrap = |source: Error| Error::SweepMember { index, member: family.to_string(), source: Box::new(source) };
        family.validate().map_err(wrap)?;
        let u = family.generate(op.grid());
        let ratio = inequality.ratio(op, &u).map_err(wrap)?;
        let residual = scale_residual(op, inequality, &u).map_err(wrap)?;
        samples.push(RatioSample {
            label: family.to_string(),
            family: Some(*family),
            ratio,
            scale_residual: Some(residual),
            boundary_mass_fraction: Some(boundary_mass(&u) / mass(&u)),
        });
    }
    let description = format!("{inequality:?} over {} test functions", families.len());
    Ok(RatioReport::from_samples(inequality.tag(), description, samples))
}
