use serde::Serialize;

use super::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::params::{ModelParams, Sign};

/// Evaluation of the focusing a-priori bound along a trajectory.
///
/// With `S ≤ Ĉ‖v‖^{1+q−D}‖Δv‖^D` and `E = ‖Δv‖² − 2S/(1+q)`, conservation of
/// energy gives `G(t) = E(v₀) − ‖Δv‖²(1 − c‖v‖^{1+q−D}‖Δv‖^{D−2}) ≥ 0` with
/// `c = 2Ĉ/(1+q)`.
#[derive(Clone, Debug, Serialize)]
pub struct GlobalBoundReport {
    pub gn_constant: f64,
    #[serde(rename = "D")]
    pub d: f64,
    /// `D < 2`.
    pub d_below_two: bool,
    /// `q < q_m`.
    pub mass_subcritical: bool,
    /// The two flags above agree.
    pub consistent: bool,
    pub margins: Vec<f64>,
    /// Sample indices where `G(t_i)` is negative beyond rounding.
    pub violations: Vec<usize>,
    /// Largest `‖Δv‖` compatible with the bound, when `D < 2`.
    pub ceiling: Option<f64>,
    pub max_lap_norm: f64,
    pub below_ceiling: Option<bool>,
}

/// Requires a focusing model and an empirical Gagliardo–Nirenberg constant
/// `Ĉ`, e.g. the `max_ratio` of a `gn` sweep.
pub fn global_bound_check(
    record: &TrajectoryRecord,
    params: &ModelParams,
    gn_constant: Option<f64>,
) -> Result<GlobalBoundReport> {
    if params.eps != Sign::Minus {
        return Err(Error::Hypothesis("the a-priori bound applies to the focusing case eps = -1 only".into()));
    }
    let c_hat = gn_constant.ok_or_else(|| {
        Error::InvalidParameter("no Gagliardo-Nirenberg constant given; run a `gn` inequality sweep first".into())
    })?;
    if !(c_hat > 0.0 && c_hat.is_finite()) {
        return Err(Error::InvalidParameter(format!("Gagliardo-Nirenberg constant {c_hat} must be > 0")));
    }
    if record.times.is_empty() {
        return Err(Error::InvalidParameter("empty trajectory".into()));
    }
    let q = params.q_f64();
    let d_num = params.gn_exponent();
    let d = d_num.to_f64();
    let c = 2.0 * c_hat / (1.0 + q);
    let e0 = record.energy[0];
    let lower = |l2: f64, lap: f64| lap * lap - c * l2.powf(1.0 + q - d) * lap.powf(d);
    let mut margins = Vec::with_capacity(record.times.len());
    let mut violations = Vec::new();
    for i in 0..record.times.len() {
        let (l2, lap) = (record.mass[i].sqrt(), record.lap_norm[i]);
        let g = e0 - lower(l2, lap);
        let slack = 1e-10 * (e0.abs() + lap * lap);
        if g < -slack {
            violations.push(i);
        }
        margins.push(g);
    }
    let max_lap_norm = record.lap_norm.iter().copied().fold(0.0, f64::max);
    let d_below_two = d_num < crate::params::Num::int(2);
    let ceiling = if d_below_two { Some(ceiling(c * record.mass[0].sqrt().powf(1.0 + q - d), d, e0)) } else { None };
    Ok(GlobalBoundReport {
        gn_constant: c_hat,
        d,
        d_below_two,
        mass_subcritical: params.q < params.q_mass(),
        consistent: d_below_two == (params.q < params.q_mass()),
        margins,
        violations,
        ceiling,
        max_lap_norm,
        below_ceiling: ceiling.map(|x| max_lap_norm <= x),
    })
}

/// Largest `L ≥ 0` with `L² − a L^D ≤ e`, for `0 < D < 2`.
///
/// `f(L) = L² − aL^D` decreases up to `L_min = (aD/2)^{1/(2−D)}` and then
/// increases without bound, so the answer is found by bisection on
/// `[L_min, ∞)`.
fn ceiling(a: f64, d: f64, e: f64) -> f64 {
    let f = |l: f64| l * l - a * l.powf(d);
    let mut lo = (a * d / 2.0).powf(1.0 / (2.0 - d));
    if f(lo) > e {
        return lo;
    }
    let mut hi = lo.max(1.0);
    while f(hi) <= e {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= e {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}
