use serde::Serialize;

use super::{ExtReal, ModelParams, Num};
use crate::error::{Error, Result};

/// Space-exponent window for `s`-admissible pairs: `[2N/(N−2s), 2N/(N−4))` when
/// `N ≥ 5`, `[2, ∞)` otherwise. The upper end is always open.
pub fn admissible_window(dim: u32, s: Num) -> (Num, ExtReal) {
    let n = Num::int(dim as i64);
    if dim >= 5 {
        (2 * n / (n - 2 * s), ExtReal::upper_ratio(2 * n, n - 4))
    } else {
        (Num::int(2), ExtReal::Infinity)
    }
}

fn in_window(dim: u32, s: Num, r: Num) -> bool {
    let (lo, hi) = admissible_window(dim, s);
    s < Num::int(2) && r >= lo && hi > r
}

/// `N(1/2 − 1/r) − s`, the value `4/p` must take.
fn four_over_p(dim: u32, s: Num, r: Num) -> Num {
    Num::int(dim as i64) * (Num::frac(1, 2) - r.recip()) - s
}

/// Time exponent `p` of the `s`-admissible pair with space exponent `r`.
pub fn pair_exponent(dim: u32, s: impl Into<Num>, r: impl Into<Num>) -> Result<ExtReal> {
    let (s, r) = (s.into(), r.into());
    if s >= Num::int(2) {
        return Err(Error::Admissibility(format!("regularity s = {s} must be < 2")));
    }
    if !in_window(dim, s, r) {
        let (lo, hi) = admissible_window(dim, s);
        return Err(Error::Admissibility(format!(
            "r = {r} outside [{lo}, {hi}) for N = {dim}, s = {s}"
        )));
    }
    let rhs = four_over_p(dim, s, r);
    if rhs.is_zero() {
        Ok(ExtReal::Infinity)
    } else if rhs < Num::ZERO {
        Err(Error::Admissibility(format!(
            "N(1/2-1/r) - s = {rhs} < 0 would need p < 0"
        )))
    } else {
        Ok(ExtReal::Finite(4 / rhs))
    }
}

/// Residual `4/p + s − N(1/2 − 1/r)` evaluated in floating point.
pub fn pair_residual(dim: u32, s: f64, p: f64, r: f64) -> f64 {
    4.0 / p + s - dim as f64 * (0.5 - 1.0 / r)
}

pub fn is_admissible(dim: u32, s: impl Into<Num>, p: ExtReal, r: impl Into<Num>) -> bool {
    let (s, r) = (s.into(), r.into());
    if !in_window(dim, s, r) {
        return false;
    }
    let lhs = match p {
        ExtReal::Infinity => Num::ZERO,
        ExtReal::Finite(p) if p > Num::ZERO => 4 / p,
        ExtReal::Finite(_) => return false,
    };
    lhs == four_over_p(dim, s, r)
}

/// The exponents `(p, k, m)` sharing the space exponent `r = 2 + ν` used in the
/// small-data scattering estimates.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScatteringPairTriple {
    pub nu: Num,
    pub r: Num,
    pub s_nu: Num,
    pub p: Num,
    pub k: Num,
    pub m: Num,
    /// Floating residuals of the three admissibility identities, in the order
    /// `(p,r)` at `s=0`, `(k,r)` at `s_ν`, `(m,r)` at `−s_ν`.
    pub residuals: [f64; 3],
}

pub fn scattering_triple(params: &ModelParams) -> Result<ScatteringPairTriple> {
    if params.dim < 2 {
        return Err(Error::Hypothesis("scattering triple needs N >= 2".into()));
    }
    let n = params.n();
    let nu = params.q - 1 - 2 * params.b / (n - 1);
    if nu <= Num::ZERO {
        return Err(Error::Hypothesis(format!("nu = q-1-2b/(N-1) = {nu} must be > 0")));
    }
    let s_nu = n / 2 - 4 / nu;
    if s_nu <= Num::ZERO {
        return Err(Error::Hypothesis(format!("s_nu = N/2-4/nu = {s_nu} must be > 0")));
    }
    let r = 2 + nu;
    let num = 4 * nu * (2 + nu);
    let p = 8 * (2 + nu) / (n * nu);
    let k_den = 8 - (n - 4) * nu;
    let m_den = n * nu * nu + (n - 4) * nu - 8;
    if k_den <= Num::ZERO {
        return Err(Error::Admissibility(format!(
            "(k,r) not s_nu-admissible: 8-(N-4)nu = {k_den} <= 0 (s_nu = {s_nu} >= 2)"
        )));
    }
    if m_den <= Num::ZERO {
        return Err(Error::Admissibility(format!(
            "(m,r) not (-s_nu)-admissible: N nu^2+(N-4)nu-8 = {m_den} <= 0"
        )));
    }
    let k = num / k_den;
    let m = num / m_den;

    let checks = [("(p,r)", Num::ZERO, p), ("(k,r)", s_nu, k), ("(m,r)", -s_nu, m)];
    let mut residuals = [0.0; 3];
    for (slot, (label, s, exponent)) in residuals.iter_mut().zip(checks) {
        if !is_admissible(params.dim, s, ExtReal::Finite(exponent), r) {
            return Err(Error::Admissibility(format!(
                "{label} with exponent {exponent}, r = {r} is not {s}-admissible"
            )));
        }
        *slot = pair_residual(params.dim, s.to_f64(), exponent.to_f64(), r.to_f64());
    }
    Ok(ScatteringPairTriple { nu, r, s_nu, p, k, m, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{Rational, Sign};

    #[test]
    fn pair_exponent_examples() {
        assert_eq!(pair_exponent(6, Num::ZERO, Num::int(3)).unwrap(), Num::int(4));
        assert!(pair_exponent(5, Num::ZERO, Num::int(2)).unwrap().is_infinite());
        let p = pair_exponent(6, Num::frac(1, 2), Num::frac(18, 5)).unwrap();
        assert_eq!(p.finite().unwrap().as_rational(), Some(Rational::new(24, 5)));
    }

    #[test]
    fn pair_exponent_rejects_out_of_window() {
        assert!(matches!(pair_exponent(6, Num::ZERO, Num::int(6)), Err(Error::Admissibility(_))));
        assert!(pair_exponent(6, Num::frac(1, 2), Num::int(2)).is_err());
        // N <= 4: r = 2 is in the window but s > 0 would need p < 0
        assert!(pair_exponent(3, Num::frac(1, 2), Num::int(2)).is_err());
        assert!(pair_exponent(3, Num::int(2), Num::int(3)).is_err());
    }

    #[test]
    fn admissibility_examples() {
        assert!(is_admissible(6, Num::ZERO, ExtReal::Finite(Num::int(4)), Num::int(3)));
        assert!(!is_admissible(6, Num::ZERO, ExtReal::Finite(Num::int(4)), Num::int(6)));
        assert!(is_admissible(3, Num::ZERO, ExtReal::Infinity, Num::int(2)));
        assert!(!is_admissible(6, Num::ZERO, ExtReal::Finite(Num::int(5)), Num::int(3)));
        assert!(!is_admissible(6, Num::ZERO, ExtReal::Finite(Num::int(-4)), Num::int(3)));
    }

    #[test]
    fn scattering_triple_n6_b1_q3() {
        let params = ModelParams::new(6, Num::int(1), Num::int(3), Sign::Minus).unwrap();
        let t = scattering_triple(&params).unwrap();
        assert_eq!(t.nu, Num::frac(8, 5));
        assert_eq!(t.r, Num::frac(18, 5));
        assert_eq!(t.s_nu, Num::frac(1, 2));
        assert_eq!(t.p, Num::int(3));
        assert_eq!(t.k, Num::frac(24, 5));
        assert_eq!(t.m, Num::frac(24, 11));
        assert!(t.residuals.iter().all(|r| *r == 0.0 || r.abs() < 1e-15));
        // the k exponent is the pair_exponent of (N=6, s=1/2, r=3.6)
        assert_eq!(pair_exponent(6, t.s_nu, t.r).unwrap(), t.k);
        // coincides with the critical index for this tuple
        assert_eq!(t.s_nu, params.s_c());
    }

    #[test]
    fn scattering_triple_rejects_nonpositive_s_nu() {
        let params = ModelParams::new(6, Num::ZERO, Num::frac(3, 2), Sign::Minus).unwrap();
        assert!(matches!(scattering_triple(&params), Err(Error::Hypothesis(_))));
        let params = ModelParams::new(6, Num::int(10), Num::int(2), Sign::Minus).unwrap();
        assert!(scattering_triple(&params).is_err());
    }
}
