//! Exponent arithmetic for `i∂_t v + Δ²v = −ε|x|^b |v|^{q−1} v`.
//!
//! Everything here is pure arithmetic on [`Num`]: critical exponents,
//! admissible pairs, and the hypotheses of the local/global theorems.

mod num;
mod pairs;
mod regimes;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use num::{ExtReal, Num, Rational, FLOAT_TOLERANCE};
pub use pairs::{
    admissible_window, is_admissible, pair_exponent, pair_residual, scattering_triple,
    ScatteringPairTriple,
};
pub use regimes::{
    classify_all, classify_energy_local, classify_global_extension, classify_h1_local,
    classify_small_data_global, Condition, Interval, RegimeReport, TheoremTag, Verdict,
    SMALL_DATA_ONLY,
};

/// Sign of the nonlinearity: `+1` defocusing, `-1` focusing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = Error;
    fn try_from(v: i8) -> Result<Sign> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::InvalidParameter(format!("eps must be +1 or -1, got {v}"))),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// The tuple `(N, b, q, ε)` defining one instance of the equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawParams")]
pub struct ModelParams {
    #[serde(rename = "N")]
    pub dim: u32,
    pub b: Num,
    pub q: Num,
    pub eps: Sign,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(rename = "N")]
    dim: u32,
    b: Num,
    q: Num,
    eps: Sign,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<ModelParams> {
        ModelParams::new(r.dim, r.b, r.q, r.eps)
    }
}

impl ModelParams {
    pub fn new(dim: u32, b: impl Into<Num>, q: impl Into<Num>, eps: Sign) -> Result<ModelParams> {
        let p = ModelParams { dim, b: b.into(), q: q.into(), eps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::InvalidParameter("dimension N must be >= 1".into()));
        }
        if !self.b.is_finite() || self.b < Num::ZERO {
            return Err(Error::InvalidParameter(format!("b = {} must be >= 0", self.b)));
        }
        if !self.q.is_finite() || self.q <= Num::ONE {
            return Err(Error::InvalidParameter(format!("q = {} must be > 1", self.q)));
        }
        Ok(())
    }

    pub fn n(&self) -> Num {
        Num::int(self.dim as i64)
    }

    pub fn b_f64(&self) -> f64 {
        self.b.to_f64()
    }

    pub fn q_f64(&self) -> f64 {
        self.q.to_f64()
    }

    /// `q_m = 1 + (8+2b)/N`.
    pub fn q_mass(&self) -> Num {
        1 + (8 + 2 * self.b) / self.n()
    }

    /// `q^e_s`: `1 + (8+2b)/(N−2s)` for `N > 2s`, `+∞` otherwise.
    pub fn q_critical(&self, s: Num) -> ExtReal {
        ExtReal::upper_ratio(8 + 2 * self.b, self.n() - 2 * s) + Num::ONE
    }

    /// Energy-critical exponent `q^e = q^e_2`.
    pub fn q_energy(&self) -> ExtReal {
        self.q_critical(Num::int(2))
    }

    /// `s_c = N/2 − (4+b)/(q−1)`.
    pub fn s_c(&self) -> Num {
        self.n() / 2 - (4 + self.b) / (self.q - 1)
    }

    /// `D = (Nq − N − 2b)/4`, the Gagliardo–Nirenberg exponent on `‖Δv‖`.
    pub fn gn_exponent(&self) -> Num {
        (self.n() * self.q - self.n() - 2 * self.b) / 4
    }

    /// Amplitude exponent `(4+b)/(q−1)` of the scaling family.
    pub fn scaling_exponent(&self) -> Num {
        (4 + self.b) / (self.q - 1)
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={} b={} q={} eps={}", self.dim, self.b, self.q, self.eps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalData {
    pub s_c: Num,
    pub q_m: Num,
    /// `q^e_s` for the requested regularity `s`.
    pub q_e: ExtReal,
    #[serde(rename = "D")]
    pub d: Num,
}

pub fn critical_data(params: &ModelParams, s: impl Into<Num>) -> Result<CriticalData> {
    if params.q <= Num::ONE {
        return Err(Error::InvalidParameter(format!(
            "q = {} must exceed 1 (s_c divides by q-1)",
            params.q
        )));
    }
    Ok(CriticalData {
        s_c: params.s_c(),
        q_m: params.q_mass(),
        q_e: params.q_critical(s.into()),
        d: params.gn_exponent(),
    })
}
