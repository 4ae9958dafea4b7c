//! Hypothesis checkers for the local and global well-posedness results.
//!
//! Every report lists all of its conditions with the two sides that were
//! compared, even after one has failed, so the CLI can explain a verdict.

use std::fmt;

use serde::Serialize;

use super::{ExtReal, ModelParams, Num};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TheoremTag {
    /// Local theory in the energy space `H²_rd`.
    EnergyLocal,
    /// Local theory in `H¹_rd`.
    H1Local,
    /// Small-data global existence and scattering in `H²`.
    SmallDataGlobal,
    /// Extension of energy-space local solutions to global ones.
    GlobalExtension,
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    InScope,
    OutOfScope,
}

#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub name: String,
    pub satisfied: bool,
    pub left: Option<ExtReal>,
    pub right: Option<ExtReal>,
}

impl Condition {
    fn le(name: &str, left: impl Into<ExtReal>, right: impl Into<ExtReal>) -> Condition {
        let (left, right) = (left.into(), right.into());
        Condition { name: name.into(), satisfied: left <= right, left: Some(left), right: Some(right) }
    }

    fn lt(name: &str, left: impl Into<ExtReal>, right: impl Into<ExtReal>) -> Condition {
        let (left, right) = (left.into(), right.into());
        Condition { name: name.into(), satisfied: left < right, left: Some(left), right: Some(right) }
    }

    fn flag(name: &str, satisfied: bool) -> Condition {
        Condition { name: name.into(), satisfied, left: None, right: None }
    }
}

/// A real interval of admissible `q`; either end may be open or closed.
#[derive(Clone, Debug, Serialize)]
pub struct Interval {
    pub label: String,
    pub lower: ExtReal,
    pub upper: ExtReal,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl Interval {
    pub fn contains(&self, x: Num) -> bool {
        let x = ExtReal::Finite(x);
        let above = if self.lower_closed { x >= self.lower } else { x > self.lower };
        let below = if self.upper_closed { x <= self.upper } else { x < self.upper };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        match self.lower.cmp_ext(&self.upper) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Equal => !(self.lower_closed && self.upper_closed),
            std::cmp::Ordering::Less => false,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lower_closed { '[' } else { '(' };
        let close = if self.upper_closed { ']' } else { ')' };
        write!(
            f,
            "{open}{:.6}, {:.6}{close}",
            self.lower.to_f64(),
            self.upper.to_f64()
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RegimeReport {
    pub theorem: TheoremTag,
    pub verdict: Verdict,
    pub conditions: Vec<Condition>,
    /// Admissible `q` for the given `(N, b)`; empty when `(N, b)` alone
    /// already rules the theorem out.
    pub q_intervals: Vec<Interval>,
    /// Qualifiers such as `small-data-only` at an energy-critical endpoint.
    pub flags: Vec<String>,
    pub notes: Vec<String>,
}

impl RegimeReport {
    fn new(theorem: TheoremTag, conditions: Vec<Condition>) -> RegimeReport {
        let verdict = if conditions.iter().all(|c| c.satisfied) {
            Verdict::InScope
        } else {
            Verdict::OutOfScope
        };
        RegimeReport { theorem, verdict, conditions, q_intervals: vec![], flags: vec![], notes: vec![] }
    }

    pub fn in_scope(&self) -> bool {
        self.verdict == Verdict::InScope
    }

    pub fn q_in_intervals(&self, q: Num) -> bool {
        self.q_intervals.iter().any(|i| i.contains(q))
    }

    pub fn failed(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| !c.satisfied)
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }
}

pub const SMALL_DATA_ONLY: &str = "small-data-only";

/// `2b/(N−1)`, infinite in dimension one unless `b = 0`.
fn weight_shift(p: &ModelParams) -> ExtReal {
    if p.dim == 1 {
        return if p.b.is_zero() { ExtReal::Finite(Num::ZERO) } else { ExtReal::Infinity };
    }
    ExtReal::Finite(2 * p.b / (p.n() - 1))
}

fn closed(label: &str, lower: ExtReal, upper: ExtReal) -> Interval {
    Interval { label: label.into(), lower, upper, lower_closed: true, upper_closed: true }
}

/// All four classifiers in a fixed order.
pub fn classify_all(p: &ModelParams, small_mass: bool) -> Vec<RegimeReport> {
    vec![
        classify_energy_local(p),
        classify_h1_local(p),
        classify_small_data_global(p),
        classify_global_extension(p, small_mass),
    ]
}

pub fn classify_energy_local(p: &ModelParams) -> RegimeReport {
    let n = p.n();
    let q_e = p.q_energy();
    let lower = weight_shift(p) + (1 + 2 / n);

    let mut conditions = vec![Condition::le("5 <= N", Num::int(5), n)];
    let b_ok = if p.dim == 5 {
        let lo = Condition::le("2/9 <= b", Num::frac(2, 9), p.b);
        let hi = Condition::le("b <= 38/45", p.b, Num::frac(38, 45));
        let ok = lo.satisfied && hi.satisfied;
        conditions.extend([lo, hi]);
        ok
    } else {
        let c = Condition::le("b <= (N-1)(4+3N)/(3N)", p.b, (n - 1) * (4 + 3 * n) / (3 * n));
        let ok = c.satisfied;
        conditions.push(c);
        ok
    };
    conditions.push(Condition::le("1+2/N+2b/(N-1) <= q", lower, p.q));
    conditions.push(Condition::le("q <= q^e = 1+(8+2b)/(N-4)", p.q, q_e));
    let mut report = RegimeReport::new(TheoremTag::EnergyLocal, conditions);

    if p.dim >= 5 && b_ok {
        if p.dim == 5 {
            let first_hi = ExtReal::Finite(1 + 2 * p.b / (n - 4) + n / (n - 2));
            let second_lo = weight_shift(p) + (1 + 2 / (n - 4));
            report.q_intervals = vec![
                closed("[1+2b/(N-1)+2/N, 1+2b/(N-4)+N/(N-2)]", lower, first_hi),
                closed("[1+2b/(N-1)+2/(N-4), q^e]", second_lo, q_e),
            ];
        } else {
            report.q_intervals = vec![closed("[1+2b/(N-1)+2/N, 1+(8+2b)/(N-4)]", lower, q_e)];
        }
    }
    if q_e == p.q {
        report.flags.push(SMALL_DATA_ONLY.into());
        report.notes.push("q = q^e: existence requires small H^2 data".into());
    }
    report
}

pub fn classify_h1_local(p: &ModelParams) -> RegimeReport {
    let n = p.n();
    let q_e1 = p.q_critical(Num::ONE);
    let lower = weight_shift(p) + Num::ONE;
    let b_bound = 4 * (n - 1);
    let conditions = vec![
        Condition::le("3 <= N", Num::int(3), n),
        Condition::le("b <= 4(N-1)", p.b, b_bound),
        Condition::le("1+2b/(N-1) <= q", lower, p.q),
        Condition::le("q <= q_1^e = 1+(8+2b)/(N-2)", p.q, q_e1),
    ];
    let mut report = RegimeReport::new(TheoremTag::H1Local, conditions);
    if p.dim >= 3 && p.b <= b_bound {
        report.q_intervals = vec![closed("[1+2b/(N-1), 1+(8+2b)/(N-2)]", lower, q_e1)];
    }
    if q_e1 == p.q {
        report.flags.push(SMALL_DATA_ONLY.into());
        report.notes.push("q = q_1^e: existence requires small H^1 data".into());
    }
    report
}

pub fn classify_small_data_global(p: &ModelParams) -> RegimeReport {
    let n = p.n();
    let q_m = p.q_mass();
    let q_e = p.q_energy();
    let weighted_lower = weight_shift(p) + Num::int(2);
    let conditions = vec![
        Condition::le("5 <= N", Num::int(5), n),
        Condition::le("2+2b/(N-1) <= q", weighted_lower, p.q),
        Condition::lt("q_m = 1+(8+2b)/N < q", q_m, p.q),
        Condition::lt("q < q^e = 1+(8+2b)/(N-4)", p.q, q_e),
    ];
    let mut report = RegimeReport::new(TheoremTag::SmallDataGlobal, conditions);

    // max{q_m, 2+2b/(N-1)}; a tie keeps the strict q_m bound for membership.
    let weighted_active = weighted_lower >= ExtReal::Finite(q_m);
    let (lower, lower_closed) = if weighted_lower > ExtReal::Finite(q_m) {
        (weighted_lower, true)
    } else {
        (ExtReal::Finite(q_m), false)
    };
    report.notes.push(if weighted_active {
        format!("active lower bound: 2+2b/(N-1) = {weighted_lower}")
    } else {
        format!("active lower bound: q_m = {q_m}")
    });
    if p.dim > 12 {
        report.notes.push(format!(
            "non-empty q-range requires b > (N-1)(N-12)/6 = {}",
            (n - 1) * (n - 12) / 6
        ));
    }
    if p.dim >= 5 {
        let interval = Interval {
            label: "[max{q_m, 2+2b/(N-1)}, q^e)".into(),
            lower,
            upper: q_e,
            lower_closed,
            upper_closed: false,
        };
        if !interval.is_empty() {
            report.q_intervals = vec![interval];
        }
    }
    report
}

/// Whether an energy-space local solution extends globally. `small_mass`
/// stands for the smallness of `‖v₀‖` required at `q = q_m`.
pub fn classify_global_extension(p: &ModelParams, small_mass: bool) -> RegimeReport {
    let local = classify_energy_local(p);
    let q_m = p.q_mass();
    let q_e = p.q_energy();
    let subcritical = p.q < q_m;
    let critical_small = p.q == q_m && small_mass;
    let defocusing = p.eps == super::Sign::Plus && ExtReal::Finite(p.q) < q_e;
    let conditions = vec![
        Condition::flag("energy-local hypotheses hold", local.in_scope()),
        Condition::flag(
            "q < q_m, or q = q_m with small mass, or eps = +1 with q < q^e",
            subcritical || critical_small || defocusing,
        ),
    ];
    let mut report = RegimeReport::new(TheoremTag::GlobalExtension, conditions);
    report.q_intervals = local.q_intervals;
    report.notes = vec![
        format!("branch q < q_m (q_m = {q_m}): {subcritical}"),
        format!("branch q = q_m with small mass: {critical_small}"),
        format!("branch eps = +1 with q < q^e: {defocusing}"),
        if report.in_scope() { "global".into() } else { "local only".into() },
    ];
    report
}
