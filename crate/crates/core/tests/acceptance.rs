//! Acceptance criteria, one pass/fail line each. Run with
//! `cargo test -p ibnls-core --test acceptance`.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ibnls_core::evolution::{
    evolve, evolve_from, free_propagate, free_trajectory, picard_cross_check, scattering_cauchy_check,
    EvolutionConfig, Trajectory,
};
use ibnls_core::grid::{build_grid, mass, rescale, weighted_source_integral};
use ibnls_core::inequalities::{
    default_families, gn_ratio, hardy_ratio, interpolation_ratio, scale_residual, strauss_ratio, sweep,
};
use ibnls_core::params::{
    classify_energy_local, classify_global_extension, classify_h1_local, classify_small_data_global,
    scattering_triple, RegimeReport, SMALL_DATA_ONLY,
};
use ibnls_core::{Inequality, ModelParams, Num, RadialField, Sign, SpectralLaplacian, TestFamily};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn params(dim: u32, b: Num, q: Num, eps: Sign) -> ModelParams {
    ModelParams::new(dim, b, q, eps).expect("valid parameters")
}

fn gaussian(op: &SpectralLaplacian, amplitude: f64) -> RadialField {
    RadialField::from_real(op.grid(), |r| amplitude * (-r * r / 2.0).exp())
}

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn load_config(name: &str) -> EvolutionConfig {
    let text = std::fs::read_to_string(config_path(name)).expect("config file");
    serde_json::from_str(&text).expect("config parses")
}

/// A rational in `[lo, hi]` with denominator at most `max_den`.
fn random_rational(rng: &mut StdRng, lo: i64, hi: i64, max_den: i64) -> Num {
    let den = rng.random_range(1..=max_den);
    Num::frac(rng.random_range(lo * den..=hi * den), den)
}

fn exponent_algebra() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut critical = 0;
    for i in 0..1000 {
        let dim = rng.random_range(1..=12);
        let b = random_rational(&mut rng, 0, 4, 9);
        let n = Num::int(dim as i64);
        let q_m = 1 + (8 + 2 * b) / n;
        // every other tuple sits exactly on the mass-critical exponent
        let q = if i % 2 == 0 {
            q_m
        } else {
            let den = rng.random_range(1..=9);
            1 + Num::frac(rng.random_range(1..=10 * den), den)
        };
        let p = params(dim, b, q, Sign::Minus);
        if p.s_c().is_zero() != (q == q_m) {
            return Err(format!("N={dim} b={b} q={q}: s_c = {} but q_m = {q_m}", p.s_c()));
        }
        if q == q_m {
            critical += 1;
            if p.gn_exponent() != Num::int(2) {
                return Err(format!("N={dim} b={b}: D = {} at q_m", p.gn_exponent()));
            }
        }
    }

    let f = |n: i64, d: i64| Num::frac(n, d);
    let i = Num::int;
    let local_examples: [(&str, RegimeReport, bool, bool); 9] = [
        ("E (6,1,2)", classify_energy_local(&params(6, i(1), i(2), Sign::Minus)), true, false),
        ("E (5,0.1,2)", classify_energy_local(&params(5, f(1, 10), i(2), Sign::Minus)), false, false),
        ("E (6,1,6)", classify_energy_local(&params(6, i(1), i(6), Sign::Minus)), true, true),
        ("H1 (3,1,5)", classify_h1_local(&params(3, i(1), i(5), Sign::Minus)), true, false),
        ("H1 (3,9,10)", classify_h1_local(&params(3, i(9), i(10), Sign::Minus)), false, false),
        ("H1 (3,0,1.5)", classify_h1_local(&params(3, i(0), f(3, 2), Sign::Minus)), true, false),
        ("G (6,1,3)", classify_small_data_global(&params(6, i(1), i(3), Sign::Minus)), true, false),
        ("G (6,1,2.5)", classify_small_data_global(&params(6, i(1), f(5, 2), Sign::Minus)), false, false),
        ("G (8,0,2.2)", classify_small_data_global(&params(8, i(0), f(11, 5), Sign::Minus)), true, false),
    ];
    for (label, report, in_scope, endpoint) in &local_examples {
        if report.in_scope() != *in_scope || report.has_flag(SMALL_DATA_ONLY) != *endpoint {
            return Err(format!("{label}: got {:?} flags {:?}", report.verdict, report.flags));
        }
    }
    let extension = [
        (params(6, i(1), i(2), Sign::Minus), false, true),
        (params(6, i(1), f(8, 3), Sign::Minus), true, true),
        (params(6, i(1), i(4), Sign::Minus), false, false),
    ];
    for (p, small, global) in &extension {
        if classify_global_extension(p, *small).in_scope() != *global {
            return Err(format!("global extension {p}: expected global = {global}"));
        }
    }
    Ok(format!("1000 tuples ({critical} at q_m), 9 classifier examples plus 3 extension examples"))
}

fn op5() -> SpectralLaplacian {
    SpectralLaplacian::new(&build_grid(5, 12.0, 2000).unwrap()).unwrap()
}

fn spectral_fidelity() -> Outcome {
    let op = op5();
    let u = gaussian(&op, 1.0);
    let p52 = PI.powf(2.5);
    let source = params(5, Num::int(1), Num::int(3), Sign::Plus);
    let measured = [
        ("mass", mass(&u), p52),
        ("grad", op.sobolev_norm(1.0, &u).unwrap().powi(2), 2.5 * p52),
        ("lap", op.sobolev_norm(2.0, &u).unwrap().powi(2), 8.75 * p52),
        ("source", weighted_source_integral(&u, &source), PI * PI / 3.0),
    ];
    let worst = measured.iter().map(|(_, got, want)| rel(*got, *want)).fold(0.0, f64::max);
    let detail = measured
        .iter()
        .map(|(name, got, want)| format!("{name} {:.1e}", rel(*got, *want)))
        .collect::<Vec<_>>()
        .join(", ");
    check(worst < 1e-4, format!("relative errors {detail}"))
}

fn unitarity_and_conservation() -> Outcome {
    let op = SpectralLaplacian::new(&build_grid(6, 12.0, 256).unwrap()).unwrap();
    let u = gaussian(&op, 1.0);
    let mut worst_free: f64 = 0.0;
    for t in [1e-3, 0.1, 1.0, 10.0] {
        let v = free_propagate(&op, &u, t).unwrap();
        for s in [0.0, 1.0, 2.0] {
            worst_free = worst_free.max(rel(op.sobolev_norm(s, &v).unwrap(), op.sobolev_norm(s, &u).unwrap()));
        }
    }
    if worst_free >= 1e-12 {
        return Err(format!("free flow changes a Sobolev norm by {worst_free:.2e}"));
    }

    let run = |radius: f64, points: usize, dt: f64, stride: usize| {
        let text = format!(
            r#"{{"params": {{"N": 6, "b": 1, "q": 3, "eps": -1}}, "grid": {{"N": 6, "R": {radius}, "M": {points}}},
                "initial": {{"family": {{"kind": "Gaussian", "a": 0.5}}}},
                "dt": {dt}, "T": 0.1, "stride": {stride}, "blowup_threshold": 1e6}}"#
        );
        let config: EvolutionConfig = serde_json::from_str(&text).unwrap();
        evolve(&config).unwrap()
    };
    let long = run(24.0, 512, 1e-5, 100);
    if long.steps != 10_000 || long.halt.is_some() {
        return Err(format!("long run stopped after {} steps ({:?})", long.steps, long.halt));
    }
    let drift = long.max_mass_drift();
    if drift >= 1e-12 {
        return Err(format!("mass drift {drift:.2e} over 10^4 steps"));
    }

    let errors: Vec<f64> = [1e-3, 5e-4, 2.5e-4].iter().map(|&dt| run(24.0, 512, dt, 10).final_energy_error()).collect();
    let slopes: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    check(
        slopes.iter().all(|s| (s - 2.0).abs() <= 0.3),
        format!(
            "free-flow norm error {worst_free:.1e}, 10^4-step mass drift {drift:.1e}, energy errors {:.2e} {:.2e} {:.2e}, slopes {:.3} {:.3}",
            errors[0], errors[1], errors[2], slopes[0], slopes[1]
        ),
    )
}

fn scale_invariance() -> Outcome {
    let p = params(6, Num::int(1), Num::int(3), Sign::Minus);
    let s_c = p.s_c().to_f64();
    let op6 = SpectralLaplacian::new(&build_grid(6, 20.0, 2000).unwrap()).unwrap();
    let u = gaussian(&op6, 1.0);
    let base = op6.sobolev_norm(s_c, &u).unwrap();
    let mut worst_norm: f64 = 0.0;
    for lambda in [0.5, 2.0] {
        let scaled = rescale(&u, lambda, &p);
        if scaled.truncated() {
            return Err(format!("rescale by {lambda} leaves the grid"));
        }
        worst_norm = worst_norm.max(rel(op6.sobolev_norm(s_c, &scaled.field).unwrap(), base));
    }

    // R = 25 keeps the λ = 1/2 dilation of the widest probe clear of the boundary
    let op = SpectralLaplacian::new(&build_grid(5, 25.0, 3000).unwrap()).unwrap();
    let gn = params(5, Num::int(1), Num::int(3), Sign::Plus);
    let inequalities = [
        Inequality::GagliardoNirenberg { params: gn },
        Inequality::Strauss { s: 0.5 },
        Inequality::Hardy { s: 1.0, rho: 2.0 },
        Inequality::Interpolation { rho: 2.0 },
    ];
    let mut parts = vec![format!("s_c-norm {worst_norm:.1e}")];
    let mut worst = worst_norm;
    for ineq in &inequalities {
        let mut r: f64 = 0.0;
        for a in [0.25, 0.5, 1.0] {
            let u = TestFamily::Gaussian { a }.generate(op.grid());
            r = r.max(scale_residual(&op, ineq, &u).map_err(|e| format!("{}: {e}", ineq.tag()))?);
        }
        parts.push(format!("{} {r:.1e}", ineq.tag()));
        worst = worst.max(r);
    }
    check(worst < 1e-3, format!("residuals {}", parts.join(", ")))
}

fn inequality_ceilings() -> Outcome {
    let families = default_families();
    let mut parts = Vec::new();
    for dim in [5u32, 6, 8] {
        let op = SpectralLaplacian::new(&build_grid(dim, 25.0, 3000).unwrap()).unwrap();
        let hardy = sweep(&op, &Inequality::Hardy { s: 1.0, rho: 2.0 }, &families).map_err(|e| e.to_string())?;
        let ceiling = 2.0 / (dim as f64 - 2.0);
        if hardy.max_ratio > ceiling + 1e-3 {
            return Err(format!("N={dim}: hardy max {} above {ceiling}", hardy.max_ratio));
        }
        parts.push(format!("hardy N={dim} max {:.4} (ceiling {ceiling:.4})", hardy.max_ratio));
        if dim == 5 {
            let gn = params(5, Num::int(1), Num::int(3), Sign::Plus);
            for ineq in [
                Inequality::Strauss { s: 0.5 },
                Inequality::FractionalStrauss { s: 1.5 },
                Inequality::GagliardoNirenberg { params: gn },
                Inequality::Interpolation { rho: 2.0 },
            ] {
                let report = sweep(&op, &ineq, &families).map_err(|e| e.to_string())?;
                if !report.all_finite() {
                    return Err(format!("{} sweep has non-finite ratios", ineq.tag()));
                }
                parts.push(format!("{} max {:.4e}", ineq.tag(), report.max_ratio));
            }
        }
    }

    // closed forms for u = e^{−r²/2} in N = 5; the quoted figures agree with
    // them to one unit in the last place
    let op = op5();
    let u = gaussian(&op, 1.0);
    let gn = params(5, Num::int(1), Num::int(3), Sign::Plus);
    let p52 = PI.powf(2.5);
    let spots = [
        ("hardy", hardy_ratio(&op, &u, 1.0, 2.0), (4.0f64 / 15.0).sqrt(), 0.5164f64, 4),
        ("strauss", strauss_ratio(&op, &u, 0.5), 2.0 / std::f64::consts::E / (p52 * 2.5 * p52).powf(0.25), 0.1398, 4),
        ("interpolation", interpolation_ratio(&op, &u, 2.0), 2.5 / 8.75f64.sqrt(), 0.845, 3),
        ("gn", gn_ratio(&op, &u, &gn), (PI * PI / 3.0) / (8.75 * p52 * p52), 1.23e-3, 3),
    ];
    for (name, got, exact, quoted, figures) in spots {
        let got = got.map_err(|e| format!("{name}: {e}"))?;
        let last_place = 10f64.powi(quoted.log10().floor() as i32 - figures + 1);
        if (exact - quoted).abs() > last_place || rel(got, exact) >= 1e-3 {
            return Err(format!("{name}: measured {got}, closed form {exact}, quoted {quoted}"));
        }
        parts.push(format!("{name} {got:.6} (closed form {exact:.6}, quoted {quoted})"));
    }
    Ok(parts.join("; "))
}

fn cross_solver() -> Outcome {
    let p = params(6, Num::int(1), Num::int(3), Sign::Minus);
    let op = SpectralLaplacian::new(&build_grid(6, 15.0, 200).unwrap()).unwrap();
    let v0 = gaussian(&op, 1e-2);
    let tol = 1e-14 * mass(&v0).sqrt();
    let (_, diag) = picard_cross_check(&op, &v0, 0.1, &p, 50, tol, 30, 1e-3).map_err(|e| e.to_string())?;
    let mismatch = diag.final_mismatch.unwrap_or(f64::NAN);
    let budget = diag.error_budget.unwrap_or(f64::NAN);
    check(
        diag.converged && diag.contracting() && diag.within_budget() == Some(true),
        format!(
            "{} iterations, ratios {:?}, mismatch {mismatch:.2e} within budget {budget:.2e}",
            diag.iterations,
            diag.ratios.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>()
        ),
    )
}

fn scattering_echo() -> Outcome {
    let config = EvolutionConfig { snapshots: true, ..load_config("scatter_small_data.json") };
    let op = config.build_operator().map_err(|e| e.to_string())?;
    let v0 = config.initial.generate(op.grid(), None).map_err(|e| e.to_string())?;
    let record = evolve_from(&op, &config, &v0).map_err(|e| e.to_string())?;
    if record.halt.is_some() {
        return Err(format!("small-data run halted: {:?}", record.halt));
    }
    let report = scattering_cauchy_check(&op, record.snapshots.as_ref().unwrap()).map_err(|e| e.to_string())?;
    let tail = &report.increments[report.final_third_start..];

    let linear = EvolutionConfig { snapshots: true, ..load_config("linear.json") };
    let linear_record = evolve_from(&op, &linear, &linear.initial.generate(op.grid(), None).unwrap()).unwrap();
    let linear_report = scattering_cauchy_check(&op, linear_record.snapshots.as_ref().unwrap()).unwrap();
    // the same data under the free flow alone
    let free: Trajectory = free_trajectory(&op, &v0, &report.times).unwrap();
    let free_report = scattering_cauchy_check(&op, &free).unwrap();
    check(
        report.final_third_nonincreasing && linear_report.max_increment < 1e-12 && free_report.max_increment < 1e-12,
        format!(
            "final third {:.3e} -> {:.3e} non-increasing: {}; linear-run max increment {:.1e}; free-flow max increment {:.1e}",
            tail.first().unwrap(),
            tail.last().unwrap(),
            report.final_third_nonincreasing,
            linear_report.max_increment,
            free_report.max_increment
        ),
    )
}

/// `4/x + s − N(1/2 − 1/r)` for the three pairs, from the reciprocals of the
/// exponents so that a vanishing or negative denominator stays finite.
fn triple_identity_residuals(p: &ModelParams) -> (f64, [f64; 3]) {
    let n = p.dim as f64;
    let nu = p.q_f64() - 1.0 - 2.0 * p.b_f64() / (n - 1.0);
    let r = 2.0 + nu;
    let s_nu = n / 2.0 - 4.0 / nu;
    let inv_p = n * nu / (8.0 * (2.0 + nu));
    let inv_k = (8.0 - (n - 4.0) * nu) / (4.0 * nu * (2.0 + nu));
    let inv_m = (n * nu * nu + (n - 4.0) * nu - 8.0) / (4.0 * nu * (2.0 + nu));
    let rhs = n * (0.5 - 1.0 / r);
    (s_nu, [4.0 * inv_p - rhs, 4.0 * inv_k + s_nu - rhs, 4.0 * inv_m - s_nu - rhs])
}

fn triple_admissibility() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let (mut tested, mut attempts) = (0, 0);
    let mut worst: f64 = 0.0;
    let mut out_of_range = Vec::new();
    while tested < 1000 {
        attempts += 1;
        if attempts > 1_000_000 {
            return Err(format!("only {tested} in-scope parameter sets found"));
        }
        let dim = rng.random_range(5..=12);
        let b = random_rational(&mut rng, 0, 6, 12);
        let q = 1 + random_rational(&mut rng, 0, 8, 12);
        let Ok(p) = ModelParams::new(dim, b, q, Sign::Minus) else { continue };
        if !classify_small_data_global(&p).in_scope() {
            continue;
        }
        tested += 1;
        let (s_nu, residuals) = triple_identity_residuals(&p);
        worst = residuals.iter().fold(worst, |m, r| m.max(r.abs()));
        match scattering_triple(&p) {
            Ok(triple) => {
                worst = triple.residuals.iter().fold(worst, |m, r| m.max(r.abs()));
            }
            Err(e) if e.is_hypothesis() => {
                out_of_range.push(format!("{p} (s_nu = {s_nu:.4})"));
            }
            Err(e) => return Err(format!("{p}: {e}")),
        }
    }
    let mut detail = format!("{tested} in-scope parameter sets, worst identity residual {worst:.1e}");
    if !out_of_range.is_empty() {
        detail.push_str(&format!(
            "; {} sets have a pair outside its admissible range (s_nu <= 0 or s_nu >= 2), e.g. {}",
            out_of_range.len(),
            out_of_range[0]
        ));
    }
    check(worst < 1e-12, detail)
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "exponent algebra", budget: Duration::from_secs(1), run: exponent_algebra },
        Criterion { id: 2, name: "quadrature and spectral fidelity", budget: Duration::from_secs(30), run: spectral_fidelity },
        Criterion { id: 3, name: "unitarity and conservation", budget: Duration::from_secs(300), run: unitarity_and_conservation },
        Criterion { id: 4, name: "scale invariance", budget: Duration::from_secs(60), run: scale_invariance },
        Criterion { id: 5, name: "inequality ceilings", budget: Duration::from_secs(120), run: inequality_ceilings },
        Criterion { id: 6, name: "Picard vs split-step", budget: Duration::from_secs(300), run: cross_solver },
        Criterion { id: 7, name: "scattering increments", budget: Duration::from_secs(300), run: scattering_echo },
        Criterion { id: 8, name: "scattering triple admissibility", budget: Duration::from_secs(1), run: triple_admissibility },
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (status, detail) = match &outcome {
            Ok(d) if elapsed <= c.budget => ("PASS", d.clone()),
            Ok(d) => ("FAIL", format!("{d} (over the {:?} budget)", c.budget)),
            Err(d) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("criterion {} {status} {} [{:.2?}]: {detail}", c.id, c.name, elapsed);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
