use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use crate::config::{Experiment, InequalityConfig, PicardConfig, RegimesConfig, StrichartzConfig};
use crate::manifest::OutputFile;
use ibnls_core::evolution::{
    evolve_from, lambda_echo, picard_cross_check, scattering_cauchy_check, scattering_profile,
    strichartz_sweep, EvolutionConfig,
};
use ibnls_core::grid::{build_grid, write_field_csv};
use ibnls_core::inequalities::{default_families, sweep};
use ibnls_core::params::{classify_all, RegimeReport};
use ibnls_core::{Result, SpectralLaplacian};

/// What a command produced: text for stdout and files for the output
/// directory.
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<OutputFile>,
}

/// Runs `experiment`; relative data-file paths resolve against `base`.
pub fn run(experiment: &Experiment, base: Option<&Path>, json_stdout: bool) -> Result<Outcome> {
    match experiment {
        Experiment::Regimes(c) => regimes(c, json_stdout),
        Experiment::Inequality(c) => inequality(c),
        Experiment::Simulate(c) => simulate(c, base),
        Experiment::Picard(c) => picard(c, base),
        Experiment::Strichartz(c) => strichartz(c),
        Experiment::Scatter(c) => scatter(c, base),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<Value> {
    Ok(serde_json::to_value(value)?)
}

fn pretty(value: &Value) -> Result<String> {
    Ok(String::from_utf8(crate::manifest::pretty(value)?).expect("JSON is UTF-8"))
}

fn regimes(config: &RegimesConfig, json_stdout: bool) -> Result<Outcome> {
    let params = config.params()?;
    let reports = classify_all(&params, config.small_mass);
    let doc = json!({
        "params": to_json(&params)?,
        "small_mass": config.small_mass,
        "s_c": params.s_c().to_f64(),
        "q_m": params.q_mass().to_f64(),
        "q_e": to_json(&params.q_energy())?,
        "D": params.gn_exponent().to_f64(),
        "reports": to_json(&reports)?,
    });
    let stdout = if json_stdout { pretty(&doc)? } else { regime_table(&params, &reports) };
    Ok(Outcome { stdout, files: vec![OutputFile::json("regimes.json", doc)] })
}

fn regime_table(params: &ibnls_core::ModelParams, reports: &[RegimeReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{params}  s_c = {}  q_m = {}  q^e = {}  D = {}",
        params.s_c(),
        params.q_mass(),
        params.q_energy(),
        params.gn_exponent()
    );
    for report in reports {
        let flags = if report.flags.is_empty() { String::new() } else { format!("  [{}]", report.flags.join(", ")) };
        let _ = writeln!(out, "{:<18}{:?}{flags}", report.theorem.to_string(), report.verdict);
        for c in report.failed() {
            match (&c.left, &c.right) {
                (Some(l), Some(r)) => {
                    let _ = writeln!(out, "    fails {}: {l} vs {r}", c.name);
                }
                _ => {
                    let _ = writeln!(out, "    fails {}", c.name);
                }
            }
        }
        for interval in &report.q_intervals {
            let _ = writeln!(out, "    q in {interval}  {}", interval.label);
        }
        for note in &report.notes {
            let _ = writeln!(out, "    {note}");
        }
    }
    out
}

fn inequality(config: &InequalityConfig) -> Result<Outcome> {
    let inequality = config.inequality()?;
    inequality.check_hypothesis(config.dim)?;
    let families = config.families.clone().unwrap_or_else(default_families);
    let grid = build_grid(config.dim, config.grid.radius, config.grid.points)?;
    let op = SpectralLaplacian::new(&grid)?;
    let report = sweep(&op, &inequality, &families)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    let summary = json!({
        "inequality": to_json(&inequality)?,
        "grid": to_json(&grid.spec())?,
        "members": report.samples.len(),
        "max_ratio": report.max_ratio,
        "scale_invariance_residual": report.scale_invariance_residual,
    });
    let mut full = to_json(&report)?;
    full["grid"] = to_json(&grid.spec())?;
    Ok(Outcome {
        stdout: pretty(&summary)?,
        files: vec![OutputFile::csv("sweep.csv", csv), OutputFile::json("summary.json", full)],
    })
}

fn prepare(config: &EvolutionConfig, base: Option<&Path>) -> Result<(SpectralLaplacian, ibnls_core::RadialField)> {
    config.validate()?;
    let op = config.build_operator()?;
    let v0 = config.initial.generate(op.grid(), base)?;
    Ok((op, v0))
}

fn simulate(config: &EvolutionConfig, base: Option<&Path>) -> Result<Outcome> {
    let (op, v0) = prepare(config, base)?;
    let record = evolve_from(&op, config, &v0)?;
    let summary = to_json(&record.summary())?;
    let mut csv = Vec::new();
    record.write_csv(&mut csv)?;
    let mut files = vec![OutputFile::csv("trajectory.csv", csv), OutputFile::json("summary.json", summary.clone())];
    if let Some(snaps) = &record.snapshots {
        for (i, field) in snaps.fields.iter().enumerate() {
            let mut bytes = Vec::new();
            write_field_csv(&mut bytes, field)?;
            files.push(OutputFile::csv(format!("snapshots/field_{i:05}.csv"), bytes));
        }
    }
    Ok(Outcome { stdout: pretty(&summary)?, files })
}

fn picard(config: &PicardConfig, base: Option<&Path>) -> Result<Outcome> {
    config.params.validate()?;
    if config.grid.dim != config.params.dim {
        return Err(ibnls_core::Error::InvalidParameter("grid and model dimensions differ".into()));
    }
    let op = SpectralLaplacian::new(&config.grid.build()?)?;
    let v0 = config.initial.generate(op.grid(), base)?;
    let (_, diag) = picard_cross_check(
        &op,
        &v0,
        config.horizon,
        &config.params,
        config.n_t,
        config.tol,
        config.max_iter,
        config.dt,
    )?;
    let mut doc = to_json(&diag)?;
    doc["contracting"] = Value::Bool(diag.contracting());
    doc["within_budget"] = to_json(&diag.within_budget())?;
    Ok(Outcome { stdout: pretty(&doc)?, files: vec![OutputFile::json("picard.json", doc)] })
}

fn strichartz(config: &StrichartzConfig) -> Result<Outcome> {
    let op = SpectralLaplacian::new(&config.grid.build()?)?;
    let report = strichartz_sweep(
        &op,
        &config.families,
        config.amplitude,
        config.s,
        &config.pairs(),
        config.horizon,
        config.n_t,
    )?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    let doc = to_json(&report)?;
    let summary = json!({ "max_ratio": report.max_ratio, "members": report.samples.len() });
    Ok(Outcome {
        stdout: pretty(&summary)?,
        files: vec![OutputFile::csv("strichartz.csv", csv), OutputFile::json("strichartz.json", doc)],
    })
}

fn scatter(config: &EvolutionConfig, base: Option<&Path>) -> Result<Outcome> {
    let config = EvolutionConfig { snapshots: true, ..config.clone() };
    let (op, v0) = prepare(&config, base)?;
    let record = evolve_from(&op, &config, &v0)?;
    let snaps = record.snapshots.as_ref().expect("snapshots requested");
    let report = scattering_cauchy_check(&op, snaps)?;
    let echo = match lambda_echo(&op, snaps, &v0, &config.params) {
        Ok(echo) => to_json(&echo)?,
        Err(e) if e.is_hypothesis() => json!({ "skipped": e.to_string() }),
        Err(e) => return Err(e),
    };
    let doc = json!({
        "summary": to_json(&record.summary())?,
        "scattering": to_json(&report)?,
        "lambda_echo": echo,
    });
    let mut csv = Vec::new();
    record.write_csv(&mut csv)?;
    let profile = scattering_profile(&op, snaps)?;
    let mut psi = Vec::new();
    write_field_csv(&mut psi, profile.fields.last().expect("non-empty"))?;
    let stdout = pretty(&json!({
        "final_third_nonincreasing": report.final_third_nonincreasing,
        "max_increment": report.max_increment,
        "profile_h2_norm": report.profile_h2_norm,
        "halt_reason": to_json(&record.halt)?,
    }))?;
    Ok(Outcome {
        stdout,
        files: vec![
            OutputFile::json("scatter.json", doc),
            OutputFile::csv("trajectory.csv", csv),
            OutputFile::csv("profile.csv", psi),
        ],
    })
}
