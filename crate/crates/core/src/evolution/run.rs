use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{strang_step, Trajectory};
use crate::error::{Error, Result};
use crate::grid::{
    boundary_mass, fmt_f64, mass, potential_energy, read_field_csv, GridSpec, RadialField, RadialGrid,
    SpectralLaplacian,
};
use crate::inequalities::TestFamily;
use crate::params::ModelParams;

/// Boundary mass above this share of the total halts a run.
pub const BOUNDARY_HALT_FRACTION: f64 = 1e-4;

fn default_amplitude() -> f64 {
    1.0
}

fn default_stride() -> usize {
    1
}

/// Either a test-family profile times an amplitude, or a field CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<TestFamily>,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl InitialData {
    pub fn family(family: TestFamily, amplitude: f64) -> InitialData {
        InitialData { family: Some(family), amplitude, file: None }
    }

    /// Relative file paths are resolved against `base`.
    pub fn generate(&self, grid: &Arc<RadialGrid>, base: Option<&Path>) -> Result<RadialField> {
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!("amplitude {} is not finite", self.amplitude)));
        }
        match (&self.family, &self.file) {
            (Some(family), None) => {
                family.validate()?;
                Ok(family.generate(grid).scale(self.amplitude.into()))
            }
            (None, Some(file)) => {
                let path = match base {
                    Some(dir) if file.is_relative() => dir.join(file),
                    _ => file.clone(),
                };
                let u = read_field_csv(std::fs::File::open(&path)?, grid)?;
                Ok(u.scale(self.amplitude.into()))
            }
            _ => Err(Error::InvalidParameter("initial data needs exactly one of `family` or `file`".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub params: ModelParams,
    pub grid: GridSpec,
    pub initial: InitialData,
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Ceiling `Θ` on `‖⟨Δ⟩v‖`.
    pub blowup_threshold: f64,
    /// Keep the field at every monitor sample.
    #[serde(default)]
    pub snapshots: bool,
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.grid.dim != self.params.dim {
            return Err(Error::InvalidParameter(format!(
                "grid dimension {} differs from model dimension {}",
                self.grid.dim, self.params.dim
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {} must be > 0", self.dt)));
        }
        if !(self.horizon.is_finite() && self.dt < self.horizon) {
            return Err(Error::InvalidParameter(format!("need dt < T, got dt = {}, T = {}", self.dt, self.horizon)));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("stride must be >= 1".into()));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::InvalidParameter("blowup_threshold must be > 0".into()));
        }
        Ok(())
    }

    pub fn build_operator(&self) -> Result<SpectralLaplacian> {
        SpectralLaplacian::new(&self.grid.build()?)
    }

    pub fn steps(&self) -> usize {
        ((self.horizon / self.dt) - 1e-9).ceil().max(1.0) as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    /// `‖⟨Δ⟩v‖` crossed the blow-up threshold.
    BlowupThreshold,
    /// Mass reached the outer tenth of the domain.
    BoundaryMass,
}

#[derive(Clone, Debug, Default)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub lap_norm: Vec<f64>,
    pub h2_norm: Vec<f64>,
    pub boundary_mass: Vec<f64>,
    pub blowup_time: Option<f64>,
    pub halt: Option<HaltReason>,
    pub steps: usize,
    pub snapshots: Option<Trajectory>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectorySummary {
    pub samples: usize,
    pub steps: usize,
    pub final_time: f64,
    pub max_mass_drift: f64,
    pub max_energy_drift: f64,
    pub max_h2norm: f64,
    pub blowup_flag: bool,
    pub blowup_time: Option<f64>,
    pub halt_reason: Option<HaltReason>,
}

impl TrajectoryRecord {
    pub fn blowup_flag(&self) -> bool {
        self.blowup_time.is_some()
    }

    /// `max_i |M(t_i) − M(0)| / M(0)`, or the absolute drift for zero data.
    pub fn max_mass_drift(&self) -> f64 {
        relative_drift(&self.mass)
    }

    /// Same as [`Self::max_mass_drift`] for the energy.
    pub fn max_energy_drift(&self) -> f64 {
        relative_drift(&self.energy)
    }

    /// `|E(t_last) − E(0)|`.
    pub fn final_energy_error(&self) -> f64 {
        match (self.energy.first(), self.energy.last()) {
            (Some(a), Some(b)) => (b - a).abs(),
            _ => 0.0,
        }
    }

    pub fn summary(&self) -> TrajectorySummary {
        TrajectorySummary {
            samples: self.times.len(),
            steps: self.steps,
            final_time: self.times.last().copied().unwrap_or(0.0),
            max_mass_drift: self.max_mass_drift(),
            max_energy_drift: self.max_energy_drift(),
            max_h2norm: self.h2_norm.iter().copied().fold(0.0, f64::max),
            blowup_flag: self.blowup_flag(),
            blowup_time: self.blowup_time,
            halt_reason: self.halt,
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["t", "mass", "energy", "lap_norm", "h2norm", "boundary_mass"])?;
        for i in 0..self.times.len() {
            out.write_record(
                [self.times[i], self.mass[i], self.energy[i], self.lap_norm[i], self.h2_norm[i], self.boundary_mass[i]]
                    .map(fmt_f64),
            )?;
        }
        out.flush()?;
        Ok(())
    }

    fn push(&mut self, op: &SpectralLaplacian, t: f64, v: &RadialField, params: &ModelParams) -> Result<()> {
        let c = op.analysis(v)?;
        let lap = op.sobolev_norm_coeffs(2.0, &c);
        let m = mass(v);
        let e = lap * lap + potential_energy(v, params);
        let h2 = op.bracket_norm_coeffs(2.0, &c);
        let bm = boundary_mass(v);
        if ![m, e, lap, h2, bm].iter().all(|x| x.is_finite()) || !v.is_finite() {
            return Err(Error::Numerical(format!("non-finite monitor value at t = {t}")));
        }
        self.times.push(t);
        self.mass.push(m);
        self.energy.push(e);
        self.lap_norm.push(lap);
        self.h2_norm.push(h2);
        self.boundary_mass.push(bm);
        Ok(())
    }
}

fn relative_drift(values: &[f64]) -> f64 {
    let Some(&first) = values.first() else { return 0.0 };
    let scale = if first != 0.0 { first.abs() } else { 1.0 };
    values.iter().map(|v| (v - first).abs() / scale).fold(0.0, f64::max)
}

/// Builds the grid and initial data from `config` and integrates to `T`.
pub fn evolve(config: &EvolutionConfig) -> Result<TrajectoryRecord> {
    config.validate()?;
    let op = config.build_operator()?;
    let v0 = config.initial.generate(op.grid(), None)?;
    evolve_from(&op, config, &v0)
}

/// Strang integration from `v0`; monitors are sampled every `stride` steps and
/// at the final time.
pub fn evolve_from(op: &SpectralLaplacian, config: &EvolutionConfig, v0: &RadialField) -> Result<TrajectoryRecord> {
    config.validate()?;
    op.check_grid(v0)?;
    let params = &config.params;
    let mut record = TrajectoryRecord::default();
    record.push(op, 0.0, v0, params)?;
    if record.h2_norm[0] >= config.blowup_threshold {
        return Err(Error::InvalidParameter(format!(
            "blowup_threshold {} must exceed the initial H2 norm {}",
            config.blowup_threshold, record.h2_norm[0]
        )));
    }
    let mut snapshots = config.snapshots.then(|| (vec![0.0], vec![v0.clone()]));
    let n = config.steps();
    let mut v = v0.clone();
    let mut t = 0.0;
    for k in 1..=n {
        let next_t = if k == n { config.horizon } else { k as f64 * config.dt };
        v = strang_step(op, &v, next_t - t, params)?;
        t = next_t;
        record.steps = k;
        if k % config.stride != 0 && k != n {
            continue;
        }
        record.push(op, t, &v, params)?;
        if let Some((times, fields)) = snapshots.as_mut() {
            times.push(t);
            fields.push(v.clone());
        }
        let last = record.times.len() - 1;
        if record.h2_norm[last] > config.blowup_threshold {
            record.blowup_time = Some(t);
            record.halt = Some(HaltReason::BlowupThreshold);
            break;
        }
        if record.boundary_mass[last] > BOUNDARY_HALT_FRACTION * record.mass[last] {
            record.halt = Some(HaltReason::BoundaryMass);
            break;
        }
    }
    if let Some((times, fields)) = snapshots {
        record.snapshots = Some(Trajectory::new(times, fields)?);
    }
    Ok(record)
}
