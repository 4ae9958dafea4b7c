//! JSON experiment configurations, one per command.

use serde::{Deserialize, Serialize};

use ibnls_core::evolution::{EvolutionConfig, InitialData, SpacetimePair};
use ibnls_core::params::{ExtReal, ModelParams, Num, Sign};
use ibnls_core::{Error, GridSpec, Inequality, Result, TestFamily};

fn focusing() -> Sign {
    Sign::Minus
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimesConfig {
    #[serde(rename = "N")]
    pub dim: u32,
    pub b: Num,
    pub q: Num,
    #[serde(default = "focusing")]
    pub eps: Sign,
    #[serde(default)]
    pub small_mass: bool,
}

impl RegimesConfig {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.dim, self.b, self.q, self.eps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InequalityTag {
    Strauss,
    FractionalStrauss,
    Hardy,
    Gn,
    Interpolation,
}

/// Radius and point count; the dimension comes from the surrounding config.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "M")]
    pub points: usize,
}

impl Default for SweepGrid {
    fn default() -> SweepGrid {
        SweepGrid { radius: 25.0, points: 3000 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityConfig {
    pub tag: InequalityTag,
    #[serde(rename = "N")]
    pub dim: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default)]
    pub grid: SweepGrid,
    /// Defaults to the built-in lattice when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<TestFamily>>,
}

impl InequalityConfig {
    pub fn inequality(&self) -> Result<Inequality> {
        let need = |what: &str, x: Option<f64>| {
            x.ok_or_else(|| Error::InvalidParameter(format!("`{}` requires --{what}", self.tag_name())))
        };
        Ok(match self.tag {
            InequalityTag::Strauss => Inequality::Strauss { s: need("s", self.s)? },
            InequalityTag::FractionalStrauss => Inequality::FractionalStrauss { s: need("s", self.s)? },
            InequalityTag::Hardy => Inequality::Hardy { s: self.s.unwrap_or(1.0), rho: self.rho.unwrap_or(2.0) },
            InequalityTag::Interpolation => Inequality::Interpolation { rho: self.rho.unwrap_or(2.0) },
            InequalityTag::Gn => {
                let missing = || Error::InvalidParameter("`gn` requires --b and --q".into());
                let params = ModelParams::new(
                    self.dim,
                    self.b.ok_or_else(missing)?,
                    self.q.ok_or_else(missing)?,
                    Sign::Plus,
                )?;
                Inequality::GagliardoNirenberg { params }
            }
        })
    }

    fn tag_name(&self) -> String {
        serde_json::to_value(self.tag).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardConfig {
    pub params: ModelParams,
    pub grid: GridSpec,
    pub initial: InitialData,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub n_t: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Step of the split-step reference solution.
    pub dt: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub p: ExtReal,
    pub r: Num,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrichartzConfig {
    pub grid: GridSpec,
    pub s: f64,
    pub pairs: Vec<PairSpec>,
    pub families: Vec<TestFamily>,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub n_t: usize,
}

fn one() -> f64 {
    1.0
}

impl StrichartzConfig {
    pub fn pairs(&self) -> Vec<SpacetimePair> {
        self.pairs.iter().map(|p| SpacetimePair::new(p.p, p.r)).collect()
    }
}

/// Every command with its configuration; this is what a manifest records.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", content = "config", rename_all = "kebab-case")]
pub enum Experiment {
    Regimes(RegimesConfig),
    Inequality(InequalityConfig),
    Simulate(EvolutionConfig),
    Picard(PicardConfig),
    Strichartz(StrichartzConfig),
    Scatter(EvolutionConfig),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Regimes(_) => "regimes",
            Experiment::Inequality(_) => "inequality",
            Experiment::Simulate(_) => "simulate",
            Experiment::Picard(_) => "picard",
            Experiment::Strichartz(_) => "strichartz",
            Experiment::Scatter(_) => "scatter",
        }
    }

    /// Parses the config document of a file-driven command.
    pub fn from_document(command: &str, text: &str) -> Result<Experiment> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let experiment = serde_json::json!({ "command": command, "config": value });
        Ok(serde_json::from_value(experiment)?)
    }
}
