//! Radial discretization of `ℝ^N`.
//!
//! Functions `u(|x|)` are sampled at cell centres `r_j = (j+½)h` of `[0, R]`,
//! and `∫_{ℝ^N} f dx` becomes `Σ_j w_j f(r_j)` with `w_j = σ_N r_j^{N−1} h`,
//! where `σ_N` is the area of the unit sphere.

mod io;
mod norms;
mod spectral;

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{fmt_f64, read_field_csv, write_field_csv, write_grid_json};
pub use norms::{
    boundary_mass, dilate, energy, lebesgue_norm, mass, radial_derivative, rescale,
    weighted_source_integral, Rescaled,
};
pub use spectral::SpectralLaplacian;
pub(crate) use norms::potential_energy;

/// Smallest point count for which the eigendecomposition is meaningful.
pub const MIN_POINTS: usize = 8;

/// Fraction of `R` beyond which mass counts as touching the boundary.
pub const BOUNDARY_LAYER: f64 = 0.9;

/// Surface area `2π^{N/2}/Γ(N/2)` of the unit sphere in `ℝ^N`.
pub fn sphere_area(dim: u32) -> f64 {
    // Γ(N/2) by recursion from Γ(1) = 1 or Γ(1/2) = √π.
    let (mut gamma, mut x) = if dim % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while x < dim as f64 / 2.0 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(dim as f64 / 2.0) / gamma
}

/// `(N, R, M)` as it appears in configuration and metadata files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "N")]
    pub dim: u32,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "M")]
    pub points: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Arc<RadialGrid>> {
        RadialGrid::new(self.dim, self.radius, self.points).map(Arc::new)
    }
}

#[derive(Debug)]
pub struct RadialGrid {
    dim: u32,
    radius: f64,
    spacing: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &RadialGrid) -> bool {
        self.spec() == other.spec()
    }
}

pub fn build_grid(dim: u32, radius: f64, points: usize) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(dim, radius, points).map(Arc::new)
}

impl RadialGrid {
    pub fn new(dim: u32, radius: f64, points: usize) -> Result<RadialGrid> {
        if dim < 1 {
            return Err(Error::InvalidParameter("grid dimension N must be >= 1".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius R = {radius} must be > 0")));
        }
        if points < MIN_POINTS {
            return Err(Error::InvalidParameter(format!(
                "point count M = {points} below minimum {MIN_POINTS}"
            )));
        }
        let h = radius / points as f64;
        let area = sphere_area(dim);
        let nodes: Vec<f64> = (0..points).map(|j| (j as f64 + 0.5) * h).collect();
        let weights = nodes.iter().map(|r| area * r.powi(dim as i32 - 1) * h).collect();
        Ok(RadialGrid { dim, radius, spacing: h, nodes, weights })
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { dim: self.dim, radius: self.radius, points: self.nodes.len() }
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_j f(r_j)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&r, &w)| w * f(r)).sum()
    }
}

/// A complex radial profile sampled on a grid.
#[derive(Clone, Debug)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<RadialField> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values but grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(RadialField { grid, values })
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> RadialField {
        RadialField { grid: grid.clone(), values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> RadialField {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        RadialField { grid: grid.clone(), values }
    }

    pub fn from_real(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> RadialField {
        Self::from_fn(grid, |r| Complex64::new(f(r), 0.0))
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn same_grid(&self, other: &RadialField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> RadialField {
        let values = self.grid.nodes().iter().zip(&self.values).map(|(&r, &z)| f(r, z)).collect();
        RadialField { grid: self.grid.clone(), values }
    }

    pub fn scale(&self, c: Complex64) -> RadialField {
        self.map(|_, z| c * z)
    }

    /// Weighted inner product `⟨u, v⟩ = Σ w_j conj(u_j) v_j`.
    pub fn inner(&self, other: &RadialField) -> Complex64 {
        self.grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(&w, (a, b))| w * a.conj() * b)
            .sum()
    }

    /// Largest pointwise modulus difference, for tests and diagnostics.
    pub fn max_abs_diff(&self, other: &RadialField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    fn zip_with(&self, other: &RadialField, f: impl Fn(Complex64, Complex64) -> Complex64) -> RadialField {
        assert!(self.same_grid(other), "field arithmetic across different grids");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        RadialField { grid: self.grid.clone(), values }
    }
}

impl Add for &RadialField {
    type Output = RadialField;
    fn add(self, rhs: &RadialField) -> RadialField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &RadialField {
    type Output = RadialField;
    fn sub(self, rhs: &RadialField) -> RadialField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &RadialField {
    type Output = RadialField;
    fn mul(self, rhs: f64) -> RadialField {
        self.map(|_, z| z * rhs)
    }
}
