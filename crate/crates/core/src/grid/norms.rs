use num_complex::Complex64;

use super::{RadialField, SpectralLaplacian, BOUNDARY_LAYER};
use crate::error::Result;
use crate::params::ModelParams;

/// `(Σ w_j |u_j|^ρ)^{1/ρ}`.
pub fn lebesgue_norm(u: &RadialField, rho: f64) -> f64 {
    let w = u.grid().weights();
    let sum: f64 = w.iter().zip(u.values()).map(|(w, z)| w * z.norm().powf(rho)).sum();
    sum.powf(1.0 / rho)
}

/// `Σ w_j r_j^b |u_j|^{1+q}`, the raw potential integral (no sign, no prefactor).
pub fn weighted_source_integral(u: &RadialField, params: &ModelParams) -> f64 {
    let (b, q) = (params.b_f64(), params.q_f64());
    let g = u.grid();
    g.nodes()
        .iter()
        .zip(g.weights())
        .zip(u.values())
        .map(|((r, w), z)| w * r.powf(b) * z.norm().powf(1.0 + q))
        .sum()
}

pub fn mass(u: &RadialField) -> f64 {
    u.grid().weights().iter().zip(u.values()).map(|(w, z)| w * z.norm_sqr()).sum()
}

/// `‖Δu‖² + 2ε/(1+q) ∫|x|^b |u|^{1+q}`.
pub fn energy(op: &SpectralLaplacian, u: &RadialField, params: &ModelParams) -> Result<f64> {
    let lap = op.sobolev_norm(2.0, u)?;
    Ok(lap * lap + potential_energy(u, params))
}

pub(crate) fn potential_energy(u: &RadialField, params: &ModelParams) -> f64 {
    2.0 * params.eps.value() / (1.0 + params.q_f64()) * weighted_source_integral(u, params)
}

/// Mass carried by nodes with `r_j > 0.9 R`.
pub fn boundary_mass(u: &RadialField) -> f64 {
    let g = u.grid();
    let cut = BOUNDARY_LAYER * g.radius();
    g.nodes()
        .iter()
        .zip(g.weights())
        .zip(u.values())
        .filter(|((r, _), _)| **r > cut)
        .map(|((_, w), z)| w * z.norm_sqr())
        .sum()
}

/// Radial derivative `∂_r u` by centred differences, one-sided at both ends.
pub fn radial_derivative(u: &RadialField) -> RadialField {
    let v = u.values();
    let h = u.grid().spacing();
    let m = v.len();
    let values = (0..m)
        .map(|j| match j {
            0 => (v[1] - v[0]) / h,
            j if j == m - 1 => (v[m - 1] - v[m - 2]) / h,
            j => (v[j + 1] - v[j - 1]) / (2.0 * h),
        })
        .collect();
    RadialField::new(u.grid().clone(), values).expect("same length")
}

#[derive(Clone, Debug)]
pub struct Rescaled {
    pub field: RadialField,
    /// Share of the source mass that the rescaled profile cannot represent
    /// because it would land beyond `R`.
    pub outside_mass_fraction: f64,
}

impl Rescaled {
    /// More than 1% of the mass fell off the grid.
    pub fn truncated(&self) -> bool {
        self.outside_mass_fraction > 0.01
    }
}

/// `λ^α u(λ r)` on the same grid, by linear interpolation; zero where `λr ≥ R`.
pub fn dilate(u: &RadialField, lambda: f64, amplitude_exponent: f64) -> Rescaled {
    let g = u.grid();
    let (r, v, h) = (g.nodes(), u.values(), g.spacing());
    let m = r.len();
    let amp = lambda.powf(amplitude_exponent);
    let sample = |x: f64| -> Complex64 {
        // position in units of h relative to the first node; nodes sit at (j+½)h
        let t = x / h - 0.5;
        if t <= 0.0 {
            // even extension through the origin
            v[0]
        } else if t >= (m - 1) as f64 {
            // towards the Dirichlet value at R
            let frac = (x - r[m - 1]) / (g.radius() - r[m - 1]);
            if frac >= 1.0 {
                Complex64::new(0.0, 0.0)
            } else {
                v[m - 1] * (1.0 - frac)
            }
        } else {
            let j = t.floor() as usize;
            let frac = t - j as f64;
            v[j] * (1.0 - frac) + v[j + 1] * frac
        }
    };
    let values = r.iter().map(|&rj| amp * sample(lambda * rj)).collect();
    let total = mass(u);
    let cut = lambda * g.radius();
    let outside: f64 = g
        .nodes()
        .iter()
        .zip(g.weights())
        .zip(v)
        .filter(|((rj, _), _)| **rj > cut)
        .map(|((_, w), z)| w * z.norm_sqr())
        .sum();
    Rescaled {
        field: RadialField::new(g.clone(), values).expect("same length"),
        outside_mass_fraction: if total > 0.0 { outside / total } else { 0.0 },
    }
}

/// Spatial part of the scaling family: `λ^{(4+b)/(q−1)} u(λ·)`.
pub fn rescale(u: &RadialField, lambda: f64, params: &ModelParams) -> Rescaled {
    dilate(u, lambda, params.scaling_exponent().to_f64())
}
