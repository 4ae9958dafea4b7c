use std::sync::{Arc, OnceLock};

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};
use num_complex::Complex64;

use super::{RadialField, RadialGrid};
use crate::error::{Error, Result};

/// Eigendecomposition of the discrete radial `−Δ`.
///
/// The flux-form operator
/// `(Lu)_j = −[ρ_{j+½}(u_{j+1}−u_j) − ρ_{j−½}(u_j−u_{j−1})] / (r_j^{N−1} h²)`,
/// `ρ = r^{N−1}`, has zero flux through `r = 0` and a homogeneous Dirichlet
/// ghost value at `r = R`. It is self-adjoint under the quadrature weights, so
/// `S = W^{½} L W^{−½}` is a symmetric tridiagonal matrix with orthonormal
/// eigenvectors `ψ_k`; the weighted-orthonormal modes are `φ_k = W^{−½} ψ_k`.
pub struct SpectralLaplacian {
    grid: Arc<RadialGrid>,
    eigenvalues: Vec<f64>,
    /// Column `k` holds `ψ_k`.
    modes: Mat<f64>,
    sqrt_weights: Vec<f64>,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    refined: OnceLock<RefinedModes>,
}

/// `Ψ` after one Newton–Schulz step `Ψ(3I − ΨᵀΨ)/2` with a compensated Gram
/// matrix, in both storage orders.
struct RefinedModes {
    cols: Mat<f64>,
    rows: Vec<f64>,
}

impl std::fmt::Debug for SpectralLaplacian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralLaplacian")
            .field("grid", &self.grid.spec())
            .field("lowest", &self.eigenvalues.first())
            .field("highest", &self.eigenvalues.last())
            .finish()
    }
}

/// Entries of the symmetrized operator, computed from index ratios so that
/// `r^{N−1}` never under- or overflows.
fn symmetric_tridiagonal(grid: &RadialGrid) -> (Vec<f64>, Vec<f64>) {
    let m = grid.len();
    let h2 = grid.spacing() * grid.spacing();
    let power = grid.dim() as i32 - 1;
    let diag = (0..m)
        .map(|j| {
            let centre = j as f64 + 0.5;
            let outer = ((j as f64 + 1.0) / centre).powi(power);
            let inner = if j == 0 { 0.0 } else { (j as f64 / centre).powi(power) };
            (outer + inner) / h2
        })
        .collect();
    let offdiag = (0..m - 1)
        .map(|j| {
            let face = j as f64 + 1.0;
            let geo = ((j as f64 + 0.5) * (j as f64 + 1.5)).sqrt();
            -(face / geo).powi(power) / h2
        })
        .collect();
    (diag, offdiag)
}

/// Rounding error of `p = a·b` by Dekker splitting; `f64::mul_add` falls
/// back to a slow software routine on targets built without FMA.
#[inline(always)]
fn product_error(a: f64, b: f64, p: f64) -> f64 {
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    al * bl - (((p - ah * bh) - al * bh) - ah * bl)
}

#[inline(always)]
fn split(a: f64) -> (f64, f64) {
    let c = 134_217_729.0 * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// `Σ a_i b_i` with error-free products and sums carried in a second word.
fn dot2(a: &[f64], b: &[f64]) -> f64 {
    let (mut sum, mut err) = (0.0f64, 0.0f64);
    for (&a, &b) in a.iter().zip(b) {
        let p = a * b;
        let t = sum + p;
        let v = t - sum;
        err += product_error(a, b, p) + ((sum - (t - v)) + (p - v));
        sum = t;
    }
    sum + err
}

fn dot2_complex(a: &[f64], z: &[Complex64]) -> Complex64 {
    let (mut re, mut re_err) = (0.0f64, 0.0f64);
    let (mut im, mut im_err) = (0.0f64, 0.0f64);
    for (&a, z) in a.iter().zip(z) {
        let p = a * z.re;
        let t = re + p;
        let v = t - re;
        re_err += product_error(a, z.re, p) + ((re - (t - v)) + (p - v));
        re = t;
        let p = a * z.im;
        let t = im + p;
        let v = t - im;
        im_err += product_error(a, z.im, p) + ((im - (t - v)) + (p - v));
        im = t;
    }
    Complex64::new(re + re_err, im + im_err)
}

/// Rescales each eigenvector to unit length with a compensated sum.
fn normalize_columns(modes: &mut Mat<f64>) {
    for k in 0..modes.ncols() {
        let col = modes.col_as_slice_mut(k);
        let (mut sum, mut carry) = (0.0f64, 0.0f64);
        for x in col.iter() {
            let y = x * x - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
        }
        let scale = sum.sqrt().recip();
        col.iter_mut().for_each(|x| *x *= scale);
    }
}

/// Largest mismatch between `w_j L_{j,j+1}` and `w_{j+1} L_{j+1,j}` of the
/// unsymmetrized operator, relative to the diagonal scale.
fn symmetry_residual(grid: &RadialGrid) -> f64 {
    let w = grid.weights();
    let r = grid.nodes();
    let h = grid.spacing();
    let n1 = grid.dim() as i32 - 1;
    let mut worst: f64 = 0.0;
    for j in 0..grid.len() - 1 {
        let face = ((j + 1) as f64 * h).powi(n1);
        let upper = -face / (r[j].powi(n1) * h * h);
        let lower = -face / (r[j + 1].powi(n1) * h * h);
        let scale = w[j].abs().max(w[j + 1].abs()) / (h * h);
        worst = worst.max((w[j] * upper - w[j + 1] * lower).abs() / scale);
    }
    worst
}

impl SpectralLaplacian {
    pub fn new(grid: &Arc<RadialGrid>) -> Result<SpectralLaplacian> {
        let m = grid.len();
        let (diag, offdiag) = symmetric_tridiagonal(grid);
        let mut sub = offdiag.clone();
        sub.push(0.0);
        let mut eigenvalues = vec![0.0; m];
        let mut modes = Mat::<f64>::zeros(m, m);
        let mut mem = MemBuffer::new(evd::self_adjoint_evd_scratch::<f64>(
            m,
            ComputeEigenvectors::Yes,
            Par::Seq,
            Default::default(),
        ));
        evd::tridiagonal_self_adjoint_evd(
            faer::diag::DiagRef::from_slice(&diag),
            faer::diag::DiagRef::from_slice(&sub),
            faer::diag::DiagMut::from_slice_mut(&mut eigenvalues),
            Some(modes.as_mut()),
            Par::Seq,
            MemStack::new(&mut mem),
            Default::default(),
        )
        .map_err(|e| Error::Eigensolver {
            residual: symmetry_residual(grid),
            reason: format!("{e:?}"),
        })?;
        if eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::Eigensolver {
                residual: symmetry_residual(grid),
                reason: "non-finite eigenvalue".into(),
            });
        }
        normalize_columns(&mut modes);
        let sqrt_weights = grid.weights().iter().map(|w| w.sqrt()).collect();
        Ok(SpectralLaplacian { grid: grid.clone(), eigenvalues, modes, sqrt_weights, diag, offdiag, refined: OnceLock::new() })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Ascending eigenvalues `μ_k`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The weighted-orthonormal eigenvector `φ_k` as a field.
    pub fn mode(&self, k: usize) -> RadialField {
        let psi = self.modes.col_as_slice(k);
        let values = psi
            .iter()
            .zip(&self.sqrt_weights)
            .map(|(p, s)| Complex64::new(p / s, 0.0))
            .collect();
        RadialField { grid: self.grid.clone(), values }
    }

    pub fn check_grid(&self, u: &RadialField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, u.grid()) || *self.grid == **u.grid() {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Coefficients `c_k = ⟨φ_k, u⟩_w`.
    pub fn analysis(&self, u: &RadialField) -> Result<Vec<Complex64>> {
        self.check_grid(u)?;
        Ok(self.analysis_batch(&[u.values()]).pop().unwrap())
    }

    /// Field `Σ_k c_k φ_k`.
    pub fn synthesis(&self, coeffs: &[Complex64]) -> RadialField {
        let values = self.synthesis_batch(&[coeffs]).pop().unwrap();
        RadialField { grid: self.grid.clone(), values }
    }

    /// Analysis of several sample vectors with one matrix product.
    pub fn analysis_batch(&self, fields: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
        let m = self.grid.len();
        let x = Mat::<f64>::from_fn(m, 2 * fields.len(), |j, col| {
            let z = fields[col / 2][j] * self.sqrt_weights[j];
            if col % 2 == 0 { z.re } else { z.im }
        });
        let c = self.product(self.modes.as_ref().transpose(), x.as_ref());
        split_complex(&c, fields.len())
    }

    pub fn synthesis_batch(&self, coeffs: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
        let m = self.grid.len();
        let x = Mat::<f64>::from_fn(m, 2 * coeffs.len(), |k, col| {
            let z = coeffs[col / 2][k];
            if col % 2 == 0 { z.re } else { z.im }
        });
        let u = self.product(self.modes.as_ref(), x.as_ref());
        let mut out = split_complex(&u, coeffs.len());
        for values in &mut out {
            for (z, s) in values.iter_mut().zip(&self.sqrt_weights) {
                *z /= s;
            }
        }
        out
    }

    /// Analysis of a single field against the refined basis, with compensated
    /// dot products. Repeated round trips through [`Self::analysis`] and
    /// [`Self::synthesis`] drift in norm by a few ulps per step; this pair
    /// stays orthogonal to rounding level.
    pub fn analysis_compensated(&self, u: &RadialField) -> Result<Vec<Complex64>> {
        self.check_grid(u)?;
        let refined = self.refined();
        let y: Vec<Complex64> = u.values().iter().zip(&self.sqrt_weights).map(|(z, s)| z * s).collect();
        Ok((0..self.grid.len()).map(|k| dot2_complex(refined.cols.col_as_slice(k), &y)).collect())
    }

    pub fn synthesis_compensated(&self, coeffs: &[Complex64]) -> RadialField {
        let rows = &self.refined().rows;
        let m = self.grid.len();
        let values = (0..m)
            .map(|j| dot2_complex(&rows[j * m..(j + 1) * m], coeffs) / self.sqrt_weights[j])
            .collect();
        RadialField { grid: self.grid.clone(), values }
    }

    /// Built on first use: the compensated Gram matrix costs `O(M³)`.
    fn refined(&self) -> &RefinedModes {
        self.refined.get_or_init(|| {
            let m = self.grid.len();
            let modes = &self.modes;
            let mut defect = Mat::<f64>::zeros(m, m);
            for k in 0..m {
                for l in k..m {
                    let g = dot2(modes.col_as_slice(k), modes.col_as_slice(l)) - if k == l { 1.0 } else { 0.0 };
                    defect[(k, l)] = g;
                    defect[(l, k)] = g;
                }
            }
            let mut cols = modes.clone();
            matmul(cols.as_mut(), Accum::Add, modes.as_ref(), defect.as_ref(), -0.5, Par::Seq);
            let mut rows = vec![0.0; m * m];
            for k in 0..m {
                for (j, &x) in cols.col_as_slice(k).iter().enumerate() {
                    rows[j * m + k] = x;
                }
            }
            RefinedModes { cols, rows }
        })
    }

    fn product(&self, lhs: MatRef<'_, f64>, rhs: MatRef<'_, f64>) -> Mat<f64> {
        let mut out = Mat::<f64>::zeros(lhs.nrows(), rhs.ncols());
        matmul(out.as_mut(), Accum::Replace, lhs, rhs, 1.0, Par::Seq);
        out
    }

    /// Synthesis of `f(μ_k) c_k` for a spectral multiplier `f`.
    pub fn apply_multiplier(
        &self,
        u: &RadialField,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<RadialField> {
        let mut c = self.analysis(u)?;
        for (ck, &mu) in c.iter_mut().zip(&self.eigenvalues) {
            *ck *= f(mu);
        }
        Ok(self.synthesis(&c))
    }

    /// `L u` through the three-point stencil, independent of the eigenbasis.
    pub fn apply(&self, u: &RadialField) -> Result<RadialField> {
        self.check_grid(u)?;
        let m = self.grid.len();
        let s = &self.sqrt_weights;
        let v: Vec<Complex64> = u.values().iter().zip(s).map(|(z, s)| z * s).collect();
        let values = (0..m)
            .map(|j| {
                let mut acc = v[j] * self.diag[j];
                if j > 0 {
                    acc += v[j - 1] * self.offdiag[j - 1];
                }
                if j + 1 < m {
                    acc += v[j + 1] * self.offdiag[j];
                }
                acc / s[j]
            })
            .collect();
        Ok(RadialField { grid: self.grid.clone(), values })
    }

    fn check_power(&self, s: f64) -> Result<()> {
        let mu0 = self.eigenvalues[0];
        if s < 0.0 && mu0 < 1e-12 {
            return Err(Error::SingularPower { mu0 });
        }
        Ok(())
    }

    /// `μ^{s/2}` with rounding-level negative eigenvalues clamped to zero.
    pub(crate) fn symbol(mu: f64, s: f64) -> f64 {
        if s == 0.0 {
            1.0
        } else {
            mu.max(0.0).powf(s / 2.0)
        }
    }

    /// `|∇|^s u = (−Δ)^{s/2} u`.
    pub fn fractional_apply(&self, s: f64, u: &RadialField) -> Result<RadialField> {
        self.check_power(s)?;
        self.apply_multiplier(u, |mu| Complex64::new(Self::symbol(mu, s), 0.0))
    }

    /// `Δu = −L u`, evaluated spectrally.
    pub fn laplacian(&self, u: &RadialField) -> Result<RadialField> {
        self.apply_multiplier(u, |mu| Complex64::new(-mu, 0.0))
    }

    /// Homogeneous norm `(Σ μ_k^s |c_k|²)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64, u: &RadialField) -> Result<f64> {
        self.check_power(s)?;
        let c = self.analysis(u)?;
        Ok(self.sobolev_norm_coeffs(s, &c))
    }

    pub fn sobolev_norm_coeffs(&self, s: f64, c: &[Complex64]) -> f64 {
        c.iter()
            .zip(&self.eigenvalues)
            .map(|(ck, &mu)| Self::symbol(mu, 2.0 * s) * ck.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `(‖u‖² + ‖|∇|^τ u‖²)^{1/2}`; `τ = 2` is the `H²` norm.
    pub fn h2_bracket_norm(&self, tau: f64, u: &RadialField) -> Result<f64> {
        let c = self.analysis(u)?;
        Ok(self.bracket_norm_coeffs(tau, &c))
    }

    pub fn bracket_norm_coeffs(&self, tau: f64, c: &[Complex64]) -> f64 {
        c.iter()
            .zip(&self.eigenvalues)
            .map(|(ck, &mu)| (1.0 + Self::symbol(mu, 2.0 * tau)) * ck.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

fn split_complex(mat: &Mat<f64>, count: usize) -> Vec<Vec<Complex64>> {
    (0..count)
        .map(|i| {
            let re = mat.col_as_slice(2 * i);
            let im = mat.col_as_slice(2 * i + 1);
            re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use std::f64::consts::PI;

    fn pseudo_random_field(grid: &Arc<RadialGrid>, seed: u64) -> RadialField {
        // xorshift; reproducible without pulling in an RNG crate for tests
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let values = (0..grid.len()).map(|_| Complex64::new(next(), next())).collect();
        RadialField::new(grid.clone(), values).unwrap()
    }

    fn norm(u: &RadialField) -> f64 {
        u.inner(u).re.sqrt()
    }

    #[test]
    fn one_dimensional_spectrum_matches_mixed_problem() {
        let g = build_grid(1, 1.0, 512).unwrap();
        let op = SpectralLaplacian::new(&g).unwrap();
        for k in 0..4 {
            let exact = ((k as f64 + 0.5) * PI).powi(2);
            assert!((op.eigenvalues()[k] / exact - 1.0).abs() < 1e-2, "k={k}");
        }
    }

    #[test]
    fn modes_are_weighted_orthonormal() {
        let g = build_grid(5, 8.0, 64).unwrap();
        let op = SpectralLaplacian::new(&g).unwrap();
        for k in [0, 1, 17, 63] {
            for l in [0, 1, 17, 63] {
                let ip = op.mode(k).inner(&op.mode(l)).re;
                let delta = if k == l { 1.0 } else { 0.0 };
                assert!((ip - delta).abs() < 1e-10, "({k},{l}) -> {ip}");
            }
        }
        assert!(op.eigenvalues().iter().all(|&mu| mu >= -1e-10));
        assert!(op.eigenvalues().windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn stencil_agrees_with_eigenbasis() {
        for dim in [1, 3, 5, 8] {
            let g = build_grid(dim, 6.0, 96).unwrap();
            let op = SpectralLaplacian::new(&g).unwrap();
            let u = pseudo_random_field(&g, dim as u64);
            let direct = op.apply(&u).unwrap();
            let spectral = op.fractional_apply(2.0, &u).unwrap();
            let diff = norm(&(&direct - &spectral));
            assert!(diff < 1e-9 * norm(&direct).max(norm(&u)), "N={dim}: {diff}");
        }
    }

    #[test]
    fn operator_is_self_adjoint_and_nonnegative() {
        let g = build_grid(6, 5.0, 80).unwrap();
        let op = SpectralLaplacian::new(&g).unwrap();
        let u = pseudo_random_field(&g, 1);
        let v = pseudo_random_field(&g, 2);
        let luv = op.apply(&u).unwrap().inner(&v);
        let ulv = u.inner(&op.apply(&v).unwrap());
        let scale = norm(&op.apply(&u).unwrap()) * norm(&v);
        assert!((luv - ulv).norm() < 1e-9 * scale);
        assert!(op.apply(&u).unwrap().inner(&u).re >= -1e-10);
        assert!(symmetry_residual(&g) < 1e-12);
    }

    #[test]
    fn constant_has_vanishing_interior_laplacian() {
        let g = build_grid(5, 4.0, 200).unwrap();
        let op = SpectralLaplacian::new(&g).unwrap();
        let one = RadialField::from_real(&g, |_| 1.0);
        let lu = op.apply(&one).unwrap();
        for (r, z) in g.nodes().iter().zip(lu.values()) {
            if *r < 2.0 {
                assert!(z.norm() < 1e-8, "r={r}: {z}");
            }
        }
    }

    #[test]
    fn transform_round_trip_and_parseval() {
        let g = build_grid(5, 7.0, 128).unwrap();
        let op = SpectralLaplacian::new(&g).unwrap();
        let u = pseudo_random_field(&g, 9);
        let c = op.analysis(&u).unwrap();
        let back = op.synthesis(&c);
        assert!(norm(&(&back - &u)) < 1e-10 * norm(&u));
        let parseval: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        assert!((parseval / u.inner(&u).re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn compensated_round_trips_do_not_drift() {
        let g = build_grid(6, 12.0, 128).unwrap();
        let op = SpectralLaplacian::new(&g).unwrap();
        let v0 = RadialField::from_real(&g, |r| (-r * r / 2.0).exp());
        let m0 = v0.inner(&v0).re;
        let mut v = v0.clone();
        for _ in 0..2000 {
            v = op.synthesis_compensated(&op.analysis_compensated(&v).unwrap());
        }
        assert!((v.inner(&v).re / m0 - 1.0).abs() < 1e-13);
        let diff = RadialField::new(g.clone(), v.values().iter().zip(v0.values()).map(|(a, b)| a - b).collect()).unwrap();
        assert!(norm(&diff) < 1e-12 * m0.sqrt());
        let c = op.analysis(&v0).unwrap();
        let d = op.analysis_compensated(&v0).unwrap();
        assert!(c.iter().zip(&d).all(|(a, b)| (a - b).norm() < 1e-13));
    }

    #[test]
    fn fractional_powers_form_a_semigroup() {
        let g = build_grid(5, 6.0, 100).unwrap();
        let op = SpectralLaplacian::new(&g).unwrap();
        let u = RadialField::from_real(&g, |r| (-r * r / 2.0).exp());
        let id = op.fractional_apply(0.0, &u).unwrap();
        assert!(norm(&(&id - &u)) < 1e-12 * norm(&u));
        let twice = op.fractional_apply(0.7, &op.fractional_apply(1.1, &u).unwrap()).unwrap();
        let once = op.fractional_apply(1.8, &u).unwrap();
        assert!(norm(&(&twice - &once)) < 1e-9 * norm(&once));
        let k = 5;
        let phi = op.mode(k);
        let scaled = op.fractional_apply(1.5, &phi).unwrap();
        let expected = &phi * op.eigenvalues()[k].powf(0.75);
        assert!(norm(&(&scaled - &expected)) < 1e-10 * norm(&expected));
        // Dirichlet at R keeps the spectrum away from zero, so negative powers work
        let back = op.fractional_apply(-1.8, &once).unwrap();
        assert!(norm(&(&back - &u)) < 1e-9 * norm(&u));
    }

    #[test]
    fn negative_power_needs_positive_spectrum() {
        let g = build_grid(5, 6.0, 40).unwrap();
        let mut op = SpectralLaplacian::new(&g).unwrap();
        op.eigenvalues[0] = 1e-14;
        let u = RadialField::from_real(&g, |r| (-r * r).exp());
        match op.fractional_apply(-1.0, &u) {
            Err(Error::SingularPower { mu0 }) => assert_eq!(mu0, 1e-14),
            other => panic!("expected SingularPower, got {other:?}"),
        }
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let op = SpectralLaplacian::new(&build_grid(5, 6.0, 40).unwrap()).unwrap();
        let other = build_grid(5, 6.0, 41).unwrap();
        let u = RadialField::zeros(&other);
        assert!(matches!(op.analysis(&u), Err(Error::GridMismatch)));
        // equal specs count as the same grid
        let same = build_grid(5, 6.0, 40).unwrap();
        assert!(op.analysis(&RadialField::zeros(&same)).is_ok());
    }
}
