//! Recovery of a planar crack (geometry and jump density) from top-plane
//! field data, and the frequency sweep that locates the scalings at which
//! two distinct cracks become indistinguishable.
//!
//! The forward map is linear in the density for fixed geometry, so fitting
//! splits cleanly: a complex least-squares solve recovers the density
//! coefficients exactly per geometry candidate (variable projection), and a
//! Nelder–Mead search over the seven geometry parameters minimizes the
//! projected misfit.

mod optimize;
mod sweep;

pub use optimize::{fit_geometry, misfit_landscape, write_fit_json, GeometryFit};
pub use sweep::{
    frequency_sweep, predicted_bad_set, zonal_basis, write_sweep_csv, SweepResult,
};

use crate::geometry::{make_planar_crack, CrackMesh, GeometryError};
use crate::potential::{
    eval_double_layer_3d, DensityField, FieldSamples, PotentialError, QuadratureConfig,
};
use crate::special::WaveContext;
use nalgebra::{DMatrix, DVector, Rotation3, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Singular values below this fraction of the largest mark a rank-deficient
/// least-squares system.
const RANK_TOL: f64 = 1e-12;

/// Failures while fitting cracks or sweeping frequencies.
#[derive(Debug, Error)]
pub enum InversionError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("degenerate data at t = {t}: field supremum is numerically zero")]
    DegenerateData { t: f64 },
    #[error("least-squares solve failed: {0}")]
    Solver(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("fit i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("fit format: {0}")]
    Format(#[from] serde_json::Error),
}

/// A rectangular crack patch with a jump density in the tensor-sine basis.
///
/// The patch is the rectangle `[-a, a] × [-b, b]` in the frame obtained by
/// rotating the horizontal axes about the world x- and y-axes by the two
/// tilt angles, then translating to `center`. The density is
/// `Σ c_{pq} sin(pπ(ξ+a)/2a) sin(qπ(η+b)/2b)` in patch coordinates `(ξ, η)`,
/// `1 ≤ p, q ≤ modes` — every basis function vanishes on the patch boundary,
/// the discrete form of a jump extendable by zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarCrackParams {
    pub center: Vector3<f64>,
    pub tilt: [f64; 2],
    pub half_widths: [f64; 2],
    pub modes: usize,
    pub coeffs: Vec<Complex64>,
}

impl PlanarCrackParams {
    /// A horizontal patch at `center` with all density weight in the lowest
    /// tensor mode.
    pub fn horizontal(center: Vector3<f64>, half_widths: [f64; 2]) -> Self {
        PlanarCrackParams {
            center,
            tilt: [0.0, 0.0],
            half_widths,
            modes: 1,
            coeffs: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// # Errors
    /// Half-widths must be positive, `1 ≤ modes ≤ 4`, coefficients must be
    /// finite and number exactly `modes²`, and the patch must lie strictly
    /// below the free surface.
    pub fn validate(&self) -> Result<(), InversionError> {
        let finite3 = self.center.iter().all(|c| c.is_finite());
        if !finite3 || !self.tilt.iter().all(|t| t.is_finite()) {
            return Err(InversionError::Invalid("non-finite center or tilt".into()));
        }
        let [a, b] = self.half_widths;
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(InversionError::Invalid(format!(
                "half-widths ({a}, {b}) must be positive"
            )));
        }
        if !(1..=4).contains(&self.modes) {
            return Err(InversionError::Invalid(format!(
                "modes per axis must be 1..=4, got {}",
                self.modes
            )));
        }
        if self.coeffs.len() != self.modes * self.modes {
            return Err(InversionError::Invalid(format!(
                "{} coefficients for {} tensor modes",
                self.coeffs.len(),
                self.modes * self.modes
            )));
        }
        if self.coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(InversionError::Invalid("non-finite density coefficient".into()));
        }
        if self.center.z >= 0.0 {
            return Err(InversionError::Invalid(format!(
                "patch center depth {} must be negative",
                self.center.z
            )));
        }
        Ok(())
    }

    /// In-plane axes of the patch: the world axes rotated about x then y by
    /// the two tilt angles.
    pub fn axes(&self) -> (Vector3<f64>, Vector3<f64>) {
        let r = Rotation3::from_euler_angles(self.tilt[0], self.tilt[1], 0.0);
        (r * Vector3::x(), r * Vector3::y())
    }

    /// Triangulates the patch with `cells × cells` quads.
    pub fn mesh(&self, cells: usize) -> Result<CrackMesh, InversionError> {
        let (e1, e2) = self.axes();
        let (a, b) = (self.half_widths[0], self.half_widths[1]);
        Ok(make_planar_crack(&self.center, &e1, &e2, (a, b), cells, cells)?)
    }

    /// Patch coordinates `(ξ, η)` of a mesh vertex.
    fn local(&self, v: &Vector3<f64>) -> (f64, f64) {
        let (e1, e2) = self.axes();
        let d = v - self.center;
        (d.dot(&e1), d.dot(&e2))
    }

    /// The tensor-sine basis interpolated at the vertices of `mesh` (built
    /// from these parameters), ordered `(p-1)·modes + (q-1)`.
    pub fn basis(&self, mesh: &CrackMesh) -> Result<Vec<DensityField>, InversionError> {
        let m = self.modes;
        let mut out = Vec::with_capacity(m * m);
        for p in 1..=m {
            for q in 1..=m {
                let values = mesh
                    .vertices()
                    .iter()
                    .map(|v| {
                        let (xi, eta) = self.local(v);
                        Complex64::new(
                            sine_mode(p, xi, self.half_widths[0])
                                * sine_mode(q, eta, self.half_widths[1]),
                            0.0,
                        )
                    })
                    .collect();
                out.push(DensityField::on_mesh(mesh, values)?);
            }
        }
        Ok(out)
    }

    /// The density `Σ c_{pq} b_{pq}` interpolated at the vertices of `mesh`.
    pub fn density(&self, mesh: &CrackMesh) -> Result<DensityField, InversionError> {
        let m = self.modes;
        let values = mesh
            .vertices()
            .iter()
            .map(|v| {
                let (xi, eta) = self.local(v);
                let mut acc = Complex64::new(0.0, 0.0);
                for p in 1..=m {
                    for q in 1..=m {
                        acc += self.coeffs[(p - 1) * m + (q - 1)]
                            * sine_mode(p, xi, self.half_widths[0])
                            * sine_mode(q, eta, self.half_widths[1]);
                    }
                }
                acc
            })
            .collect();
        Ok(DensityField::on_mesh(mesh, values)?)
    }

    /// A copy with every geometry component nudged by a seeded uniform
    /// perturbation of relative size `rel` (tilts measured against a half
    /// radian) — the standard way to build a detuned optimizer start.
    pub fn perturbed(&self, rel: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bump = |x: f64| {
            let scale = x.abs().max(0.5);
            x + rel * scale * rng.gen_range(-1.0..1.0)
        };
        PlanarCrackParams {
            center: Vector3::new(bump(self.center.x), bump(self.center.y), bump(self.center.z)),
            tilt: [bump(self.tilt[0]), bump(self.tilt[1])],
            half_widths: [bump(self.half_widths[0]), bump(self.half_widths[1])],
            modes: self.modes,
            coeffs: self.coeffs.clone(),
        }
    }
}

/// Sine mode `sin(pπ(ξ + w)/(2w))`, vanishing at `ξ = ±w`.
fn sine_mode(p: usize, xi: f64, w: f64) -> f64 {
    (p as f64 * std::f64::consts::PI * (xi + w) / (2.0 * w)).sin()
}

/// One inverse problem: observations on a top-plane set, the wave context
/// they were taken in, the optimizer budget, and the data's noise level.
#[derive(Debug, Clone)]
pub struct InversionSpec {
    /// Observed field values at the observation points (the set `V`).
    pub data: FieldSamples,
    pub ctx: WaveContext,
    /// Maximum number of misfit evaluations for [`fit_geometry`].
    pub budget: usize,
    /// Relative noise level of the data (0 for synthetic noiseless data).
    pub noise: f64,
}

impl InversionSpec {
    /// # Errors
    /// Observations must be non-empty 3-D samples with finite values and a
    /// non-negative noise level.
    pub fn validate(&self) -> Result<(), InversionError> {
        if self.data.is_empty() {
            return Err(InversionError::Invalid("empty observation set".into()));
        }
        if self.data.dim() != 3 {
            return Err(InversionError::Invalid("observations must be 3-D samples".into()));
        }
        if self.data.values().iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(InversionError::Invalid("non-finite observation value".into()));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(InversionError::Invalid(format!(
                "noise level {} must be non-negative",
                self.noise
            )));
        }
        Ok(())
    }

    /// The observation points.
    pub fn points(&self) -> Vec<Vector3<f64>> {
        (0..self.data.len()).map(|i| self.data.point3(i)).collect()
    }
}

/// Output of [`fit_density`]: the least-squares coefficients with their
/// conditioning witness.
#[derive(Debug, Clone)]
pub struct DensityFit {
    pub coeffs: Vec<Complex64>,
    /// `‖A c − d‖₂` at the minimizer.
    pub residual: f64,
    /// `residual / ‖d‖₂` (zero for zero data).
    pub relative_residual: f64,
    /// Smallest singular value of the forward matrix.
    pub sigma_min: f64,
    /// Largest singular value of the forward matrix.
    pub sigma_max: f64,
    /// Set when the forward matrix is rank-deficient below [`RANK_TOL`].
    pub ill_posed: bool,
}

/// Complex least squares `min_c ‖A c − d‖₂` by SVD, dropping singular values
/// below [`RANK_TOL`] times the largest.
pub(crate) fn least_squares(
    a: &DMatrix<Complex64>,
    d: &DVector<Complex64>,
) -> Result<(DVector<Complex64>, f64, f64, f64), InversionError> {
    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().fold(0.0_f64, |m, &s| m.max(s));
    let sigma_min = svd.singular_values.iter().fold(f64::INFINITY, |m, &s| m.min(s));
    let coeffs = svd
        .solve(d, RANK_TOL * sigma_max)
        .map_err(|e| InversionError::Solver(e.to_string()))?;
    let residual = (a * &coeffs - d).norm();
    Ok((coeffs, residual, sigma_min, sigma_max))
}

/// Forward matrix: one column of field values per density basis function.
pub(crate) fn forward_matrix(
    mesh: &CrackMesh,
    basis: &[DensityField],
    ctx: &WaveContext,
    pts: &[Vector3<f64>],
    q: &QuadratureConfig,
) -> Result<DMatrix<Complex64>, InversionError> {
    let mut a = DMatrix::zeros(pts.len(), basis.len());
    for (j, b) in basis.iter().enumerate() {
        let samples = eval_double_layer_3d(mesh, b, ctx, pts, q)?;
        for i in 0..pts.len() {
            a[(i, j)] = samples.value(i);
        }
    }
    Ok(a)
}

/// Evaluates the field of a parametrized planar crack at `pts`, meshing the
/// patch with `cells × cells` quads.
pub fn forward_map(
    p: &PlanarCrackParams,
    ctx: &WaveContext,
    pts: &[Vector3<f64>],
    cells: usize,
    q: &QuadratureConfig,
) -> Result<FieldSamples, InversionError> {
    p.validate()?;
    let mesh = p.mesh(cells)?;
    let g = p.density(&mesh)?;
    Ok(eval_double_layer_3d(&mesh, &g, ctx, pts, q)?)
}

/// Fits density coefficients on a fixed crack geometry to observed data by
/// complex least squares.
///
/// # Errors
/// The basis must be non-empty and no larger than the observation count, and
/// the data must be finite 3-D samples.
pub fn fit_density(
    mesh: &CrackMesh,
    basis: &[DensityField],
    ctx: &WaveContext,
    data: &FieldSamples,
    q: &QuadratureConfig,
) -> Result<DensityFit, InversionError> {
    if basis.is_empty() {
        return Err(InversionError::Invalid("empty density basis".into()));
    }
    if basis.len() > data.len() {
        return Err(InversionError::Invalid(format!(
            "{} basis functions for {} observations",
            basis.len(),
            data.len()
        )));
    }
    if data.dim() != 3 {
        return Err(InversionError::Invalid("observations must be 3-D samples".into()));
    }
    if data.values().iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(InversionError::Invalid("non-finite observation value".into()));
    }
    let pts: Vec<Vector3<f64>> = (0..data.len()).map(|i| data.point3(i)).collect();
    let a = forward_matrix(mesh, basis, ctx, &pts, q)?;
    let d = DVector::from_column_slice(data.values());
    let (coeffs, residual, sigma_min, sigma_max) = least_squares(&a, &d)?;
    let dnorm = d.norm();
    Ok(DensityFit {
        coeffs: coeffs.iter().copied().collect(),
        residual,
        relative_residual: if dnorm > 0.0 { residual / dnorm } else { 0.0 },
        sigma_min,
        sigma_max,
        ill_posed: sigma_min <= RANK_TOL * sigma_max,
    })
}
