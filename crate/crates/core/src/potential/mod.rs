//! Double-layer potentials over crack surfaces and curves.
//!
//! The forward solution of the constant-wavenumber problem is represented as
//!
//! ```text
//! u(x) = ∫_Γ K(x, y) g(y) dσ(y),        K(x, y) = KERNEL_SIGN · ∂G/∂n(y),
//! ```
//!
//! with `G` the half-space kernel (or `Φ` in free space) and `g` the jump
//! density. The sign is pinned by the closed-surface reproduction property:
//! with `KERNEL_SIGN = -1` the closed-sphere double layer of a Neumann
//! eigenfunction trace reproduces `+ψ` inside and `0` outside, which in turn
//! makes the two-sided probe `u(x - εn) - u(x + εn)` recover `+g`.
//!
//! Evaluation is embarrassingly parallel over observation points; near-field
//! accuracy comes from recursive cell subdivision controlled by
//! [`QuadratureConfig`].

mod probes;
mod quadrature;
mod samples;

pub use probes::{
    helmholtz_residual_2d, helmholtz_residual_3d, jump_probe, normal_jump_probe, ProbeResult,
};
pub use quadrature::{point_segment_distance, point_triangle_distance, QuadratureConfig};
pub use samples::FieldSamples;

use quadrature::Accum;

use crate::geometry::{CrackMesh, Curve2D, MeshKind};
use crate::special::{
    grad_x_dny_greens_halfspace, grad_x_dny_phi_free, grad_y_greens_halfspace, grad_y_phi_free,
    hankel0, hankel1, WaveContext,
};
use nalgebra::{Vector2, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

/// Sign applied to `∂G/∂n(y)`; see the module docs for how it is pinned.
pub const KERNEL_SIGN: f64 = -1.0;

/// Relative off-surface guard: targets closer than this fraction of the mesh
/// diameter are rejected unless the config allows near evaluation.
const SURFACE_GUARD: f64 = 1e-8;

/// Layer-potential evaluation failures.
#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("invalid density: {0}")]
    Density(String),
    #[error("invalid quadrature config: {0}")]
    Config(String),
    #[error("observation point {index} lies on or nearly on the surface (distance {dist:.3e})")]
    PointOnSurface { index: usize, dist: f64 },
    #[error("observation point {index} lies above the free surface (x3 = {z})")]
    PointAboveSurface { index: usize, z: f64 },
    #[error("finite-difference stencil at radius {h} leaves the domain")]
    Stencil { h: f64 },
    #[error("field i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("field format: {0}")]
    Format(String),
}

/// Which fundamental solution drives the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    /// Image-form kernel with `∂G/∂x3 = 0` on the free surface (the default).
    Halfspace,
    /// Plain outgoing kernel (used by the mirror-equivalence identities).
    FreeSpace,
}

/// Complex jump density, one value per vertex, interpolated linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    values: Vec<Complex64>,
}

impl DensityField {
    /// Density on a crack mesh. Open cracks require the density to vanish on
    /// the boundary vertex loop (the discrete zero-extension condition).
    pub fn on_mesh(mesh: &CrackMesh, values: Vec<Complex64>) -> Result<Self, PotentialError> {
        let d = DensityField::unchecked(values)?;
        if d.values.len() != mesh.vertices().len() {
            return Err(PotentialError::Density(format!(
                "{} values for {} vertices",
                d.values.len(),
                mesh.vertices().len()
            )));
        }
        if mesh.kind() == MeshKind::OpenUp {
            let scale = 1.0 + d.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for i in mesh.boundary_vertices() {
                if d.values[i].norm() > 1e-10 * scale {
                    return Err(PotentialError::Density(format!(
                        "density does not vanish at boundary vertex {i} (|g| = {:.3e})",
                        d.values[i].norm()
                    )));
                }
            }
        }
        Ok(d)
    }

    /// Density on a curve; must vanish at both endpoints.
    pub fn on_curve(curve: &Curve2D, values: Vec<Complex64>) -> Result<Self, PotentialError> {
        let d = DensityField::unchecked(values)?;
        if d.values.len() != curve.points().len() {
            return Err(PotentialError::Density(format!(
                "{} values for {} curve points",
                d.values.len(),
                curve.points().len()
            )));
        }
        let scale = 1.0 + d.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in [0, d.values.len() - 1] {
            if d.values[i].norm() > 1e-10 * scale {
                return Err(PotentialError::Density(format!(
                    "density does not vanish at curve endpoint {i}"
                )));
            }
        }
        Ok(d)
    }

    /// Density without the zero-extension check (synthetic probe families,
    /// mirrored meshes); values must still be finite.
    pub fn unchecked(values: Vec<Complex64>) -> Result<Self, PotentialError> {
        for (i, v) in values.iter().enumerate() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(PotentialError::Density(format!("value {i} is not finite")));
            }
        }
        Ok(DensityField { values })
    }

    /// Real-valued density from a function of the vertex position.
    pub fn from_fn_on_mesh(
        mesh: &CrackMesh,
        f: impl Fn(&Vector3<f64>) -> f64,
    ) -> Result<Self, PotentialError> {
        DensityField::on_mesh(
            mesh,
            mesh.vertices().iter().map(|v| Complex64::new(f(v), 0.0)).collect(),
        )
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise linear combination `α·self + β·other`.
    ///
    /// # Panics
    /// Panics on length mismatch.
    pub fn axpby(&self, alpha: Complex64, other: &DensityField, beta: Complex64) -> DensityField {
        assert_eq!(self.len(), other.len(), "density length mismatch");
        DensityField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        }
    }

    /// Pointwise scaling by `s`.
    pub fn scaled(&self, s: Complex64) -> DensityField {
        DensityField { values: self.values.iter().map(|v| s * v).collect() }
    }
}

/// Double-layer kernel value `K(x, y) = KERNEL_SIGN·∂G/∂n(y)`.
fn kernel3(
    ctx: &WaveContext,
    x: &Vector3<f64>,
    y: &Vector3<f64>,
    n: &Vector3<f64>,
    choice: KernelChoice,
) -> Complex64 {
    let grad = match choice {
        KernelChoice::Halfspace => grad_y_greens_halfspace(ctx, x, y),
        KernelChoice::FreeSpace => grad_y_phi_free(ctx, x, y),
    };
    -(grad.x * n.x + grad.y * n.y + grad.z * n.z)
}

/// Gradient in `x` of the double-layer kernel.
fn kernel3_grad(
    ctx: &WaveContext,
    x: &Vector3<f64>,
    y: &Vector3<f64>,
    n: &Vector3<f64>,
    choice: KernelChoice,
) -> Vector3<Complex64> {
    let g = match choice {
        KernelChoice::Halfspace => grad_x_dny_greens_halfspace(ctx, x, y, n),
        KernelChoice::FreeSpace => grad_x_dny_phi_free(ctx, x, y, n),
    };
    Vector3::new(-g.x, -g.y, -g.z)
}

/// Mirror of a 2-D point across the free line `x2 = 0`.
fn mirror2(p: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(p.x, -p.y)
}

/// One free-space term of the 2-D kernel: `-∂/∂n(y) (i/4)H0(k|x-y|)`
/// evaluated with an arbitrary effective normal (the image term passes the
/// mirrored normal).
fn kernel2_term(k: f64, d: &Vector2<f64>, n: &Vector2<f64>) -> Complex64 {
    let r = d.norm();
    debug_assert!(r > 0.0);
    let dn = (d.x * n.x + d.y * n.y) / r;
    // ∇_y (i/4)H0(k r) = (i/4) k H1(k r) d̂  →  kernel term -(i/4) k H1 (d̂·n)
    Complex64::new(0.0, -0.25) * k * hankel1(k * r) * dn
}

/// Gradient in `x` of one free-space 2-D kernel term.
fn kernel2_term_grad(k: f64, d: &Vector2<f64>, n: &Vector2<f64>) -> Vector2<Complex64> {
    let r = d.norm();
    debug_assert!(r > 0.0);
    let dhat = d / r;
    let dn = dhat.x * n.x + dhat.y * n.y;
    let h1 = hankel1(k * r);
    // H1'(z) = H0(z) - H1(z)/z
    let dh1 = hankel0(k * r) - h1 / (k * r);
    let scale = Complex64::new(0.0, -0.25) * k;
    let radial = scale * k * dh1 * dn;
    let angular = scale * h1 / r;
    Vector2::new(
        radial * dhat.x + angular * (n.x - dn * dhat.x),
        radial * dhat.y + angular * (n.y - dn * dhat.y),
    )
}

/// 2-D double-layer kernel for the chosen fundamental solution.
fn kernel2(
    ctx: &WaveContext,
    x: &Vector2<f64>,
    y: &Vector2<f64>,
    n: &Vector2<f64>,
    choice: KernelChoice,
) -> Complex64 {
    let k = ctx.k();
    let v = kernel2_term(k, &(x - y), n);
    match choice {
        KernelChoice::FreeSpace => v,
        KernelChoice::Halfspace => {
            v + kernel2_term(k, &(x - mirror2(y)), &Vector2::new(n.x, -n.y))
        }
    }
}

/// Gradient in `x` of the 2-D double-layer kernel.
fn kernel2_grad(
    ctx: &WaveContext,
    x: &Vector2<f64>,
    y: &Vector2<f64>,
    n: &Vector2<f64>,
    choice: KernelChoice,
) -> Vector2<Complex64> {
    let k = ctx.k();
    let v = kernel2_term_grad(k, &(x - y), n);
    match choice {
        KernelChoice::FreeSpace => v,
        KernelChoice::Halfspace => {
            let w = kernel2_term_grad(k, &(x - mirror2(y)), &Vector2::new(n.x, -n.y));
            Vector2::new(v.x + w.x, v.y + w.y)
        }
    }
}

/// Validates density/mesh pairing and point admissibility, and returns the
/// surface guard radius.
fn check_inputs_3d(
    mesh: &CrackMesh,
    g: &DensityField,
    pts: &[Vector3<f64>],
    q: &QuadratureConfig,
) -> Result<f64, PotentialError> {
    if g.len() != mesh.vertices().len() {
        return Err(PotentialError::Density(format!(
            "{} density values for {} vertices",
            g.len(),
            mesh.vertices().len()
        )));
    }
    for (index, p) in pts.iter().enumerate() {
        if p.z > 0.0 {
            return Err(PotentialError::PointAboveSurface { index, z: p.z });
        }
    }
    let guard = SURFACE_GUARD * mesh.diameter();
    if !q.allow_near {
        for (index, p) in pts.iter().enumerate() {
            let mut dist = f64::INFINITY;
            for i in 0..mesh.triangles().len() {
                let c = mesh.corners(i);
                dist = dist.min(point_triangle_distance(p, &c[0], &c[1], &c[2]));
            }
            if dist < guard {
                return Err(PotentialError::PointOnSurface { index, dist });
            }
        }
    }
    Ok(guard)
}

/// Evaluates the double-layer potential of `g` over `mesh` at `pts` with the
/// half-space kernel.
pub fn eval_double_layer_3d(
    mesh: &CrackMesh,
    g: &DensityField,
    ctx: &WaveContext,
    pts: &[Vector3<f64>],
    q: &QuadratureConfig,
) -> Result<FieldSamples, PotentialError> {
    eval_double_layer_3d_kernel(mesh, g, ctx, pts, q, KernelChoice::Halfspace)
}

/// [`eval_double_layer_3d`] with an explicit kernel choice.
pub fn eval_double_layer_3d_kernel(
    mesh: &CrackMesh,
    g: &DensityField,
    ctx: &WaveContext,
    pts: &[Vector3<f64>],
    q: &QuadratureConfig,
    choice: KernelChoice,
) -> Result<FieldSamples, PotentialError> {
    check_inputs_3d(mesh, g, pts, q)?;
    let values: Vec<Complex64> = pts
        .par_iter()
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..mesh.triangles().len() {
                let corners = mesh.corners(t);
                let [a, b, c] = mesh.triangles()[t];
                let gv = [g.values[a], g.values[b], g.values[c]];
                let n = *mesh.normal(t);
                acc += quadrature::integrate_triangle(x, &corners, &gv, 0, q, &|y| {
                    kernel3(ctx, x, y, &n, choice)
                });
            }
            acc
        })
        .collect();
    Ok(FieldSamples::new3(pts, values, None))
}

/// Evaluates the potential and its gradient at `pts` (half-space kernel).
pub fn eval_double_layer_grad_3d(
    mesh: &CrackMesh,
    g: &DensityField,
    ctx: &WaveContext,
    pts: &[Vector3<f64>],
    q: &QuadratureConfig,
) -> Result<FieldSamples, PotentialError> {
    eval_double_layer_grad_3d_kernel(mesh, g, ctx, pts, q, KernelChoice::Halfspace)
}

/// [`eval_double_layer_grad_3d`] with an explicit kernel choice.
pub fn eval_double_layer_grad_3d_kernel(
    mesh: &CrackMesh,
    g: &DensityField,
    ctx: &WaveContext,
    pts: &[Vector3<f64>],
    q: &QuadratureConfig,
    choice: KernelChoice,
) -> Result<FieldSamples, PotentialError> {
    check_inputs_3d(mesh, g, pts, q)?;
    let rows: Vec<(Complex64, Vector3<Complex64>)> = pts
        .par_iter()
        .map(|x| {
            let mut acc = quadrature::Quad4::zero();
            for t in 0..mesh.triangles().len() {
                let corners = mesh.corners(t);
                let [a, b, c] = mesh.triangles()[t];
                let gv = [g.values[a], g.values[b], g.values[c]];
                let n = *mesh.normal(t);
                let cell: quadrature::Quad4 =
                    quadrature::integrate_triangle(x, &corners, &gv, 0, q, &|y| {
                        let v = kernel3(ctx, x, y, &n, choice);
                        let dv = kernel3_grad(ctx, x, y, &n, choice);
                        quadrature::Quad4([v, dv.x, dv.y, dv.z])
                    });
                acc = acc.add(cell);
            }
            (acc.0[0], Vector3::new(acc.0[1], acc.0[2], acc.0[3]))
        })
        .collect();
    let values = rows.iter().map(|(v, _)| *v).collect();
    let grads = rows.into_iter().map(|(_, g)| g).collect();
    Ok(FieldSamples::new3(pts, values, Some(grads)))
}

fn check_inputs_2d(
    curve: &Curve2D,
    g: &DensityField,
    pts: &[Vector2<f64>],
    q: &QuadratureConfig,
) -> Result<(), PotentialError> {
    if g.len() != curve.points().len() {
        return Err(PotentialError::Density(format!(
            "{} density values for {} curve points",
            g.len(),
            curve.points().len()
        )));
    }
    for (index, p) in pts.iter().enumerate() {
        if p.y > 0.0 {
            return Err(PotentialError::PointAboveSurface { index, z: p.y });
        }
    }
    let guard = SURFACE_GUARD * curve.diameter();
    if !q.allow_near {
        for (index, p) in pts.iter().enumerate() {
            let mut dist = f64::INFINITY;
            for i in 0..curve.segment_count() {
                let (a, b) = curve.segment(i);
                dist = dist.min(point_segment_distance(p, &a, &b));
            }
            if dist < guard {
                return Err(PotentialError::PointOnSurface { index, dist });
            }
        }
    }
    Ok(())
}

/// Evaluates the 2-D double-layer potential over a curve (half-space kernel
/// `(i/4)[H0(k|x-y|) + H0(k|x-ȳ|)]`).
pub fn eval_double_layer_2d(
    curve: &Curve2D,
    g: &DensityField,
    ctx: &WaveContext,
    pts: &[Vector2<f64>],
    q: &QuadratureConfig,
) -> Result<FieldSamples, PotentialError> {
    eval_double_layer_2d_kernel(curve, g, ctx, pts, q, KernelChoice::Halfspace)
}

/// [`eval_double_layer_2d`] with an explicit kernel choice.
pub fn eval_double_layer_2d_kernel(
    curve: &Curve2D,
    g: &DensityField,
    ctx: &WaveContext,
    pts: &[Vector2<f64>],
    q: &QuadratureConfig,
    choice: KernelChoice,
) -> Result<FieldSamples, PotentialError> {
    check_inputs_2d(curve, g, pts, q)?;
    let values: Vec<Complex64> = pts
        .par_iter()
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..curve.segment_count() {
                let (a, b) = curve.segment(s);
                let gv = [g.values[s], g.values[s + 1]];
                let n = *curve.normal(s);
                acc += quadrature::integrate_segment(x, &[a, b], &gv, 0, q, &|y| {
                    kernel2(ctx, x, y, &n, choice)
                });
            }
            acc
        })
        .collect();
    Ok(FieldSamples::new2(pts, values, None))
}

/// Evaluates the 2-D potential and its gradient at `pts`.
pub fn eval_double_layer_grad_2d(
    curve: &Curve2D,
    g: &DensityField,
    ctx: &WaveContext,
    pts: &[Vector2<f64>],
    q: &QuadratureConfig,
) -> Result<FieldSamples, PotentialError> {
    check_inputs_2d(curve, g, pts, q)?;
    let choice = KernelChoice::Halfspace;
    let rows: Vec<(Complex64, Vector2<Complex64>)> = pts
        .par_iter()
        .map(|x| {
            let mut acc = quadrature::Quad4::zero();
            for s in 0..curve.segment_count() {
                let (a, b) = curve.segment(s);
                let gv = [g.values[s], g.values[s + 1]];
                let n = *curve.normal(s);
                let seg: quadrature::Quad4 =
                    quadrature::integrate_segment(x, &[a, b], &gv, 0, q, &|y| {
                        let v = kernel2(ctx, x, y, &n, choice);
                        let dv = kernel2_grad(ctx, x, y, &n, choice);
                        quadrature::Quad4([v, dv.x, dv.y, Complex64::new(0.0, 0.0)])
                    });
                acc = acc.add(seg);
            }
            (acc.0[0], Vector2::new(acc.0[1], acc.0[2]))
        })
        .collect();
    let values = rows.iter().map(|(v, _)| *v).collect();
    let grads = rows.into_iter().map(|(_, g)| g).collect();
    Ok(FieldSamples::new2(pts, values, Some(grads)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_hemisphere, make_planar_crack, make_sphere};
    use crate::special::{bessel_j1, psi_ball, zeros_of_dj};

    fn flat_crack(n: usize) -> CrackMesh {
        make_planar_crack(
            &Vector3::new(0.0, 0.0, -2.0),
            &Vector3::new(1.0, 0.0, 0.0),
            &Vector3::new(0.0, 1.0, 0.0),
            (0.5, 0.5),
            n,
            n,
        )
        .unwrap()
    }

    /// Product of boundary-vanishing bump factors on the unit square patch.
    fn bump(mesh: &CrackMesh) -> DensityField {
        DensityField::from_fn_on_mesh(mesh, |v| {
            let s = (v.x + 0.5) * std::f64::consts::PI;
            let t = (v.y + 0.5) * std::f64::consts::PI;
            s.sin() * t.sin()
        })
        .unwrap()
    }

    #[test]
    fn zero_density_gives_zero_field() {
        let mesh = flat_crack(4);
        let g = DensityField::on_mesh(&mesh, vec![Complex64::new(0.0, 0.0); mesh.vertices().len()])
            .unwrap();
        let ctx = WaveContext::from_wavenumber(1.3);
        let pts = [Vector3::new(0.4, -0.7, -0.5), Vector3::new(2.0, 1.0, -3.0)];
        let out = eval_double_layer_3d(&mesh, &g, &ctx, &pts, &QuadratureConfig::default()).unwrap();
        for i in 0..out.len() {
            assert_eq!(out.value(i), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn open_crack_densities_must_vanish_on_the_boundary_loop() {
        let mesh = flat_crack(3);
        let bad = DensityField::on_mesh(&mesh, vec![Complex64::new(1.0, 0.0); mesh.vertices().len()]);
        assert!(matches!(bad, Err(PotentialError::Density(_))));
        // the closed sphere has no boundary, so constants are admissible
        let sphere = make_sphere(&Vector3::new(0.0, 0.0, -2.0), 1.0, 2).unwrap();
        let ok =
            DensityField::on_mesh(&sphere, vec![Complex64::new(1.0, 0.0); sphere.vertices().len()]);
        assert!(ok.is_ok());
    }

    #[test]
    fn evaluation_is_linear_in_the_density() {
        let mesh = flat_crack(3);
        let g1 = bump(&mesh);
        let g2 = DensityField::from_fn_on_mesh(&mesh, |v| {
            let s = (v.x + 0.5) * std::f64::consts::PI;
            let t = (v.y + 0.5) * std::f64::consts::PI;
            (2.0 * s).sin() * t.sin()
        })
        .unwrap();
        let alpha = Complex64::new(0.7, -1.2);
        let beta = Complex64::new(-0.3, 0.4);
        let combo = g1.axpby(alpha, &g2, beta);
        let ctx = WaveContext::from_wavenumber(2.0);
        let pts = [Vector3::new(0.3, 0.2, -1.0), Vector3::new(-1.5, 0.4, -2.5)];
        let q = QuadratureConfig::default();
        let u1 = eval_double_layer_3d(&mesh, &g1, &ctx, &pts, &q).unwrap();
        let u2 = eval_double_layer_3d(&mesh, &g2, &ctx, &pts, &q).unwrap();
        let uc = eval_double_layer_3d(&mesh, &combo, &ctx, &pts, &q).unwrap();
        for i in 0..pts.len() {
            let want = alpha * u1.value(i) + beta * u2.value(i);
            assert!((uc.value(i) - want).norm() <= 1e-13 * want.norm().max(1e-30));
        }
    }

    #[test]
    fn half_space_field_equals_free_space_field_plus_its_mirror_image() {
        let mesh = make_hemisphere(&Vector3::new(0.2, -0.1, -2.0), 0.8, true, 2).unwrap();
        // vanishes on the equator ring z = -2, so the density is admissible
        let g = DensityField::from_fn_on_mesh(&mesh, |v| (v.z + 2.0) * (1.2 - (v.x - 0.2).abs()))
            .unwrap();
        let mirrored_mesh = mesh.mirror_z();
        let g_mirror = DensityField::unchecked(g.values().to_vec()).unwrap();
        let ctx = WaveContext::from_wavenumber(1.9);
        // all points far enough from both the mesh and its image that the
        // near-field subdivision never triggers: the two computations then
        // use identical quadrature nodes and agree to roundoff
        let pts = [
            Vector3::new(1.8, 0.5, -0.5),
            Vector3::new(-1.0, 0.2, -3.8),
            Vector3::new(3.0, -2.0, -1.0),
        ];
        let q = QuadratureConfig::default();
        let half = eval_double_layer_3d(&mesh, &g, &ctx, &pts, &q).unwrap();
        let free =
            eval_double_layer_3d_kernel(&mesh, &g, &ctx, &pts, &q, KernelChoice::FreeSpace).unwrap();
        let image = eval_double_layer_3d_kernel(
            &mirrored_mesh,
            &g_mirror,
            &ctx,
            &pts,
            &q,
            KernelChoice::FreeSpace,
        )
        .unwrap();
        for i in 0..pts.len() {
            let combined = free.value(i) + image.value(i);
            assert!(
                (half.value(i) - combined).norm() <= 1e-13 * half.value(i).norm(),
                "point {i}: {} vs {}",
                half.value(i),
                combined
            );
        }
    }

    #[test]
    fn closed_sphere_reproduces_the_interior_eigenfunction() {
        // the sign anchor: double layer of the ψ-trace gives +ψ inside, ~0 outside
        let k1 = zeros_of_dj(1, 1)[0];
        let center = Vector3::new(0.0, 0.0, -2.0);
        let mesh = make_sphere(&center, 1.0, 3).unwrap();
        let g = DensityField::from_fn_on_mesh(&mesh, |v| psi_ball(&(v - center), k1)).unwrap();
        let ctx = WaveContext::from_wavenumber(k1);
        let q = QuadratureConfig::default();
        let interior = [
            Vector3::new(0.0, 0.0, -1.6),
            Vector3::new(0.3, 0.2, -2.4),
            Vector3::new(-0.5, 0.1, -2.1),
        ];
        let exterior = [Vector3::new(2.0, 0.0, -2.0), Vector3::new(0.0, 1.8, -3.2)];
        let psi_max = crate::special::j1(k1); // j1 peaks at k1, bounding |ψ|
        let ui = eval_double_layer_3d(&mesh, &g, &ctx, &interior, &q).unwrap();
        for (i, p) in interior.iter().enumerate() {
            let want = psi_ball(&(p - center), k1);
            assert!(
                (ui.value(i) - Complex64::new(want, 0.0)).norm() <= 2e-2 * psi_max,
                "interior point {i}: got {}, want {want}",
                ui.value(i)
            );
        }
        let ue = eval_double_layer_3d(&mesh, &g, &ctx, &exterior, &q).unwrap();
        for i in 0..exterior.len() {
            assert!(ue.value(i).norm() <= 2e-2 * psi_max, "exterior point {i}");
        }
    }

    #[test]
    fn static_disk_jump_at_center_is_the_density() {
        // flat crack, k→0 limit probed with a tiny wavenumber: the two-sided
        // difference at the center recovers g = 1 (solid-angle identity);
        // one Richardson step removes the O(ε) term carried by ∂u/∂n ≠ 0
        let mesh = flat_crack(12);
        let g = bump(&mesh);
        let ctx = WaveContext::from_wavenumber(1e-6);
        let q = QuadratureConfig { order: 6, ..QuadratureConfig::default() }.near_allowed();
        let two_sided = |eps: f64| {
            let up = Vector3::new(0.0, 0.0, -2.0 + eps);
            let dn = Vector3::new(0.0, 0.0, -2.0 - eps);
            let out = eval_double_layer_3d(&mesh, &g, &ctx, &[dn, up], &q).unwrap();
            out.value(0) - out.value(1)
        };
        let jump = two_sided(0.02) * 2.0 - two_sided(0.04);
        // center value of the bump density is 1
        assert!(
            (jump - Complex64::new(1.0, 0.0)).norm() < 0.02,
            "jump = {jump} should be ≈ 1"
        );
    }

    #[test]
    fn gradients_match_finite_differences_of_the_value() {
        let mesh = flat_crack(4);
        let g = bump(&mesh);
        let ctx = WaveContext::from_wavenumber(1.6);
        let q = QuadratureConfig::default();
        let pts = [Vector3::new(0.4, -0.3, -1.2), Vector3::new(-0.8, 0.5, -2.9)];
        let with_grad = eval_double_layer_grad_3d(&mesh, &g, &ctx, &pts, &q).unwrap();
        let h = 1e-4 * mesh.diameter();
        for (i, p) in pts.iter().enumerate() {
            for axis in 0..3 {
                let mut e = Vector3::zeros();
                e[axis] = h;
                let plus = eval_double_layer_3d(&mesh, &g, &ctx, &[p + e], &q).unwrap().value(0);
                let minus = eval_double_layer_3d(&mesh, &g, &ctx, &[p - e], &q).unwrap().value(0);
                let fd = (plus - minus) / Complex64::new(2.0 * h, 0.0);
                let got = with_grad.gradient3(i)[axis];
                assert!(
                    (got - fd).norm() <= 1e-4 * got.norm().max(1e-12),
                    "point {i} axis {axis}: {got} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn vertical_gradient_component_vanishes_on_the_free_surface() {
        let mesh = flat_crack(4);
        let g = bump(&mesh);
        let ctx = WaveContext::from_wavenumber(2.3);
        let pts = [Vector3::new(0.7, -1.1, 0.0), Vector3::new(-2.0, 0.3, 0.0)];
        let out =
            eval_double_layer_grad_3d(&mesh, &g, &ctx, &pts, &QuadratureConfig::default()).unwrap();
        for i in 0..pts.len() {
            let grad = out.gradient3(i);
            let tangential =
                (grad.x.norm_sqr() + grad.y.norm_sqr()).sqrt().max(out.value(i).norm());
            assert!(
                grad.z.norm() <= 1e-12 * tangential,
                "∂3 u = {} vs scale {tangential}",
                grad.z.norm()
            );
        }
    }

    #[test]
    fn quadrature_is_converged_at_moderate_order_for_far_points() {
        let mesh = flat_crack(4);
        let g = bump(&mesh);
        let ctx = WaveContext::from_wavenumber(1.4);
        let pt = [Vector3::new(1.5, 2.0, -4.0)];
        let u6 = eval_double_layer_3d(
            &mesh,
            &g,
            &ctx,
            &pt,
            &QuadratureConfig::new(6, 2.0, 8).unwrap(),
        )
        .unwrap()
        .value(0);
        let u12 = eval_double_layer_3d(
            &mesh,
            &g,
            &ctx,
            &pt,
            &QuadratureConfig::new(12, 2.0, 8).unwrap(),
        )
        .unwrap()
        .value(0);
        assert!((u6 - u12).norm() <= 1e-8 * u12.norm());
    }

    #[test]
    fn far_field_satisfies_the_radiation_condition() {
        // |∂u/∂r - ik u| must fall one order in 1/r faster than |u|
        let mesh = flat_crack(4);
        let g = bump(&mesh);
        let k = 2.0;
        let ctx = WaveContext::from_wavenumber(k);
        let q = QuadratureConfig::default();
        let dir = Vector3::new(0.3, 0.2, -1.0).normalize();
        let anchor = Vector3::new(0.0, 0.0, -2.0);
        let lambda = 2.0 * std::f64::consts::PI / k;
        let radii: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|m| m * lambda).collect();
        let pts: Vec<Vector3<f64>> = radii.iter().map(|r| anchor + dir * *r).collect();
        let out = eval_double_layer_grad_3d(&mesh, &g, &ctx, &pts, &q).unwrap();
        let mut log_u = Vec::new();
        let mut log_rad = Vec::new();
        for i in 0..pts.len() {
            let u = out.value(i);
            let grad = out.gradient3(i);
            let du_dr = grad.x * dir.x + grad.y * dir.y + grad.z * dir.z;
            let defect = du_dr - Complex64::new(0.0, k) * u;
            log_u.push(u.norm().ln());
            log_rad.push(defect.norm().ln());
        }
        let span = (radii[2] / radii[0]).ln();
        let slope_u = (log_u[2] - log_u[0]) / span;
        let slope_rad = (log_rad[2] - log_rad[0]) / span;
        assert!(slope_u > -1.3 && slope_u < -0.7, "|u| slope {slope_u}");
        assert!(
            slope_rad <= slope_u - 0.8,
            "radiation defect slope {slope_rad} vs |u| slope {slope_u}"
        );
    }

    #[test]
    fn points_on_the_surface_are_rejected_without_the_near_flag() {
        let mesh = flat_crack(3);
        let g = bump(&mesh);
        let ctx = WaveContext::from_wavenumber(1.0);
        let on_surface = [Vector3::new(0.1, 0.1, -2.0)];
        let err = eval_double_layer_3d(&mesh, &g, &ctx, &on_surface, &QuadratureConfig::default());
        assert!(matches!(err, Err(PotentialError::PointOnSurface { index: 0, .. })));
        let ok = eval_double_layer_3d(
            &mesh,
            &g,
            &ctx,
            &on_surface,
            &QuadratureConfig::default().near_allowed(),
        );
        assert!(ok.is_ok());
        let above = [Vector3::new(0.0, 0.0, 0.5)];
        let err2 = eval_double_layer_3d(&mesh, &g, &ctx, &above, &QuadratureConfig::default());
        assert!(matches!(err2, Err(PotentialError::PointAboveSurface { index: 0, .. })));
    }

    // ---- 2-D ----

    /// Semicircular arc of radius `r` about `c`, sampled at `n+1` points from
    /// angle `π` to `0` (left to right); `upper` picks the sign of the arc.
    fn semicircle(c: Vector2<f64>, r: f64, upper: bool, n: usize) -> Curve2D {
        let pts: Vec<Vector2<f64>> = (0..=n)
            .map(|i| {
                let th = std::f64::consts::PI * (1.0 - i as f64 / n as f64);
                let s = if upper { 1.0 } else { -1.0 };
                Vector2::new(c.x + r * th.cos(), c.y + s * r * th.sin())
            })
            .collect();
        Curve2D::new(pts, 0.5).unwrap()
    }

    /// First positive zero of J1' (Neumann eigen-wavenumber of the unit disk),
    /// found by bisection on J0(x) - J1(x)/x.
    fn disk_eigen_wavenumber() -> f64 {
        let f = |x: f64| crate::special::bessel_j0(x) - bessel_j1(x) / x;
        let (mut lo, mut hi) = (1.5, 2.2);
        assert!(f(lo) * f(hi) < 0.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Odd Neumann eigenfunction of the disk: J1(κρ)·sinθ about the center.
    fn disk_mode(p: &Vector2<f64>, c: &Vector2<f64>, kappa: f64) -> f64 {
        let d = p - c;
        let rho = d.norm();
        if rho < 1e-12 {
            return 0.0;
        }
        bessel_j1(kappa * rho) * d.y / rho
    }

    #[test]
    fn closed_circle_pair_reproduces_the_disk_eigenfunction() {
        // two open half-arcs assembled into the closed-circle identity:
        // u_upper - u_lower = (eigenfunction inside, 0 outside)
        let kappa = disk_eigen_wavenumber();
        let c = Vector2::new(0.0, -3.0);
        let n = 160;
        let upper = semicircle(c, 1.0, true, n);
        let lower = semicircle(c, 1.0, false, n);
        let trace_up: Vec<Complex64> = upper
            .points()
            .iter()
            .map(|p| Complex64::new(disk_mode(p, &c, kappa), 0.0))
            .collect();
        let trace_dn: Vec<Complex64> = lower
            .points()
            .iter()
            .map(|p| Complex64::new(disk_mode(p, &c, kappa), 0.0))
            .collect();
        let gu = DensityField::on_curve(&upper, trace_up).unwrap();
        let gl = DensityField::on_curve(&lower, trace_dn).unwrap();
        let ctx = WaveContext::from_wavenumber(kappa);
        let q = QuadratureConfig::default();
        let interior = [
            Vector2::new(0.0, -2.5),
            Vector2::new(0.4, -3.3),
            Vector2::new(-0.6, -2.8),
        ];
        let exterior = [Vector2::new(2.5, -3.0), Vector2::new(0.0, -0.8)];
        let scale = 0.58; // max |J1| bounds the mode amplitude
        let ui_u = eval_double_layer_2d(&upper, &gu, &ctx, &interior, &q).unwrap();
        let ui_l = eval_double_layer_2d(&lower, &gl, &ctx, &interior, &q).unwrap();
        for (i, p) in interior.iter().enumerate() {
            let got = ui_u.value(i) - ui_l.value(i);
            let want = disk_mode(p, &c, kappa);
            assert!(
                (got - Complex64::new(want, 0.0)).norm() <= 1e-2 * scale,
                "interior {i}: {got} vs {want}"
            );
        }
        let ue_u = eval_double_layer_2d(&upper, &gu, &ctx, &exterior, &q).unwrap();
        let ue_l = eval_double_layer_2d(&lower, &gl, &ctx, &exterior, &q).unwrap();
        for i in 0..exterior.len() {
            assert!((ue_u.value(i) - ue_l.value(i)).norm() <= 1e-2 * scale, "exterior {i}");
        }
    }

    #[test]
    fn two_dimensional_field_is_even_across_the_free_line() {
        // ∂2 u = 0 on x2 = 0 for the image kernel
        let curve = semicircle(Vector2::new(0.3, -2.5), 0.9, true, 40);
        let vals: Vec<Complex64> = (0..curve.points().len())
            .map(|i| {
                let t = i as f64 / (curve.points().len() - 1) as f64;
                Complex64::new((std::f64::consts::PI * t).sin(), 0.0)
            })
            .collect();
        let g = DensityField::on_curve(&curve, vals).unwrap();
        let ctx = WaveContext::from_wavenumber(1.8);
        let pts = [Vector2::new(0.5, 0.0), Vector2::new(-1.7, 0.0)];
        let out =
            eval_double_layer_grad_2d(&curve, &g, &ctx, &pts, &QuadratureConfig::default()).unwrap();
        for i in 0..pts.len() {
            let grad = out.gradient3(i);
            let scale = grad.x.norm().max(out.value(i).norm());
            assert!(grad.y.norm() <= 1e-12 * scale, "∂2 u = {}", grad.y.norm());
        }
    }

    #[test]
    fn two_dimensional_gradients_match_finite_differences() {
        let curve = semicircle(Vector2::new(0.0, -2.0), 0.7, true, 30);
        let vals: Vec<Complex64> = (0..curve.points().len())
            .map(|i| {
                let t = i as f64 / (curve.points().len() - 1) as f64;
                Complex64::new((std::f64::consts::PI * t).sin(), 0.3 * (2.0 * std::f64::consts::PI * t).sin())
            })
            .collect();
        let g = DensityField::on_curve(&curve, vals).unwrap();
        let ctx = WaveContext::from_wavenumber(2.2);
        let q = QuadratureConfig::default();
        let p = Vector2::new(0.8, -1.1);
        let out = eval_double_layer_grad_2d(&curve, &g, &ctx, &[p], &q).unwrap();
        let h = 1e-5;
        for axis in 0..2 {
            let mut e = Vector2::zeros();
            e[axis] = h;
            let plus = eval_double_layer_2d(&curve, &g, &ctx, &[p + e], &q).unwrap().value(0);
            let minus = eval_double_layer_2d(&curve, &g, &ctx, &[p - e], &q).unwrap().value(0);
            let fd = (plus - minus) / Complex64::new(2.0 * h, 0.0);
            let got = out.gradient3(0)[axis];
            assert!((got - fd).norm() <= 1e-6 * got.norm(), "axis {axis}: {got} vs {fd}");
        }
    }
}
