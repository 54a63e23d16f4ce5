//! Two-sided crack probes and discrete Helmholtz residuals.
//!
//! The jump probe samples `u(x - εn) - u(x + εn)` for a decreasing list of
//! offsets and extrapolates the polynomial in ε to ε = 0 with a Neville
//! table, eliminating the surviving first-order term (the normal derivative
//! is continuous across the crack but not zero). The residual probes apply
//! the standard second-order stencil for `Δu + k²u` to any field evaluator.

use super::{
    eval_double_layer_3d, eval_double_layer_grad_3d, DensityField, PotentialError,
    QuadratureConfig,
};
use crate::geometry::CrackMesh;
use crate::special::WaveContext;
use nalgebra::Vector3;
use num_complex::Complex64;

/// Extrapolated probe output with a table-based error estimate.
#[derive(Debug, Clone, Copy)]
pub struct ProbeResult {
    /// Extrapolated value at ε = 0.
    pub value: Complex64,
    /// Magnitude of the last diagonal correction of the extrapolation table.
    pub err_estimate: f64,
    /// Whether the diagonal corrections decreased monotonically.
    pub converged: bool,
}

/// Polynomial extrapolation of `samples[i] = f(eps[i])` to ε = 0 (Neville
/// diagonal scheme); the corrections between successive diagonal entries
/// drive the error estimate and the convergence flag.
fn extrapolate_to_zero(eps: &[f64], samples: Vec<Complex64>) -> ProbeResult {
    let n = eps.len();
    let mut tab = samples;
    for j in 1..n {
        for i in (j..n).rev() {
            tab[i] = (tab[i] * eps[i - j] - tab[i - 1] * eps[i]) / (eps[i - j] - eps[i]);
        }
    }
    // tab[i] is written last at stage j = i, so it ends as the diagonal entry
    let scale = tab.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let corrections: Vec<f64> = (1..n).map(|i| (tab[i] - tab[i - 1]).norm()).collect();
    let floor = 1e-12 * (1.0 + scale);
    let converged = corrections.windows(2).all(|w| w[1] <= w[0] || w[1] <= floor);
    ProbeResult {
        value: tab[n - 1],
        err_estimate: *corrections.last().expect("at least two samples"),
        converged,
    }
}

fn validate_eps(eps_list: &[f64]) -> Result<(), PotentialError> {
    if eps_list.len() < 2 {
        return Err(PotentialError::Config(
            "extrapolation needs at least two offsets".into(),
        ));
    }
    for w in eps_list.windows(2) {
        if !(w[1] > 0.0 && w[1] < w[0]) {
            return Err(PotentialError::Config(
                "offsets must be positive and strictly decreasing".into(),
            ));
        }
    }
    if !(eps_list[0] > 0.0 && eps_list[0].is_finite()) {
        return Err(PotentialError::Config("offsets must be positive and finite".into()));
    }
    Ok(())
}

fn unit_normal(n: &Vector3<f64>) -> Result<Vector3<f64>, PotentialError> {
    let norm = n.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(PotentialError::Config("probe normal must be a nonzero vector".into()));
    }
    Ok(n / norm)
}

/// Extrapolated two-sided jump `u(x - εn) - u(x + εn)` at ε = 0.
///
/// On the crack this recovers the density `+g` (the `+` side being the one
/// `n` points toward); beyond the crack boundary the field is continuous and
/// the probe extrapolates to zero. Only the direction of `n` matters.
pub fn jump_probe(
    mesh: &CrackMesh,
    g: &DensityField,
    ctx: &WaveContext,
    surface_point: &Vector3<f64>,
    n: &Vector3<f64>,
    eps_list: &[f64],
    q: &QuadratureConfig,
) -> Result<ProbeResult, PotentialError> {
    validate_eps(eps_list)?;
    let nhat = unit_normal(n)?;
    let m = eps_list.len();
    let pts: Vec<Vector3<f64>> = eps_list
        .iter()
        .map(|&e| *surface_point - nhat * e)
        .chain(eps_list.iter().map(|&e| *surface_point + nhat * e))
        .collect();
    let out = eval_double_layer_3d(mesh, g, ctx, &pts, q)?;
    let samples = (0..m).map(|i| out.value(i) - out.value(m + i)).collect();
    Ok(extrapolate_to_zero(eps_list, samples))
}

/// Extrapolated two-sided jump of the normal derivative `∂u/∂n`; this is
/// continuous across the crack, so the probe extrapolates to zero there.
pub fn normal_jump_probe(
    mesh: &CrackMesh,
    g: &DensityField,
    ctx: &WaveContext,
    surface_point: &Vector3<f64>,
    n: &Vector3<f64>,
    eps_list: &[f64],
    q: &QuadratureConfig,
) -> Result<ProbeResult, PotentialError> {
    validate_eps(eps_list)?;
    let nhat = unit_normal(n)?;
    let m = eps_list.len();
    let pts: Vec<Vector3<f64>> = eps_list
        .iter()
        .map(|&e| *surface_point - nhat * e)
        .chain(eps_list.iter().map(|&e| *surface_point + nhat * e))
        .collect();
    let out = eval_double_layer_grad_3d(mesh, g, ctx, &pts, q)?;
    let dn = |i: usize| {
        let gr = out.gradient3(i);
        gr[0] * nhat.x + gr[1] * nhat.y + gr[2] * nhat.z
    };
    let samples = (0..m).map(|i| dn(i) - dn(m + i)).collect();
    Ok(extrapolate_to_zero(eps_list, samples))
}

/// Seven-point discrete `Δu + k²u` of an arbitrary field evaluator.
///
/// The stencil must stay inside the physical half-space `x₃ < 0`; legs that
/// collide with the crack surface are rejected by the evaluator itself.
pub fn helmholtz_residual_3d<F>(
    field: &F,
    ctx: &WaveContext,
    pt: &Vector3<f64>,
    h: f64,
) -> Result<Complex64, PotentialError>
where
    F: Fn(&Vector3<f64>) -> Result<Complex64, PotentialError>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(PotentialError::Config(format!("stencil radius must be positive, got {h}")));
    }
    if pt.z + h > 0.0 {
        return Err(PotentialError::Stencil { h });
    }
    let center = field(pt)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for axis in 0..3 {
        for sign in [-1.0, 1.0] {
            let mut p = *pt;
            p[axis] += sign * h;
            sum += field(&p)?;
        }
    }
    let k = ctx.k();
    Ok((sum - center * 6.0) / (h * h) + center * (k * k))
}

/// Five-point planar analogue of [`helmholtz_residual_3d`] (half-plane
/// `x₂ < 0`).
pub fn helmholtz_residual_2d<F>(
    field: &F,
    ctx: &WaveContext,
    pt: &nalgebra::Vector2<f64>,
    h: f64,
) -> Result<Complex64, PotentialError>
where
    F: Fn(&nalgebra::Vector2<f64>) -> Result<Complex64, PotentialError>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(PotentialError::Config(format!("stencil radius must be positive, got {h}")));
    }
    if pt.y + h > 0.0 {
        return Err(PotentialError::Stencil { h });
    }
    let center = field(pt)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for axis in 0..2 {
        for sign in [-1.0, 1.0] {
            let mut p = *pt;
            p[axis] += sign * h;
            sum += field(&p)?;
        }
    }
    let k = ctx.k();
    Ok((sum - center * 4.0) / (h * h) + center * (k * k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_planar_crack;
    use crate::special::{hankel0, phi_free};
    use nalgebra::Vector2;

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

    fn bump(mesh: &CrackMesh) -> DensityField {
        DensityField::from_fn_on_mesh(mesh, |v| {
            let s = (v.x + 0.5) * std::f64::consts::PI;
            let t = (v.y + 0.5) * std::f64::consts::PI;
            s.sin() * t.sin()
        })
        .unwrap()
    }

    /// Centroid of cell `t` together with the density value interpolated there.
    fn cell_center(mesh: &CrackMesh, g: &DensityField, t: usize) -> (Vector3<f64>, Complex64) {
        let c = mesh.corners(t);
        let [a, b, cc] = mesh.triangles()[t];
        let center = (c[0] + c[1] + c[2]) / 3.0;
        let gval = (g.values()[a] + g.values()[b] + g.values()[cc]) / 3.0;
        (center, gval)
    }

    #[test]
    fn jump_probe_recovers_the_density_at_cell_centers() {
        let mesh = flat_crack(8);
        let g = bump(&mesh);
        let ctx = WaveContext::from_wavenumber(1.3);
        let q = QuadratureConfig::new(6, 2.0, 8).unwrap();
        let eps = [0.2, 0.1, 0.05, 0.025];
        let up = Vector3::new(0.0, 0.0, 1.0);
        for t in [72, 73, 40] {
            let (center, expected) = cell_center(&mesh, &g, t);
            let r = jump_probe(&mesh, &g, &ctx, &center, &up, &eps, &q).unwrap();
            assert!(r.converged, "table did not settle at cell {t}");
            assert!(
                (r.value - expected).norm() <= 1e-2 * expected.norm(),
                "cell {t}: probe {} vs density {}",
                r.value,
                expected
            );
        }
    }

    #[test]
    fn jump_probe_flips_sign_with_the_normal() {
        let mesh = flat_crack(8);
        let g = bump(&mesh);
        let ctx = WaveContext::from_wavenumber(1.3);
        let q = QuadratureConfig::default();
        let eps = [0.2, 0.1, 0.05];
        let (center, _) = cell_center(&mesh, &g, 72);
        let up = jump_probe(&mesh, &g, &ctx, &center, &Vector3::new(0.0, 0.0, 1.0), &eps, &q)
            .unwrap();
        let down = jump_probe(&mesh, &g, &ctx, &center, &Vector3::new(0.0, 0.0, -1.0), &eps, &q)
            .unwrap();
        assert!((up.value + down.value).norm() <= 1e-12 * up.value.norm());
    }

    #[test]
    fn jump_probe_is_zero_beyond_the_crack_edge() {
        let mesh = flat_crack(8);
        let g = bump(&mesh);
        let ctx = WaveContext::from_wavenumber(1.3);
        let q = QuadratureConfig::default();
        let eps = [0.2, 0.1, 0.05, 0.025];
        let outside = Vector3::new(0.8, 0.8, -2.0);
        let r = jump_probe(&mesh, &g, &ctx, &outside, &Vector3::new(0.0, 0.0, 1.0), &eps, &q)
            .unwrap();
        assert!(r.value.norm() <= 1e-3, "field is continuous off the crack: {}", r.value);
    }

    #[test]
    fn a_noisy_table_is_flagged_as_non_convergent() {
        let mesh = flat_crack(4);
        let g = bump(&mesh);
        let ctx = WaveContext::from_wavenumber(1.3);
        // order-1 rule with no meaningful subdivision: the small-ε samples are
        // dominated by quadrature error, so the table cannot settle
        let q = QuadratureConfig::new(1, 1.0, 1).unwrap();
        let eps = [0.2, 0.1, 0.05, 0.025, 0.0125];
        let (center, _) = cell_center(&mesh, &g, 16);
        let r = jump_probe(&mesh, &g, &ctx, &center, &Vector3::new(0.0, 0.0, 1.0), &eps, &q)
            .unwrap();
        assert!(r.value.norm().is_finite(), "value is still reported");
        assert!(!r.converged, "crude quadrature must trip the diagnostic flag");
    }

    #[test]
    fn offsets_must_decrease() {
        let mesh = flat_crack(3);
        let g = bump(&mesh);
        let ctx = WaveContext::from_wavenumber(1.3);
        let q = QuadratureConfig::default();
        let center = Vector3::new(0.0, 0.0, -2.0);
        let up = Vector3::new(0.0, 0.0, 1.0);
        let bad = jump_probe(&mesh, &g, &ctx, &center, &up, &[0.1, 0.2], &q);
        assert!(matches!(bad, Err(PotentialError::Config(_))));
        let short = jump_probe(&mesh, &g, &ctx, &center, &up, &[0.1], &q);
        assert!(matches!(short, Err(PotentialError::Config(_))));
    }

    #[test]
    fn normal_derivative_is_continuous_across_the_crack() {
        let mesh = flat_crack(8);
        let g = bump(&mesh);
        let ctx = WaveContext::from_wavenumber(1.3);
        let q = QuadratureConfig::new(6, 2.0, 8).unwrap();
        let eps = [0.2, 0.1, 0.05, 0.025];
        let up = Vector3::new(0.0, 0.0, 1.0);
        let (center, _) = cell_center(&mesh, &g, 72);
        let r = normal_jump_probe(&mesh, &g, &ctx, &center, &up, &eps, &q).unwrap();
        // local gradient scale from a point one offset below the crack
        let probe = [center - up * 0.2];
        let out = eval_double_layer_grad_3d(&mesh, &g, &ctx, &probe, &q).unwrap();
        let gr = out.gradient3(0);
        let scale = (gr[0].norm_sqr() + gr[1].norm_sqr() + gr[2].norm_sqr()).sqrt();
        assert!(
            r.value.norm() <= 1e-2 * scale,
            "normal-derivative jump {} vs gradient scale {scale}",
            r.value
        );
    }

    #[test]
    fn residual_of_the_crack_field_decays_at_second_order() {
        let mesh = flat_crack(6);
        let g = bump(&mesh);
        let ctx = WaveContext::from_wavenumber(1.3);
        let q = QuadratureConfig::new(6, 2.0, 8).unwrap();
        let field = |p: &Vector3<f64>| {
            Ok(eval_double_layer_3d(&mesh, &g, &ctx, std::slice::from_ref(p), &q)?.value(0))
        };
        for pt in [Vector3::new(0.3, -0.2, -1.0), Vector3::new(-0.4, 0.1, -0.9)] {
            let coarse = helmholtz_residual_3d(&field, &ctx, &pt, 0.2).unwrap();
            let fine = helmholtz_residual_3d(&field, &ctx, &pt, 0.1).unwrap();
            let ratio = coarse.norm() / fine.norm();
            assert!(
                (3.2..=4.8).contains(&ratio),
                "order-2 stencil law violated at {pt:?}: ratio {ratio}"
            );
        }
    }

    #[test]
    fn residual_of_a_free_space_source_is_small() {
        let ctx = WaveContext::from_wavenumber(1.3);
        // source above the free surface: exact Helmholtz solution below it
        let src = Vector3::new(0.1, -0.3, 0.5);
        let field = |p: &Vector3<f64>| Ok(phi_free(&ctx, p, &src));
        let pt = Vector3::new(0.0, 0.0, -1.0);
        let u0 = field(&pt).unwrap();
        let r = helmholtz_residual_3d(&field, &ctx, &pt, 0.02).unwrap();
        assert!(r.norm() <= 5e-3 * u0.norm(), "residual {} vs |u| {}", r.norm(), u0.norm());

        let src2 = Vector2::new(0.4, 0.6);
        let field2 = |p: &Vector2<f64>| {
            let r = (p - src2).norm();
            Ok(Complex64::new(0.0, 0.25) * hankel0(ctx.k() * r))
        };
        let pt2 = Vector2::new(-0.2, -0.9);
        let u2 = field2(&pt2).unwrap();
        let r2 = helmholtz_residual_2d(&field2, &ctx, &pt2, 0.02).unwrap();
        assert!(r2.norm() <= 5e-3 * u2.norm());
    }

    #[test]
    fn the_stencil_guard_rejects_domain_collisions() {
        let ctx = WaveContext::from_wavenumber(1.3);
        let field = |_: &Vector3<f64>| Ok(Complex64::new(0.0, 0.0));
        // leg would poke above the free surface
        let near_top = helmholtz_residual_3d(&field, &ctx, &Vector3::new(0.0, 0.0, -0.05), 0.1);
        assert!(matches!(near_top, Err(PotentialError::Stencil { .. })));
        let field2 = |_: &Vector2<f64>| Ok(Complex64::new(0.0, 0.0));
        let near_line = helmholtz_residual_2d(&field2, &ctx, &Vector2::new(0.1, -0.01), 0.02);
        assert!(matches!(near_line, Err(PotentialError::Stencil { .. })));

        // leg lands exactly on the crack: the evaluator's surface guard fires
        let mesh = flat_crack(4);
        let g = bump(&mesh);
        let q = QuadratureConfig::default();
        let crack_field = |p: &Vector3<f64>| {
            Ok(eval_double_layer_3d(&mesh, &g, &ctx, std::slice::from_ref(p), &q)?.value(0))
        };
        let collide = helmholtz_residual_3d(&crack_field, &ctx, &Vector3::new(0.0, 0.0, -1.9), 0.1);
        assert!(collide.is_err(), "stencil leg on the crack must be rejected");
    }
}
