//! Measures how well a two-crack instance hides: the relative sup gap of the
//! two forward fields (values and tangential gradients) on a grid in the free
//! surface, plus two structural residuals — the difference field must
//! reproduce the enclosed eigenfunction at interior probe points and vanish
//! at exterior ones.

use super::{CounterexampleError, CounterexampleInstance, CrackPair, ReferenceField};
use crate::geometry::{CrackMesh, Curve2D};
use crate::potential::{
    eval_double_layer_2d, eval_double_layer_3d, eval_double_layer_grad_2d,
    eval_double_layer_grad_3d, FieldSamples, QuadratureConfig,
};
use crate::special::psi_ball;
use nalgebra::{Vector2, Vector3};
use serde::Serialize;

/// Field suprema below this are treated as numerically zero.
const DEGENERATE_SUP: f64 = 1e-12;

/// Probe directions per spherical shell.
const SHELL_POINTS: usize = 25;

/// Sampling grid on the free surface: `n × n` points (3-D) or `n` points
/// (2-D) covering `[-extent, extent]` in each horizontal coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneGrid {
    pub n: usize,
    pub extent: f64,
}

impl Default for PlaneGrid {
    fn default() -> Self {
        PlaneGrid { n: 41, extent: 4.0 }
    }
}

impl PlaneGrid {
    fn coords(&self) -> Vec<f64> {
        let step = 2.0 * self.extent / (self.n - 1) as f64;
        (0..self.n).map(|i| -self.extent + step * i as f64).collect()
    }
}

/// Measured indistinguishability of a two-crack instance.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    /// Construction name (`sphere`, `cusp2d`, `axisym`).
    pub instance: String,
    /// Relative sup gap of the two fields over the measurement grid.
    pub rel_gap_u: f64,
    /// Relative sup gap of the tangential field gradients over the grid.
    pub rel_gap_grad: f64,
    /// Relative sup error of the difference field against the enclosed
    /// eigenfunction at interior probe points.
    pub interior_residual: f64,
    /// Relative sup magnitude of the difference field at exterior probes.
    pub exterior_residual: f64,
    /// Resolution index of the instance the report was measured on.
    pub refinement: usize,
}

/// Writes a [`GapReport`] as pretty-printed JSON.
pub fn write_gap_report_json(
    report: &GapReport,
    out: &mut dyn std::io::Write,
) -> Result<(), CounterexampleError> {
    serde_json::to_writer_pretty(&mut *out, report)?;
    writeln!(out)?;
    Ok(())
}

/// Horizontal footprint of the crack pieces: the larger axis span of their
/// common bounding box, ignoring depth.
fn horizontal_span(pieces: &CrackPair) -> f64 {
    match pieces {
        CrackPair::Surfaces { crack1, crack2 } => {
            let mut lo = Vector2::repeat(f64::INFINITY);
            let mut hi = Vector2::repeat(f64::NEG_INFINITY);
            for v in crack1.vertices().iter().chain(crack2.vertices()) {
                lo = lo.inf(&Vector2::new(v.x, v.y));
                hi = hi.sup(&Vector2::new(v.x, v.y));
            }
            (hi.x - lo.x).max(hi.y - lo.y)
        }
        CrackPair::Curves { crack1, crack2 } => {
            let xs = crack1.points().iter().chain(crack2.points()).map(|p| p.x);
            let lo = xs.clone().fold(f64::INFINITY, f64::min);
            let hi = xs.fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        }
    }
}

/// Interior/exterior probe points with the exact interior field values.
struct ProbePlan3 {
    interior: Vec<Vector3<f64>>,
    v_exact: Vec<f64>,
    exterior: Vec<Vector3<f64>>,
    sign: f64,
}

struct ProbePlan2 {
    interior: Vec<Vector2<f64>>,
    v_exact: Vec<f64>,
    exterior: Vec<Vector2<f64>>,
    sign: f64,
}

/// Near-uniform unit directions (golden-angle spiral).
fn golden_directions(m: usize) -> Vec<Vector3<f64>> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..m)
        .map(|j| {
            let z = 1.0 - 2.0 * (j as f64 + 0.5) / m as f64;
            let rho = (1.0 - z * z).sqrt();
            let th = golden_angle * j as f64;
            Vector3::new(rho * th.cos(), rho * th.sin(), z)
        })
        .collect()
}

fn ball_plan(center: &Vector3<f64>, radius: f64, k1: f64, sign: f64) -> ProbePlan3 {
    let dirs = golden_directions(SHELL_POINTS);
    let mut interior = Vec::new();
    for frac in [0.35, 0.65] {
        for d in &dirs {
            interior.push(center + d * (frac * radius));
        }
    }
    let v_exact = interior.iter().map(|p| psi_ball(&((p - center) / radius), k1)).collect();
    let exterior = dirs.iter().map(|d| center + d * (1.5 * radius)).collect();
    ProbePlan3 { interior, v_exact, exterior, sign }
}

fn planar_plan(
    pair: &crate::eigen::EigenPair,
    spec: &crate::geometry::CuspDomainSpec,
    sign: f64,
) -> Result<ProbePlan2, CounterexampleError> {
    let mut interior = Vec::new();
    let mut v_exact = Vec::new();
    for x1 in [-0.75, -0.4, 0.0, 0.4, 0.75] {
        for frac in [-0.7, -0.35, 0.35, 0.7] {
            let local = frac * spec.height(x1);
            interior.push(Vector2::new(x1, spec.shift() + local));
            let value = pair.eval(&Vector2::new(x1, local.abs())).ok_or_else(|| {
                CounterexampleError::Invalid(format!(
                    "interior probe ({x1}, {local}) left the eigen mesh"
                ))
            })?;
            v_exact.push(local.signum() * value);
        }
    }
    let s = spec.shift();
    let exterior = vec![
        Vector2::new(-1.5, s),
        Vector2::new(1.5, s),
        Vector2::new(-0.8, -0.4),
        Vector2::new(0.8, -0.4),
        Vector2::new(0.0, s + 1.55),
        Vector2::new(0.0, s - 1.55),
        Vector2::new(-2.5, -1.0),
        Vector2::new(2.5, -1.0),
    ];
    Ok(ProbePlan2 { interior, v_exact, exterior, sign })
}

fn revolved_plan(
    pair: &crate::eigen::EigenPair,
    spec: &crate::geometry::CuspDomainSpec,
    sign: f64,
) -> Result<ProbePlan3, CounterexampleError> {
    let mut interior = Vec::new();
    let mut v_exact = Vec::new();
    for r in [0.0, 0.3, 0.6] {
        let thetas: &[f64] = if r == 0.0 { &[0.0] } else { &[0.0, 2.1, 4.2] };
        for &theta in thetas {
            for frac in [-0.6, 0.5] {
                let local = frac * spec.height(r);
                interior.push(Vector3::new(
                    r * theta.cos(),
                    r * theta.sin(),
                    spec.shift() + local,
                ));
                let value = pair.eval(&Vector2::new(r, local.abs())).ok_or_else(|| {
                    CounterexampleError::Invalid(format!(
                        "interior probe (r = {r}, {local}) left the eigen mesh"
                    ))
                })?;
                v_exact.push(local.signum() * value);
            }
        }
    }
    let s = spec.shift();
    let exterior = vec![
        Vector3::new(-1.5, 0.0, s),
        Vector3::new(1.5, 0.0, s),
        Vector3::new(0.0, -1.5, s),
        Vector3::new(0.0, 1.5, s),
        Vector3::new(0.0, 0.0, s + 1.55),
        Vector3::new(0.0, 0.0, s - 1.55),
        Vector3::new(1.2, 1.2, -1.0),
    ];
    Ok(ProbePlan3 { interior, v_exact, exterior, sign })
}

/// Sup gap of values and of tangential gradients between two sample sets,
/// both relative to the larger field's own supremum.
fn relative_gaps(
    s1: &FieldSamples,
    s2: &FieldSamples,
) -> Result<(f64, f64), CounterexampleError> {
    let sup_u = s1.max_abs().max(s2.max_abs());
    if sup_u < DEGENERATE_SUP {
        return Err(CounterexampleError::DegenerateNormalization { sup: sup_u });
    }
    let n = s1.values().len();
    let gap_u = (0..n).map(|i| (s1.value(i) - s2.value(i)).norm()).fold(0.0, f64::max);
    let tangential = |s: &FieldSamples, i: usize| {
        let g = s.gradient3(i);
        (g.x.norm_sqr() + g.y.norm_sqr()).sqrt()
    };
    let sup_t = (0..n)
        .map(|i| tangential(s1, i).max(tangential(s2, i)))
        .fold(0.0, f64::max);
    if sup_t < DEGENERATE_SUP {
        return Err(CounterexampleError::DegenerateNormalization { sup: sup_t });
    }
    let gap_t = (0..n)
        .map(|i| {
            let d = s1.gradient3(i) - s2.gradient3(i);
            (d.x.norm_sqr() + d.y.norm_sqr()).sqrt()
        })
        .fold(0.0, f64::max);
    Ok((gap_u / sup_u, gap_t / sup_t))
}

/// Sup residuals of the difference field: against `sign · v_exact` at the
/// interior probes and against zero at the exterior probes, both relative to
/// the eigenfunction's probe supremum.
fn probe_residuals(
    d_int: &[num_complex::Complex64],
    d_ext: &[num_complex::Complex64],
    v_exact: &[f64],
    sign: f64,
) -> (f64, f64) {
    let v_sup = v_exact.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let interior = d_int
        .iter()
        .zip(v_exact)
        .map(|(d, v)| (d - sign * v).norm())
        .fold(0.0, f64::max);
    let exterior = d_ext.iter().map(|d| d.norm()).fold(0.0, f64::max);
    (interior / v_sup, exterior / v_sup)
}

fn gap_surfaces(
    inst: &CounterexampleInstance,
    crack1: &CrackMesh,
    crack2: &CrackMesh,
    grid: &PlaneGrid,
    q: &QuadratureConfig,
) -> Result<GapReport, CounterexampleError> {
    let coords = grid.coords();
    let mut pts = Vec::with_capacity(grid.n * grid.n);
    for &y in &coords {
        for &x in &coords {
            pts.push(Vector3::new(x, y, 0.0));
        }
    }
    let s1 = eval_double_layer_grad_3d(crack1, inst.g1(), inst.ctx(), &pts, q)?;
    let s2 = eval_double_layer_grad_3d(crack2, inst.g2(), inst.ctx(), &pts, q)?;
    let (rel_gap_u, rel_gap_grad) = relative_gaps(&s1, &s2)?;

    let plan = match &inst.reference {
        ReferenceField::Ball { center, radius, k1, sign } => ball_plan(center, *radius, *k1, *sign),
        ReferenceField::Revolved { pair, spec, sign } => revolved_plan(pair, spec, *sign)?,
        ReferenceField::Planar { .. } => {
            return Err(CounterexampleError::Invalid(
                "surface pieces carry a planar reference field".into(),
            ))
        }
    };
    let diff_at = |probe: &[Vector3<f64>]| -> Result<Vec<_>, CounterexampleError> {
        let u1 = eval_double_layer_3d(crack1, inst.g1(), inst.ctx(), probe, q)?;
        let u2 = eval_double_layer_3d(crack2, inst.g2(), inst.ctx(), probe, q)?;
        Ok((0..probe.len()).map(|i| u1.value(i) - u2.value(i)).collect())
    };
    let d_int = diff_at(&plan.interior)?;
    let d_ext = diff_at(&plan.exterior)?;
    let (interior_residual, exterior_residual) =
        probe_residuals(&d_int, &d_ext, &plan.v_exact, plan.sign);

    Ok(GapReport {
        instance: inst.tag().as_str().to_string(),
        rel_gap_u,
        rel_gap_grad,
        interior_residual,
        exterior_residual,
        refinement: inst.refinement(),
    })
}

fn gap_curves(
    inst: &CounterexampleInstance,
    crack1: &Curve2D,
    crack2: &Curve2D,
    grid: &PlaneGrid,
    q: &QuadratureConfig,
) -> Result<GapReport, CounterexampleError> {
    let pts: Vec<Vector2<f64>> = grid.coords().iter().map(|&x| Vector2::new(x, 0.0)).collect();
    let s1 = eval_double_layer_grad_2d(crack1, inst.g1(), inst.ctx(), &pts, q)?;
    let s2 = eval_double_layer_grad_2d(crack2, inst.g2(), inst.ctx(), &pts, q)?;
    let (rel_gap_u, rel_gap_grad) = relative_gaps(&s1, &s2)?;

    let plan = match &inst.reference {
        ReferenceField::Planar { pair, spec, sign } => planar_plan(pair, spec, *sign)?,
        _ => {
            return Err(CounterexampleError::Invalid(
                "curve pieces carry a non-planar reference field".into(),
            ))
        }
    };
    let diff_at = |probe: &[Vector2<f64>]| -> Result<Vec<_>, CounterexampleError> {
        let u1 = eval_double_layer_2d(crack1, inst.g1(), inst.ctx(), probe, q)?;
        let u2 = eval_double_layer_2d(crack2, inst.g2(), inst.ctx(), probe, q)?;
        Ok((0..probe.len()).map(|i| u1.value(i) - u2.value(i)).collect())
    };
    let d_int = diff_at(&plan.interior)?;
    let d_ext = diff_at(&plan.exterior)?;
    let (interior_residual, exterior_residual) =
        probe_residuals(&d_int, &d_ext, &plan.v_exact, plan.sign);

    Ok(GapReport {
        instance: inst.tag().as_str().to_string(),
        rel_gap_u,
        rel_gap_grad,
        interior_residual,
        exterior_residual,
        refinement: inst.refinement(),
    })
}

/// Measures the Cauchy gap of an instance on the free surface.
///
/// # Errors
/// The grid needs at least 2 points per axis, and its width `2·extent` must
/// cover four horizontal crack spans, so the measurement sees the far field
/// and not only the region right above the cracks. A field supremum below
/// `1e-12` flags the degenerate normalization instead of reporting a
/// meaningless quotient.
pub fn cauchy_gap(
    inst: &CounterexampleInstance,
    grid: &PlaneGrid,
    q: &QuadratureConfig,
) -> Result<GapReport, CounterexampleError> {
    if grid.n < 2 {
        return Err(CounterexampleError::Invalid(format!(
            "grid needs at least 2 points per axis, got {}",
            grid.n
        )));
    }
    if !(grid.extent.is_finite() && grid.extent > 0.0) {
        return Err(CounterexampleError::Invalid(format!(
            "grid extent {} must be positive",
            grid.extent
        )));
    }
    let span = horizontal_span(inst.pieces());
    if 2.0 * grid.extent < 4.0 * span - 1e-12 {
        return Err(CounterexampleError::Invalid(format!(
            "grid width {:.3} must cover four crack spans ({:.3})",
            2.0 * grid.extent,
            4.0 * span
        )));
    }
    match inst.pieces() {
        CrackPair::Surfaces { crack1, crack2 } => gap_surfaces(inst, crack1, crack2, grid, q),
        CrackPair::Curves { crack1, crack2 } => gap_curves(inst, crack1, crack2, grid, q),
    }
}
