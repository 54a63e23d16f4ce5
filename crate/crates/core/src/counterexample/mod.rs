//! Pairs of distinct buried cracks with identical jump data whose scattered
//! fields agree on the free surface: each instance splits a closed surface
//! (or curve) enclosing an interior Neumann eigenfunction into two crack
//! pieces carrying the eigenfunction's traces. The difference of the two
//! forward fields then reproduces the eigenfunction inside the enclosed
//! region and vanishes identically outside — so surface measurements cannot
//! tell the cracks apart.
//!
//! Three constructions are provided: split spheres carrying the closed-form
//! ball eigenfunction, flattened 2-D cusp domains carrying a finite-element
//! eigenfunction, and axisymmetric solids of revolution of the cusp profile.

mod gap;

pub use gap::{cauchy_gap, write_gap_report_json, GapReport, PlaneGrid};

use crate::eigen::{axisym_eigenpair, cusp_eigenpair, EigenError, EigenPair};
use crate::geometry::{
    make_hemisphere, make_revolution_surface, BoundaryTag, CrackMesh, Curve2D, CuspDomainSpec,
    GeometryError, Mesh2D,
};
use crate::potential::{DensityField, PotentialError};
use crate::special::{psi_ball, zeros_of_dj, WaveContext};
use nalgebra::{Vector2, Vector3};
use num_complex::Complex64;
use thiserror::Error;

/// Vertex-coincidence tolerance for the shared ring of the two pieces.
const RING_TOL: f64 = 1e-12;

/// Burial depth of every instance, in units of the enclosed body's size.
const DEPTH: f64 = 2.0;

/// Failures while building or evaluating a non-uniqueness instance.
#[derive(Debug, Error)]
pub enum CounterexampleError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("degenerate normalization: largest field sample {sup:.3e} is numerically zero")]
    DegenerateNormalization { sup: f64 },
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("gap report i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("gap report format: {0}")]
    Format(#[from] serde_json::Error),
}

/// Which construction an instance came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceTag {
    Sphere,
    Cusp2d,
    Axisym,
}

impl InstanceTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            InstanceTag::Sphere => "sphere",
            InstanceTag::Cusp2d => "cusp2d",
            InstanceTag::Axisym => "axisym",
        }
    }
}

/// The two crack pieces: surfaces in 3-D or curves in 2-D.
#[derive(Debug, Clone)]
pub enum CrackPair {
    Surfaces { crack1: CrackMesh, crack2: CrackMesh },
    Curves { crack1: Curve2D, crack2: Curve2D },
}

/// The exact (or discretely converged) eigenfield the difference of the two
/// forward solutions must reproduce inside the enclosed region. `sign` tracks
/// piece swaps, which negate the difference field.
#[derive(Debug, Clone)]
enum ReferenceField {
    Ball { center: Vector3<f64>, radius: f64, k1: f64, sign: f64 },
    Planar { pair: EigenPair, spec: CuspDomainSpec, sign: f64 },
    Revolved { pair: EigenPair, spec: CuspDomainSpec, sign: f64 },
}

/// A pair of distinct cracks with densities that produce identical Cauchy
/// data on the free surface.
#[derive(Debug, Clone)]
pub struct CounterexampleInstance {
    pieces: CrackPair,
    g1: DensityField,
    g2: DensityField,
    ctx: WaveContext,
    tag: InstanceTag,
    refinement: usize,
    reference: ReferenceField,
}

impl CounterexampleInstance {
    pub fn pieces(&self) -> &CrackPair {
        &self.pieces
    }

    /// The surface pair, when the instance is three-dimensional.
    pub fn surfaces(&self) -> Option<(&CrackMesh, &CrackMesh)> {
        match &self.pieces {
            CrackPair::Surfaces { crack1, crack2 } => Some((crack1, crack2)),
            CrackPair::Curves { .. } => None,
        }
    }

    /// The curve pair, when the instance is two-dimensional.
    pub fn curves(&self) -> Option<(&Curve2D, &Curve2D)> {
        match &self.pieces {
            CrackPair::Curves { crack1, crack2 } => Some((crack1, crack2)),
            CrackPair::Surfaces { .. } => None,
        }
    }

    pub fn g1(&self) -> &DensityField {
        &self.g1
    }

    pub fn g2(&self) -> &DensityField {
        &self.g2
    }

    pub fn ctx(&self) -> &WaveContext {
        &self.ctx
    }

    pub fn tag(&self) -> InstanceTag {
        self.tag
    }

    /// Resolution index recorded in gap reports (mesh refinement level or
    /// reciprocal cell size).
    pub fn refinement(&self) -> usize {
        self.refinement
    }

    /// Self-convergence error bar of the eigenvalue behind the densities
    /// (`None` for the closed-form sphere instance).
    pub fn eigen_error_bar(&self) -> Option<f64> {
        match &self.reference {
            ReferenceField::Ball { .. } => None,
            ReferenceField::Planar { pair, .. } | ReferenceField::Revolved { pair, .. } => {
                pair.err_estimate()
            }
        }
    }

    /// The same instance with the roles of the two pieces exchanged.
    pub fn swapped(&self) -> CounterexampleInstance {
        let pieces = match &self.pieces {
            CrackPair::Surfaces { crack1, crack2 } => CrackPair::Surfaces {
                crack1: crack2.clone(),
                crack2: crack1.clone(),
            },
            CrackPair::Curves { crack1, crack2 } => CrackPair::Curves {
                crack1: crack2.clone(),
                crack2: crack1.clone(),
            },
        };
        let mut reference = self.reference.clone();
        match &mut reference {
            ReferenceField::Ball { sign, .. }
            | ReferenceField::Planar { sign, .. }
            | ReferenceField::Revolved { sign, .. } => *sign = -*sign,
        }
        CounterexampleInstance {
            pieces,
            g1: self.g2.clone(),
            g2: self.g1.clone(),
            ctx: self.ctx,
            tag: self.tag,
            refinement: self.refinement,
            reference,
        }
    }

    /// Control experiment: the same instance with `g2` scaled by `factor`,
    /// breaking the eigenfunction-trace relation on purpose.
    pub fn with_scaled_g2(&self, factor: f64) -> Result<Self, CounterexampleError> {
        if !factor.is_finite() {
            return Err(CounterexampleError::Invalid(format!(
                "perturbation factor {factor} is not finite"
            )));
        }
        let mut out = self.clone();
        out.g2 = self.g2.scaled(Complex64::new(factor, 0.0));
        Ok(out)
    }
}

/// Checks that the two pieces share their boundary ring within [`RING_TOL`].
fn check_shared_ring(pieces: &CrackPair) -> Result<(), CounterexampleError> {
    let ring_gap = match pieces {
        CrackPair::Surfaces { crack1, crack2 } => {
            let ring1: Vec<Vector3<f64>> =
                crack1.boundary_vertices().iter().map(|&i| crack1.vertices()[i]).collect();
            let ring2: Vec<Vector3<f64>> =
                crack2.boundary_vertices().iter().map(|&i| crack2.vertices()[i]).collect();
            if ring1.len() != ring2.len() {
                return Err(CounterexampleError::Invalid(format!(
                    "boundary rings have {} and {} vertices",
                    ring1.len(),
                    ring2.len()
                )));
            }
            let hausdorff = |a: &[Vector3<f64>], b: &[Vector3<f64>]| -> f64 {
                a.iter()
                    .map(|p| b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max)
            };
            hausdorff(&ring1, &ring2).max(hausdorff(&ring2, &ring1))
        }
        CrackPair::Curves { crack1, crack2 } => {
            let ends = |c: &Curve2D| -> [Vector2<f64>; 2] {
                [c.points()[0], *c.points().last().unwrap()]
            };
            let (e1, e2) = (ends(crack1), ends(crack2));
            let d = |p: &Vector2<f64>, q: &Vector2<f64>| (p - q).norm();
            d(&e1[0], &e2[0]).min(d(&e1[0], &e2[1])).max(d(&e1[1], &e2[0]).min(d(&e1[1], &e2[1])))
        }
    };
    if ring_gap > RING_TOL {
        return Err(CounterexampleError::Invalid(format!(
            "crack pieces do not close: shared ring mismatch {ring_gap:.3e}"
        )));
    }
    Ok(())
}

/// Splits a buried sphere into two hemisphere cracks carrying the traces of
/// the interior Neumann eigenfunction of the ball.
///
/// With no `target_k` the instance is the reference one: unit radius, center
/// `(0, 0, -2)`, wavenumber `k₁` (first positive zero of `j₁'`). A given
/// `target_k` rescales the whole construction by `s = k₁/k`, burying a sphere
/// of radius `s` at `(0, 0, -2s)` — the same dimensionless instance at any
/// requested wavenumber.
pub fn build_sphere_instance(
    target_k: Option<f64>,
    n_refine: usize,
) -> Result<CounterexampleInstance, CounterexampleError> {
    let k1 = zeros_of_dj(1, 1)[0];
    let k = target_k.unwrap_or(k1);
    if !(k.is_finite() && k > 0.0) {
        return Err(CounterexampleError::Invalid(format!(
            "target wavenumber {k} must be positive"
        )));
    }
    let s = k1 / k;
    let center = Vector3::new(0.0, 0.0, -DEPTH * s);
    let crack1 = make_hemisphere(&center, s, true, n_refine)?;
    let crack2 = make_hemisphere(&center, s, false, n_refine)?;
    let trace = |v: &Vector3<f64>| psi_ball(&((v - center) / s), k1);
    let g1 = DensityField::from_fn_on_mesh(&crack1, trace)?;
    let g2 = DensityField::from_fn_on_mesh(&crack2, trace)?;
    let pieces = CrackPair::Surfaces { crack1, crack2 };
    check_shared_ring(&pieces)?;
    Ok(CounterexampleInstance {
        pieces,
        g1,
        g2,
        ctx: WaveContext::from_wavenumber(k),
        tag: InstanceTag::Sphere,
        refinement: n_refine,
        reference: ReferenceField::Ball { center, radius: s, k1, sign: 1.0 },
    })
}

/// Boundary nodes of the half cusp mesh that lie on the top curve, sorted by
/// abscissa (the two tips included).
fn top_chain(mesh: &Mesh2D) -> Vec<(usize, Vector2<f64>)> {
    let mut flag = vec![false; mesh.nodes().len()];
    for ([a, b], tag) in mesh.boundary_edges() {
        if *tag == BoundaryTag::Free {
            flag[*a] = true;
            flag[*b] = true;
        }
    }
    let mut out: Vec<(usize, Vector2<f64>)> = flag
        .iter()
        .enumerate()
        .filter_map(|(i, &f)| f.then(|| (i, mesh.nodes()[i])))
        .collect();
    out.sort_by(|p, q| p.1.x.total_cmp(&q.1.x));
    out
}

/// Splits the boundary of the buried flattened cusp domain
/// `{|x₁| < 1, |x₂ + 2| < a·f(x₁)}` into its upper and lower curves, carrying
/// the traces of the smallest odd Neumann eigenfunction; the instance's
/// wavenumber is the eigenvalue's square root.
///
/// The curves sample the boundary exactly at the eigenmesh's own boundary
/// nodes, so the densities are the finite-element trace (upper) and its odd
/// extension (lower) without interpolation error.
pub fn build_cusp2d_instance(
    a: f64,
    h: f64,
) -> Result<CounterexampleInstance, CounterexampleError> {
    let spec = CuspDomainSpec::new(a, -DEPTH)?;
    let pair = cusp_eigenpair(&spec, h)?;
    let chain = top_chain(pair.mesh());
    if chain.len() < 2 {
        return Err(CounterexampleError::Invalid("eigen mesh has no top chain".into()));
    }
    let upper_pts: Vec<Vector2<f64>> =
        chain.iter().map(|(_, p)| Vector2::new(p.x, p.y + spec.shift())).collect();
    let lower_pts: Vec<Vector2<f64>> =
        chain.iter().map(|(_, p)| Vector2::new(p.x, -p.y + spec.shift())).collect();
    let max_y = upper_pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let crack1 = Curve2D::new(upper_pts, -max_y)?;
    let crack2 = Curve2D::new(lower_pts, DEPTH)?;
    let upper_vals: Vec<Complex64> =
        chain.iter().map(|(i, _)| Complex64::new(pair.phi()[*i], 0.0)).collect();
    let lower_vals: Vec<Complex64> = upper_vals.iter().map(|v| -v).collect();
    let g1 = DensityField::on_curve(&crack1, upper_vals)?;
    let g2 = DensityField::on_curve(&crack2, lower_vals)?;
    let pieces = CrackPair::Curves { crack1, crack2 };
    check_shared_ring(&pieces)?;
    let k = pair.mu2().sqrt();
    Ok(CounterexampleInstance {
        pieces,
        g1,
        g2,
        ctx: WaveContext::from_wavenumber(k),
        tag: InstanceTag::Cusp2d,
        refinement: (1.0 / h).round() as usize,
        reference: ReferenceField::Planar { pair, spec, sign: 1.0 },
    })
}

/// Piecewise-linear boundary trace over radial stations, clamped at both
/// ends (the tip value is an exact zero, so clamping keeps the rim density
/// exactly zero against roundoff in recovered radii).
struct Trace {
    rs: Vec<f64>,
    vals: Vec<f64>,
}

impl Trace {
    fn eval(&self, r: f64) -> f64 {
        if r <= self.rs[0] {
            return self.vals[0];
        }
        if r >= *self.rs.last().unwrap() {
            return *self.vals.last().unwrap();
        }
        let j = self.rs.partition_point(|&x| x <= r) - 1;
        let t = (r - self.rs[j]) / (self.rs[j + 1] - self.rs[j]);
        self.vals[j] * (1.0 - t) + self.vals[j + 1] * t
    }
}

/// Top node of every radial station of the axisymmetric profile mesh,
/// sorted by radius.
fn upper_profile(mesh: &Mesh2D) -> Vec<(usize, Vector2<f64>)> {
    let mut best: std::collections::HashMap<u64, usize> = std::collections::HashMap::new();
    for (i, p) in mesh.nodes().iter().enumerate() {
        best.entry(p.x.to_bits())
            .and_modify(|b| {
                if mesh.nodes()[*b].y < p.y {
                    *b = i;
                }
            })
            .or_insert(i);
    }
    let mut out: Vec<(usize, Vector2<f64>)> =
        best.values().map(|&i| (i, mesh.nodes()[i])).collect();
    out.sort_by(|p, q| p.1.x.total_cmp(&q.1.x));
    out
}

/// Splits the boundary of the buried axisymmetric cusped solid
/// `{r < 1, |x₃ + 2| < f(r)}` into its upper and lower surfaces of
/// revolution, carrying θ-invariant traces of the smallest odd eigenfunction
/// of the radial-weight problem; the wavenumber is the eigenvalue's square
/// root.
pub fn build_axisym_instance(
    h: f64,
    n_theta: usize,
) -> Result<CounterexampleInstance, CounterexampleError> {
    let spec = CuspDomainSpec::new(1.0, -DEPTH)?;
    let pair = axisym_eigenpair(&spec, h)?;
    let profile = upper_profile(pair.mesh());
    let trace = Trace {
        rs: profile.iter().map(|(_, p)| p.x).collect(),
        vals: profile.iter().map(|(i, _)| pair.phi()[*i]).collect(),
    };
    let upper: Vec<Vector2<f64>> =
        profile.iter().map(|(_, p)| Vector2::new(p.x, p.y + spec.shift())).collect();
    let lower: Vec<Vector2<f64>> =
        profile.iter().map(|(_, p)| Vector2::new(p.x, -p.y + spec.shift())).collect();
    let axis = Vector2::new(0.0, 0.0);
    let crack1 = make_revolution_surface(&upper, n_theta, &axis)?;
    let crack2 = make_revolution_surface(&lower, n_theta, &axis)?;
    let radius_of = |v: &Vector3<f64>| (v.x * v.x + v.y * v.y).sqrt();
    let g1 = DensityField::from_fn_on_mesh(&crack1, |v| trace.eval(radius_of(v)))?;
    let g2 = DensityField::from_fn_on_mesh(&crack2, |v| -trace.eval(radius_of(v)))?;
    let pieces = CrackPair::Surfaces { crack1, crack2 };
    check_shared_ring(&pieces)?;
    let k = pair.mu2().sqrt();
    Ok(CounterexampleInstance {
        pieces,
        g1,
        g2,
        ctx: WaveContext::from_wavenumber(k),
        tag: InstanceTag::Axisym,
        refinement: (1.0 / h).round() as usize,
        reference: ReferenceField::Revolved { pair, spec, sign: 1.0 },
    })
}

/// Largest vertical inclination of a curve's segments: the maximum of
/// `|t·e₂|` over unit tangents `t`. Flat cracks score near zero.
pub fn curve_flatness(curve: &Curve2D) -> f64 {
    (0..curve.segment_count())
        .map(|i| {
            let (a, b) = curve.segment(i);
            let t = b - a;
            (t.y / t.norm()).abs()
        })
        .fold(0.0, f64::max)
}

/// Flatness of a 2-D instance: the larger [`curve_flatness`] of its pieces.
pub fn flatness_metric(inst: &CounterexampleInstance) -> Result<f64, CounterexampleError> {
    let (c1, c2) = inst
        .curves()
        .ok_or_else(|| CounterexampleError::Invalid("flatness is a curve metric".into()))?;
    Ok(curve_flatness(c1).max(curve_flatness(c2)))
}

/// Fraction of each piece (by area or length) whose cells carry a mean
/// density above 5% of the piece's global mean — the discrete form of
/// "the density has full support in the crack".
pub fn support_fractions(inst: &CounterexampleInstance) -> (f64, f64) {
    fn mesh_fraction(mesh: &CrackMesh, g: &DensityField) -> f64 {
        let cell_mean = |t: usize| -> f64 {
            let [a, b, c] = mesh.triangles()[t];
            (g.values()[a].norm() + g.values()[b].norm() + g.values()[c].norm()) / 3.0
        };
        let total_area = mesh.total_area();
        let global: f64 = (0..mesh.triangles().len())
            .map(|t| cell_mean(t) * mesh.area(t))
            .sum::<f64>()
            / total_area;
        let covered: f64 = (0..mesh.triangles().len())
            .filter(|&t| cell_mean(t) > 0.05 * global)
            .map(|t| mesh.area(t))
            .sum();
        covered / total_area
    }
    fn curve_fraction(curve: &Curve2D, g: &DensityField) -> f64 {
        let seg_mean =
            |s: usize| -> f64 { (g.values()[s].norm() + g.values()[s + 1].norm()) / 2.0 };
        let total = curve.total_len();
        let global: f64 = (0..curve.segment_count())
            .map(|s| seg_mean(s) * curve.segment_len(s))
            .sum::<f64>()
            / total;
        let covered: f64 = (0..curve.segment_count())
            .filter(|&s| seg_mean(s) > 0.05 * global)
            .map(|s| curve.segment_len(s))
            .sum();
        covered / total
    }
    match &inst.pieces {
        CrackPair::Surfaces { crack1, crack2 } => {
            (mesh_fraction(crack1, &inst.g1), mesh_fraction(crack2, &inst.g2))
        }
        CrackPair::Curves { crack1, crack2 } => {
            (curve_fraction(crack1, &inst.g1), curve_fraction(crack2, &inst.g2))
        }
    }
}
