//! P1 finite elements for the smallest odd Neumann eigenpair on cusped
//! planar domains, its axisymmetric radial-weight analog, and cusp decay
//! diagnostics.
//!
//! Odd symmetry in the vertical coordinate is imposed by solving on the half
//! domain with homogeneous Dirichlet rows on the symmetry line (odd `H¹`
//! functions have zero trace there); every other boundary is natural. The
//! axisymmetric variant carries the measure `r dr dx3` through both the
//! stiffness and mass forms. Element matrices are exact: the weight is linear
//! on each cell, so centroid values integrate it without error.

mod decay;
mod solve;

pub use decay::{decay_report, DecayReport};
pub use solve::smallest_eigenpair;

use crate::geometry::{
    make_axisym_profile_mesh, make_cusp_mesh, read_mesh2d_json, write_mesh2d_json, CuspDomainSpec,
    GeometryError, Mesh2D,
};
use nalgebra::Vector2;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use thiserror::Error;

/// Refinement ladder used by [`cusp_eigenpair`]: `{h, h/2, h/4}`.
const LADDER: [f64; 3] = [1.0, 0.5, 0.25];

/// Tip-grading levels for the cusp meshes.
const GRADING: usize = 12;

/// Eigen-solver failures.
#[derive(Debug, Error)]
pub enum EigenError {
    #[error("assembly: {0}")]
    Assembly(String),
    #[error("factorization: {0}")]
    Factorization(String),
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("eigenpair i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("eigenpair format: {0}")]
    Format(#[from] serde_json::Error),
}

/// Assembled P1 operators: raw stiffness and mass without boundary
/// conditions, plus the symmetry-line node set that the eigensolver
/// eliminates (homogeneous Dirichlet).
#[derive(Debug, Clone)]
pub struct Operators {
    stiffness: CscMatrix<f64>,
    mass: CscMatrix<f64>,
    dirichlet: Vec<usize>,
}

impl Operators {
    pub fn stiffness(&self) -> &CscMatrix<f64> {
        &self.stiffness
    }

    pub fn mass(&self) -> &CscMatrix<f64> {
        &self.mass
    }

    /// Node indices constrained to zero (the symmetry line).
    pub fn dirichlet(&self) -> &[usize] {
        &self.dirichlet
    }

    /// Total number of degrees of freedom before reduction.
    pub fn n(&self) -> usize {
        self.mass.nrows()
    }
}

/// Exact P1 element stiffness `∫ w ∇λi·∇λj`; `w ≡ 1` or the radius `r`
/// (linear, so its centroid value is exact).
fn element_stiffness(p: &[Vector2<f64>; 3], weighted: bool) -> [[f64; 3]; 3] {
    let b = [p[1].y - p[2].y, p[2].y - p[0].y, p[0].y - p[1].y];
    let c = [p[2].x - p[1].x, p[0].x - p[2].x, p[1].x - p[0].x];
    let area2 = (p[1] - p[0]).perp(&(p[2] - p[0])); // 2A, positive for ccw
    let w = if weighted { (p[0].x + p[1].x + p[2].x) / 3.0 } else { 1.0 };
    let scale = w / (2.0 * area2);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = scale * (b[i] * b[j] + c[i] * c[j]);
        }
    }
    k
}

/// Exact P1 element mass `∫ w λi λj` (`w ≡ 1` or `w = r`).
fn element_mass(p: &[Vector2<f64>; 3], weighted: bool) -> [[f64; 3]; 3] {
    let area = 0.5 * (p[1] - p[0]).perp(&(p[2] - p[0]));
    let mut m = [[0.0; 3]; 3];
    if weighted {
        let r = [p[0].x, p[1].x, p[2].x];
        let s = r[0] + r[1] + r[2];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = if i == j {
                    area * (2.0 * r[i] + s) / 30.0
                } else {
                    area * (r[i] + r[j] + s) / 60.0
                };
            }
        }
    } else {
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = if i == j { area / 6.0 } else { area / 12.0 };
            }
        }
    }
    m
}

/// Assembles the P1 stiffness and mass operators of a validated mesh.
///
/// The operators are raw (no boundary conditions); the mesh's symmetry-line
/// nodes are carried alongside for the solver to eliminate.
pub fn assemble(mesh: &Mesh2D) -> Result<Operators, EigenError> {
    let n = mesh.nodes().len();
    let mut kc = CooMatrix::new(n, n);
    let mut mc = CooMatrix::new(n, n);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.signed_area(t);
        if !(a > 0.0 && a.is_finite()) {
            return Err(EigenError::Assembly(format!("degenerate cell {t} (area {a:.3e})")));
        }
        let p = [mesh.nodes()[tri[0]], mesh.nodes()[tri[1]], mesh.nodes()[tri[2]]];
        let ke = element_stiffness(&p, mesh.weighted());
        let me = element_mass(&p, mesh.weighted());
        for i in 0..3 {
            for j in 0..3 {
                kc.push(tri[i], tri[j], ke[i][j]);
                mc.push(tri[i], tri[j], me[i][j]);
            }
        }
    }
    Ok(Operators {
        stiffness: CscMatrix::from(&kc),
        mass: CscMatrix::from(&mc),
        dirichlet: mesh.symmetry_nodes(),
    })
}

/// Smallest generalized eigenpair, mass-normalized, with its mesh context.
#[derive(Debug, Clone)]
pub struct EigenPair {
    mu2: f64,
    phi: Vec<f64>,
    mesh: Mesh2D,
    weighted: bool,
    err_estimate: Option<f64>,
}

impl EigenPair {
    /// Eigenvalue μ².
    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    /// Nodal eigenfunction values (zero on the symmetry line), normalized so
    /// that the (weighted) mass inner product `φᵀMφ = 1`.
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn mesh(&self) -> &Mesh2D {
        &self.mesh
    }

    /// Whether the pair was computed in the radial-weight measure.
    pub fn weighted(&self) -> bool {
        self.weighted
    }

    /// Mesh-refinement error estimate of μ², when a ladder produced one.
    pub fn err_estimate(&self) -> Option<f64> {
        self.err_estimate
    }

    /// Linear interpolation of φ at `p`; `None` outside the mesh.
    pub fn eval(&self, p: &Vector2<f64>) -> Option<f64> {
        let tol = -1e-12;
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let a2 = 2.0 * self.mesh.signed_area(t);
            let [i, j, k] = *tri;
            let (pi, pj, pk) = (self.mesh.nodes()[i], self.mesh.nodes()[j], self.mesh.nodes()[k]);
            let li = (pj - *p).perp(&(pk - *p)) / a2;
            let lj = (pk - *p).perp(&(pi - *p)) / a2;
            let lk = 1.0 - li - lj;
            if li >= tol && lj >= tol && lk >= tol {
                return Some(li * self.phi[i] + lj * self.phi[j] + lk * self.phi[k]);
            }
        }
        None
    }
}

/// Smallest odd eigenpair of the flattened cusp domain, solved on the half
/// domain with the symmetry-line Dirichlet condition at the refinement
/// ladder `{h, h/2, h/4}`; the finest pair is returned with
/// `err_estimate = |μ²(h/4) − μ²(h/2)|`.
pub fn cusp_eigenpair(spec: &CuspDomainSpec, h: f64) -> Result<EigenPair, EigenError> {
    let mut mu2s = Vec::new();
    let mut finest = None;
    for scale in LADDER {
        let mesh = make_cusp_mesh(spec, h * scale, GRADING, true)?;
        let ops = assemble(&mesh)?;
        let pair = smallest_eigenpair(&mesh, &ops, 1e-10)?;
        mu2s.push(pair.mu2);
        finest = Some(pair);
    }
    let mut pair = finest.expect("ladder is nonempty");
    pair.err_estimate = Some((mu2s[2] - mu2s[1]).abs());
    Ok(pair)
}

/// Smallest odd eigenpair of the axisymmetric cusped solid of revolution,
/// solved on the half profile `{0 ≤ r ≤ 1, 0 < x3 < a·f(r)}` in the radial
/// weight, at the same `{h, h/2, h/4}` ladder as [`cusp_eigenpair`].
pub fn axisym_eigenpair(spec: &CuspDomainSpec, h: f64) -> Result<EigenPair, EigenError> {
    let mut mu2s = Vec::new();
    let mut finest = None;
    for scale in LADDER {
        let mesh = make_axisym_profile_mesh(spec, h * scale, GRADING)?;
        let ops = assemble(&mesh)?;
        let pair = smallest_eigenpair(&mesh, &ops, 1e-10)?;
        mu2s.push(pair.mu2);
        finest = Some(pair);
    }
    let mut pair = finest.expect("ladder is nonempty");
    pair.err_estimate = Some((mu2s[2] - mu2s[1]).abs());
    Ok(pair)
}

/// Writes an eigenpair (with its mesh) as JSON.
pub fn write_eigenpair_json(
    pair: &EigenPair,
    out: &mut dyn std::io::Write,
) -> Result<(), EigenError> {
    let mut mesh_buf = Vec::new();
    write_mesh2d_json(&pair.mesh, &mut mesh_buf)?;
    let mesh_val: serde_json::Value = serde_json::from_slice(&mesh_buf)?;
    let val = serde_json::json!({
        "mu2": pair.mu2,
        "weight": if pair.weighted { "r" } else { "1" },
        "phi": pair.phi,
        "mesh": mesh_val,
        "err_estimate": pair.err_estimate,
    });
    serde_json::to_writer(out, &val)?;
    Ok(())
}

/// Reads an eigenpair back, revalidating the mesh and cross-checking the
/// weight flag and vector length.
pub fn read_eigenpair_json(input: &mut dyn std::io::Read) -> Result<EigenPair, EigenError> {
    let val: serde_json::Value = serde_json::from_reader(input)?;
    let mu2 = val["mu2"]
        .as_f64()
        .ok_or_else(|| EigenError::Invalid("missing or non-numeric mu2".into()))?;
    let weight = val["weight"]
        .as_str()
        .ok_or_else(|| EigenError::Invalid("missing weight tag".into()))?;
    let weighted = match weight {
        "r" => true,
        "1" => false,
        other => return Err(EigenError::Invalid(format!("unknown weight tag '{other}'"))),
    };
    let phi: Vec<f64> = serde_json::from_value(val["phi"].clone())?;
    let mesh_bytes = serde_json::to_vec(&val["mesh"])?;
    let mesh = read_mesh2d_json(&mut mesh_bytes.as_slice())?;
    if phi.len() != mesh.nodes().len() {
        return Err(EigenError::Invalid(format!(
            "{} nodal values for {} nodes",
            phi.len(),
            mesh.nodes().len()
        )));
    }
    if weighted != mesh.weighted() {
        return Err(EigenError::Invalid("weight tag contradicts the mesh flag".into()));
    }
    if !(mu2 > 0.0) {
        return Err(EigenError::Invalid(format!("eigenvalue {mu2} is not positive")));
    }
    let err_estimate = val["err_estimate"].as_f64();
    Ok(EigenPair { mu2, phi, mesh, weighted, err_estimate })
}
