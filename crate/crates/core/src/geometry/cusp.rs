//! The flattened planar domain with two outward cusps,
//! `Ω_a = {(x1, x2) : |x1| < 1, |x2| < a·f(x1)}` with
//! `f(t) = (t - 1)²(t + 1)² = (t² - 1)²`, together with mapped structured
//! meshers for it and for the reference domains used by the eigen oracles
//! (unit square, half-disk).
//!
//! Meshes are built by mapping a structured grid through
//! `(x1, s) ↦ (x1, s·a·f(x1))`, so boundary nodes land exactly on the
//! boundary curves and the columns at `x1 = ±1` collapse onto the cusp tips.
//! The `x1` grid is geometrically graded toward the tips (ratio 0.7).

use super::{BoundaryTag, Curve2D, GeometryError, Mesh2D};
use nalgebra::Vector2;

/// Geometric grading ratio of the tip-ward `x1` cells.
pub const GRADING_RATIO: f64 = 0.7;

/// Flattening profile `f(t) = (t² - 1)²`; nonnegative on `[-1, 1]`,
/// quadratic cusp contact `f ≈ 4(t ∓ 1)²` at `t = ±1`.
pub fn cusp_profile(t: f64) -> f64 {
    let w = t * t - 1.0;
    w * w
}

/// Derivative `f'(t) = 4t(t² - 1)`.
pub fn cusp_profile_deriv(t: f64) -> f64 {
    4.0 * t * (t * t - 1.0)
}

/// Flattened cusp domain: flattening `a`, vertical shift applied to buried
/// boundary curves (the eigen domain itself is unshifted).
#[derive(Debug, Clone, Copy)]
pub struct CuspDomainSpec {
    a: f64,
    shift: f64,
}

impl CuspDomainSpec {
    /// # Errors
    /// The flattening must satisfy `0 < a ≤ 1`.
    pub fn new(a: f64, shift: f64) -> Result<Self, GeometryError> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(GeometryError::Invalid(format!("flattening a = {a} outside (0, 1]")));
        }
        Ok(CuspDomainSpec { a, shift })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Upper boundary height `a·f(x1)` at abscissa `x1`.
    pub fn height(&self, x1: f64) -> f64 {
        self.a * cusp_profile(x1)
    }
}

/// Symmetric `x1` grid on `[-1, 1]`: uniform cells of size ≈ `h` in the
/// middle, geometrically graded (ratio 0.7) toward both tips over `grading`
/// levels, endpoints included exactly.
fn graded_axis(h: f64, grading: usize) -> Result<Vec<f64>, GeometryError> {
    if !(h > 0.0 && h < 1.0) {
        return Err(GeometryError::Resolution(format!("cell size h = {h} outside (0, 1)")));
    }
    let mut tipward: Vec<f64> = (1..=grading).map(|i| h * GRADING_RATIO.powi(i as i32)).collect();
    tipward.reverse(); // smallest cell first, adjacent to the tip
    let graded_len: f64 = tipward.iter().sum();
    let middle = 2.0 - 2.0 * graded_len;
    if middle <= h {
        return Err(GeometryError::Resolution(format!(
            "grading ({grading} levels at h = {h}) leaves no uniform region"
        )));
    }
    let m = (middle / h).round().max(1.0) as usize;
    let hm = middle / m as f64;
    let mut xs = vec![-1.0];
    let mut x = -1.0;
    for &c in &tipward {
        x += c;
        xs.push(x);
    }
    for _ in 0..m {
        x += hm;
        xs.push(x);
    }
    for &c in tipward.iter().rev() {
        x += c;
        xs.push(x);
    }
    // force the exact endpoint (accumulated roundoff is ~1e-16)
    *xs.last_mut().unwrap() = 1.0;
    Ok(xs)
}

/// Graded triangulation of the half cusp domain
/// `{|x1| < 1, 0 < x2 < a·f(x1)}`. The bottom edge lies on the symmetry line
/// `x2 = 0`; it is tagged [`BoundaryTag::SymmetryLine`] when `odd` is set
/// (odd eigenfunctions, homogeneous Dirichlet) and free otherwise. Columns at
/// `x1 = ±1` collapse onto the cusp tips, giving triangle fans there, so
/// boundary nodes lie exactly on the boundary curves.
///
/// `h` controls both the uniform `x1` spacing and the number of layers
/// through the thickness (`max(4, round(a/h))`); `grading` is the number of
/// geometrically shrinking cell levels at each tip.
pub fn make_cusp_mesh(
    spec: &CuspDomainSpec,
    h: f64,
    grading: usize,
    odd: bool,
) -> Result<Mesh2D, GeometryError> {
    let xs = graded_axis(h, grading)?;
    let layers = ((spec.a() / h).round() as usize).max(4);
    let nx = xs.len();

    // node ids: tips are single nodes, interior columns carry layers+1 nodes
    let mut nodes: Vec<Vector2<f64>> = Vec::new();
    let mut column_base: Vec<Option<usize>> = Vec::with_capacity(nx); // None → tip
    let mut tip_left = 0usize;
    let mut tip_right = 0usize;
    for (i, &x) in xs.iter().enumerate() {
        if i == 0 || i == nx - 1 {
            nodes.push(Vector2::new(x, 0.0));
            if i == 0 {
                tip_left = nodes.len() - 1;
            } else {
                tip_right = nodes.len() - 1;
            }
            column_base.push(None);
        } else {
            let base = nodes.len();
            let height = spec.height(x);
            debug_assert!(height > 0.0);
            for j in 0..=layers {
                nodes.push(Vector2::new(x, height * j as f64 / layers as f64));
            }
            column_base.push(Some(base));
        }
    }

    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut push_ccw = |a: usize, b: usize, c: usize, nodes: &[Vector2<f64>]| {
        let u = nodes[b] - nodes[a];
        let v = nodes[c] - nodes[a];
        if u.x * v.y - u.y * v.x > 0.0 {
            triangles.push([a, b, c]);
        } else {
            triangles.push([a, c, b]);
        }
    };
    for i in 0..nx - 1 {
        match (column_base[i], column_base[i + 1]) {
            (None, Some(b)) => {
                for j in 0..layers {
                    push_ccw(tip_left, b + j, b + j + 1, &nodes);
                }
            }
            (Some(b), None) => {
                for j in 0..layers {
                    push_ccw(tip_right, b + j + 1, b + j, &nodes);
                }
            }
            (Some(b0), Some(b1)) => {
                for j in 0..layers {
                    push_ccw(b0 + j, b1 + j, b1 + j + 1, &nodes);
                    push_ccw(b0 + j, b1 + j + 1, b0 + j + 1, &nodes);
                }
            }
            (None, None) => {
                return Err(GeometryError::Resolution(
                    "grid has adjacent collapsed columns".into(),
                ));
            }
        }
    }

    // boundary edges: bottom chain (x2 = 0) and top chain (x2 = a f)
    let bottom_tag = if odd { BoundaryTag::SymmetryLine } else { BoundaryTag::Free };
    let mut boundary = Vec::new();
    let mut bottom_prev = tip_left;
    let mut top_prev = tip_left;
    for i in 1..nx {
        let (bot, top) = match column_base[i] {
            Some(b) => (b, b + layers),
            None => (tip_right, tip_right),
        };
        boundary.push(([bottom_prev, bot], bottom_tag));
        boundary.push(([top_prev, top], BoundaryTag::Free));
        bottom_prev = bot;
        top_prev = top;
    }
    Mesh2D::new(nodes, triangles, boundary, false)
}

/// Boundary curve of the buried cusp crack: the polyline
/// `x2 = sign·a·f(x1) + shift` sampled on the same graded `x1` grid the
/// mesher uses, so eigen-mesh top-boundary nodes and curve points coincide.
/// `upper` selects the `+` branch.
pub fn cusp_boundary_curve(
    spec: &CuspDomainSpec,
    h: f64,
    grading: usize,
    upper: bool,
) -> Result<Curve2D, GeometryError> {
    let xs = graded_axis(h, grading)?;
    let sign = if upper { 1.0 } else { -1.0 };
    let pts = xs
        .iter()
        .map(|&x| Vector2::new(x, sign * spec.height(x) + spec.shift()))
        .collect();
    let max_top = spec.shift() + spec.a();
    if max_top >= 0.0 {
        return Err(GeometryError::Invalid(format!(
            "curve reaches x2 = {max_top}, above the free surface"
        )));
    }
    Curve2D::new(pts, -max_top)
}

/// Graded triangulation of the axisymmetric half profile
/// `{0 ≤ r ≤ 1, 0 < x3 < a·f(r)}` in `(r, x3)` coordinates with the radial
/// weight enabled. The bottom edge `x3 = 0` is the symmetry line (odd modes,
/// homogeneous Dirichlet); the axis `r = 0` and the top curve are free. The
/// column at `r = 1` collapses onto the cusp tip; the radial grid is uniform
/// (≈ `h`) from the axis and geometrically graded into the tip over
/// `grading` levels.
pub fn make_axisym_profile_mesh(
    spec: &CuspDomainSpec,
    h: f64,
    grading: usize,
) -> Result<Mesh2D, GeometryError> {
    if !(h > 0.0 && h < 1.0) {
        return Err(GeometryError::Resolution(format!("cell size h = {h} outside (0, 1)")));
    }
    let tipward: Vec<f64> = (1..=grading).map(|i| h * GRADING_RATIO.powi(i as i32)).collect();
    let graded_len: f64 = tipward.iter().sum();
    let middle = 1.0 - graded_len;
    if middle <= h {
        return Err(GeometryError::Resolution(format!(
            "grading ({grading} levels at h = {h}) leaves no uniform region"
        )));
    }
    let m = (middle / h).round().max(1.0) as usize;
    let hm = middle / m as f64;
    let mut rs = vec![0.0];
    let mut r = 0.0;
    for _ in 0..m {
        r += hm;
        rs.push(r);
    }
    for &c in &tipward {
        r += c;
        rs.push(r);
    }
    *rs.last_mut().unwrap() = 1.0;

    let layers = ((spec.a() / h).round() as usize).max(4);
    let nr = rs.len();
    let mut nodes: Vec<Vector2<f64>> = Vec::new();
    let mut column_base: Vec<Option<usize>> = Vec::with_capacity(nr);
    let mut tip = 0usize;
    for (i, &r) in rs.iter().enumerate() {
        if i == nr - 1 {
            nodes.push(Vector2::new(r, 0.0));
            tip = nodes.len() - 1;
            column_base.push(None);
        } else {
            let base = nodes.len();
            let height = spec.height(r);
            debug_assert!(height > 0.0);
            for j in 0..=layers {
                nodes.push(Vector2::new(r, height * j as f64 / layers as f64));
            }
            column_base.push(Some(base));
        }
    }

    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut push_ccw = |a: usize, b: usize, c: usize, nodes: &[Vector2<f64>]| {
        let u = nodes[b] - nodes[a];
        let v = nodes[c] - nodes[a];
        if u.x * v.y - u.y * v.x > 0.0 {
            triangles.push([a, b, c]);
        } else {
            triangles.push([a, c, b]);
        }
    };
    for i in 0..nr - 1 {
        match (column_base[i], column_base[i + 1]) {
            (Some(b), None) => {
                for j in 0..layers {
                    push_ccw(tip, b + j + 1, b + j, &nodes);
                }
            }
            (Some(b0), Some(b1)) => {
                for j in 0..layers {
                    push_ccw(b0 + j, b1 + j, b1 + j + 1, &nodes);
                    push_ccw(b0 + j, b1 + j + 1, b0 + j + 1, &nodes);
                }
            }
            _ => {
                return Err(GeometryError::Resolution(
                    "grid has adjacent collapsed columns".into(),
                ));
            }
        }
    }

    let axis_base = column_base[0].expect("axis column never collapses");
    let mut boundary = Vec::new();
    for j in 0..layers {
        boundary.push(([axis_base + j, axis_base + j + 1], BoundaryTag::Free));
    }
    let mut bottom_prev = axis_base;
    let mut top_prev = axis_base + layers;
    for i in 1..nr {
        let (bot, top) = match column_base[i] {
            Some(b) => (b, b + layers),
            None => (tip, tip),
        };
        boundary.push(([bottom_prev, bot], BoundaryTag::SymmetryLine));
        boundary.push(([top_prev, top], BoundaryTag::Free));
        bottom_prev = bot;
        top_prev = top;
    }
    Mesh2D::new(nodes, triangles, boundary, true)
}

/// Structured unit-square mesh with `n × n` cells. `dirichlet_left` tags the
/// side `x1 = 0` as a symmetry line (for the mixed eigen oracle); all other
/// sides stay free.
pub fn unit_square(n: usize, dirichlet_left: bool) -> Result<Mesh2D, GeometryError> {
    if n == 0 {
        return Err(GeometryError::Resolution("unit square needs n ≥ 1".into()));
    }
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for i in 0..=n {
        for j in 0..=n {
            nodes.push(Vector2::new(i as f64 / n as f64, j as f64 / n as f64));
        }
    }
    let idx = |i: usize, j: usize| i * (n + 1) + j;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let mut boundary = Vec::with_capacity(4 * n);
    for j in 0..n {
        let tag = if dirichlet_left { BoundaryTag::SymmetryLine } else { BoundaryTag::Free };
        boundary.push(([idx(0, j), idx(0, j + 1)], tag));
        boundary.push(([idx(n, j), idx(n, j + 1)], BoundaryTag::Free));
    }
    for i in 0..n {
        boundary.push(([idx(i, 0), idx(i + 1, 0)], BoundaryTag::Free));
        boundary.push(([idx(i, n), idx(i + 1, n)], BoundaryTag::Free));
    }
    Mesh2D::new(nodes, triangles, boundary, false)
}

/// Axisymmetric half-disk profile `{(r, x3) : r² + x3² < 1, r, x3 > 0}`
/// meshed in polar rings (`n` radial divisions), radial weight enabled.
/// The bottom edge `x3 = 0` is the symmetry line; the arc and the axis are
/// free.
pub fn half_disk(n: usize) -> Result<Mesh2D, GeometryError> {
    if n < 2 {
        return Err(GeometryError::Resolution("half-disk needs n ≥ 2".into()));
    }
    let n_phi = 2 * n; // angular divisions over [0, π/2]
    let mut nodes = vec![Vector2::new(0.0, 0.0)];
    for i in 1..=n {
        let rho = i as f64 / n as f64;
        for j in 0..=n_phi {
            let phi = std::f64::consts::FRAC_PI_2 * j as f64 / n_phi as f64;
            nodes.push(Vector2::new(rho * phi.cos(), rho * phi.sin()));
        }
    }
    let ring = |i: usize, j: usize| 1 + (i - 1) * (n_phi + 1) + j; // i ≥ 1
    let mut triangles = Vec::new();
    for j in 0..n_phi {
        triangles.push([0, ring(1, j), ring(1, j + 1)]);
    }
    for i in 1..n {
        for j in 0..n_phi {
            triangles.push([ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)]);
            triangles.push([ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)]);
        }
    }
    let mut boundary = Vec::new();
    // symmetry line x3 = 0: center → (1, 0) along φ = 0 nodes
    boundary.push(([0, ring(1, 0)], BoundaryTag::SymmetryLine));
    for i in 1..n {
        boundary.push(([ring(i, 0), ring(i + 1, 0)], BoundaryTag::SymmetryLine));
    }
    // axis r = 0: φ = π/2 column
    boundary.push(([0, ring(1, n_phi)], BoundaryTag::Free));
    for i in 1..n {
        boundary.push(([ring(i, n_phi), ring(i + 1, n_phi)], BoundaryTag::Free));
    }
    // outer arc ρ = 1
    for j in 0..n_phi {
        boundary.push(([ring(n, j), ring(n, j + 1)], BoundaryTag::Free));
    }
    Mesh2D::new(nodes, triangles, boundary, true)
}
