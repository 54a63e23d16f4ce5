//! Crack geometry: triangulated open surfaces in the half-space, boundary
//! curves in 2-D, cusped planar domains and their graded meshes.
//!
//! Conventions shared across the crate:
//!
//! * Crack surfaces live strictly below the free surface: every vertex has
//!   `x3 ≤ -δ` for a declared standoff `δ > 0`.
//! * Open cracks are oriented "up": every triangle normal satisfies
//!   `n·e3 > 0`. Closed surfaces (used by Green-identity tests) are oriented
//!   outward instead.
//! * 2-D boundary curves are oriented with `n·e2 > 0`.

mod builders;
mod cusp;
mod io;

pub use builders::{make_hemisphere, make_planar_crack, make_revolution_surface, make_sphere};
pub use cusp::{
    cusp_boundary_curve, cusp_profile, cusp_profile_deriv, half_disk, make_axisym_profile_mesh,
    make_cusp_mesh, unit_square, CuspDomainSpec,
};
pub use io::{read_mesh2d_json, read_mesh_json, write_mesh2d_json, write_mesh_json};

use nalgebra::{Vector2, Vector3};
use thiserror::Error;

/// Default minimum standoff between a crack and the free surface.
pub const DEFAULT_STANDOFF: f64 = 0.5;

/// Geometry construction and validation failures.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("triangle {index} is degenerate (area {area:.3e})")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("triangle {index} violates the orientation rule ({detail})")]
    Orientation { index: usize, detail: String },
    #[error("vertex {index} at x3 = {z} violates the standoff {standoff}")]
    Standoff { index: usize, z: f64, standoff: f64 },
    #[error("edge ({a}, {b}) is shared by {count} triangles (non-manifold)")]
    NonManifold { a: usize, b: usize, count: usize },
    #[error("mesh flagged {expected} but boundary is {actual}")]
    Closedness { expected: &'static str, actual: &'static str },
    #[error("curve segments {i} and {j} intersect")]
    SelfIntersection { i: usize, j: usize },
    #[error("triangle {index} references vertex {vertex} out of bounds ({len} vertices)")]
    IndexOutOfBounds { index: usize, vertex: usize, len: usize },
    #[error("resolution too low: {0}")]
    Resolution(String),
    #[error("invalid geometry: {0}")]
    Invalid(String),
    #[error("mesh i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("mesh format: {0}")]
    Format(#[from] serde_json::Error),
}

/// Orientation contract of a [`CrackMesh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    /// Open crack, all normals point up (`n·e3 > 0`), nonempty boundary loop.
    OpenUp,
    /// Closed surface with outward normals (Green-identity tests only).
    Closed,
}

/// Triangulated crack surface with per-triangle unit normals and areas.
#[derive(Debug, Clone)]
pub struct CrackMesh {
    vertices: Vec<Vector3<f64>>,
    triangles: Vec<[usize; 3]>,
    normals: Vec<Vector3<f64>>,
    areas: Vec<f64>,
    kind: MeshKind,
}

impl CrackMesh {
    /// Builds a mesh from vertices and triangles; normals and areas are
    /// derived from the winding order, then the orientation/standoff/manifold
    /// invariants for `kind` are enforced.
    pub fn new(
        vertices: Vec<Vector3<f64>>,
        triangles: Vec<[usize; 3]>,
        kind: MeshKind,
        standoff: f64,
    ) -> Result<Self, GeometryError> {
        let mesh = Self::new_unchecked(vertices, triangles, kind);
        mesh.validate(standoff)?;
        Ok(mesh)
    }

    /// Builds a mesh without validating the orientation contract. Normals and
    /// areas are still derived from the winding; degenerate triangles panic.
    /// Intended for internal constructions (e.g. mirrored meshes in
    /// image-equivalence tests) that deliberately break the "up" rule.
    pub fn new_unchecked(
        vertices: Vec<Vector3<f64>>,
        triangles: Vec<[usize; 3]>,
        kind: MeshKind,
    ) -> Self {
        let mut normals = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let [a, b, c] = *tri;
            let cross = (vertices[b] - vertices[a]).cross(&(vertices[c] - vertices[a]));
            let double_area = cross.norm();
            assert!(double_area > 0.0, "degenerate triangle in unchecked constructor");
            normals.push(cross / double_area);
            areas.push(0.5 * double_area);
        }
        CrackMesh { vertices, triangles, normals, areas, kind }
    }

    /// Checks all structural invariants: index bounds, non-degeneracy,
    /// orientation by kind, standoff below the free surface, and manifold
    /// edges with the closedness implied by kind.
    pub fn validate(&self, standoff: f64) -> Result<(), GeometryError> {
        if self.triangles.is_empty() {
            return Err(GeometryError::Invalid("mesh has no triangles".into()));
        }
        let nv = self.vertices.len();
        for (index, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(GeometryError::IndexOutOfBounds { index, vertex: v, len: nv });
                }
            }
            let scale = self.vertices[tri[0]].norm().max(1.0);
            if self.areas[index] <= 1e-28 * scale * scale {
                return Err(GeometryError::DegenerateTriangle { index, area: self.areas[index] });
            }
        }
        match self.kind {
            MeshKind::OpenUp => {
                for (index, n) in self.normals.iter().enumerate() {
                    if n.z <= 0.0 {
                        return Err(GeometryError::Orientation {
                            index,
                            detail: format!("n·e3 = {} but open cracks must face up", n.z),
                        });
                    }
                }
            }
            MeshKind::Closed => {
                let centroid = self.vertices.iter().sum::<Vector3<f64>>() / nv as f64;
                for (index, tri) in self.triangles.iter().enumerate() {
                    let c = (self.vertices[tri[0]] + self.vertices[tri[1]] + self.vertices[tri[2]]) / 3.0;
                    if self.normals[index].dot(&(c - centroid)) <= 0.0 {
                        return Err(GeometryError::Orientation {
                            index,
                            detail: "closed surfaces must be oriented outward".into(),
                        });
                    }
                }
            }
        }
        for (index, v) in self.vertices.iter().enumerate() {
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return Err(GeometryError::Invalid(format!("vertex {index} not finite")));
            }
            if v.z > -standoff {
                return Err(GeometryError::Standoff { index, z: v.z, standoff });
            }
        }
        let boundary = self.boundary_edge_count()?;
        match (self.kind, boundary) {
            (MeshKind::OpenUp, 0) => {
                Err(GeometryError::Closedness { expected: "open", actual: "closed" })
            }
            (MeshKind::Closed, n) if n > 0 => {
                Err(GeometryError::Closedness { expected: "closed", actual: "open" })
            }
            _ => Ok(()),
        }
    }

    /// Number of boundary edges (edges used by exactly one triangle);
    /// errors on non-manifold edges.
    fn boundary_edge_count(&self) -> Result<usize, GeometryError> {
        let mut counts = std::collections::HashMap::new();
        for tri in &self.triangles {
            for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                let key = (a.min(b), a.max(b));
                *counts.entry(key).or_insert(0usize) += 1;
            }
        }
        let mut boundary = 0;
        for ((a, b), count) in counts {
            if count > 2 {
                return Err(GeometryError::NonManifold { a, b, count });
            }
            if count == 1 {
                boundary += 1;
            }
        }
        Ok(boundary)
    }

    /// Vertex indices on the boundary edge loop (empty for closed meshes).
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut counts = std::collections::HashMap::new();
        for tri in &self.triangles {
            for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                let key = (a.min(b), a.max(b));
                *counts.entry(key).or_insert(0usize) += 1;
            }
        }
        let mut on_boundary = vec![false; self.vertices.len()];
        for ((a, b), count) in counts {
            if count == 1 {
                on_boundary[a] = true;
                on_boundary[b] = true;
            }
        }
        on_boundary
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Unit normal of triangle `i` (derived from winding order).
    pub fn normal(&self, i: usize) -> &Vector3<f64> {
        &self.normals[i]
    }

    pub fn area(&self, i: usize) -> f64 {
        self.areas[i]
    }

    /// Sum of all triangle areas.
    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    /// Corner positions of triangle `i`.
    pub fn corners(&self, i: usize) -> [Vector3<f64>; 3] {
        let [a, b, c] = self.triangles[i];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Centroid of triangle `i`.
    pub fn centroid(&self, i: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangles[i];
        (self.vertices[a] + self.vertices[b] + self.vertices[c]) / 3.0
    }

    /// Bounding-box diagonal, the length scale for near-field thresholds.
    pub fn diameter(&self) -> f64 {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (hi - lo).norm()
    }

    /// Mirror image across the free surface `x3 = 0`, with winding reversed
    /// so the derived normal is the mirror of the original normal. The result
    /// faces down and is only valid for free-space image constructions.
    pub fn mirror_z(&self) -> CrackMesh {
        let vertices = self.vertices.iter().map(|v| Vector3::new(v.x, v.y, -v.z)).collect();
        let triangles = self
            .triangles
            .iter()
            .map(|&[a, b, c]| [a, c, b])
            .collect();
        CrackMesh::new_unchecked(vertices, triangles, self.kind)
    }

    /// Uniformly scale all vertices about the origin by `s > 0`.
    pub fn scaled(&self, s: f64) -> CrackMesh {
        assert!(s > 0.0, "scale factor must be positive");
        CrackMesh::new_unchecked(
            self.vertices.iter().map(|v| v * s).collect(),
            self.triangles.clone(),
            self.kind,
        )
    }
}

/// Tag of a 2-D boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    /// Lies on a symmetry line; homogeneous Dirichlet in odd eigenproblems.
    SymmetryLine,
    /// Natural (Neumann) boundary.
    Free,
}

/// Planar triangle mesh for the 2-D eigenproblems. Coordinates are `(x1, x2)`
/// for plain domains or `(r, x3)` for axisymmetric ones (`weighted = true`,
/// integration measure `r dr dx3`).
#[derive(Debug, Clone)]
pub struct Mesh2D {
    nodes: Vec<Vector2<f64>>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<([usize; 2], BoundaryTag)>,
    weighted: bool,
}

impl Mesh2D {
    /// Builds and validates a 2-D mesh.
    pub fn new(
        nodes: Vec<Vector2<f64>>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<([usize; 2], BoundaryTag)>,
        weighted: bool,
    ) -> Result<Self, GeometryError> {
        let mesh = Mesh2D { nodes, triangles, boundary_edges, weighted };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Checks positive orientation, conformity, boundary-edge consistency and
    /// (for weighted meshes) nonnegative radius.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let nv = self.nodes.len();
        let mut edge_counts = std::collections::HashMap::new();
        for (index, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(GeometryError::IndexOutOfBounds { index, vertex: v, len: nv });
                }
            }
            let a = self.signed_area(index);
            if a <= 0.0 {
                return Err(GeometryError::DegenerateTriangle { index, area: a });
            }
            for (p, q) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                *edge_counts.entry((p.min(q), p.max(q))).or_insert(0usize) += 1;
            }
        }
        for (&(a, b), &count) in &edge_counts {
            if count > 2 {
                return Err(GeometryError::NonManifold { a, b, count });
            }
        }
        for &([a, b], _tag) in &self.boundary_edges {
            let count = edge_counts.get(&(a.min(b), a.max(b))).copied().unwrap_or(0);
            if count != 1 {
                return Err(GeometryError::Invalid(format!(
                    "tagged boundary edge ({a},{b}) is used by {count} triangles"
                )));
            }
        }
        let tagged = self.boundary_edges.len();
        let boundary_total = edge_counts.values().filter(|&&c| c == 1).count();
        if tagged != boundary_total {
            return Err(GeometryError::Invalid(format!(
                "{boundary_total} boundary edges but {tagged} tagged"
            )));
        }
        if self.weighted {
            for (i, n) in self.nodes.iter().enumerate() {
                if n.x < -1e-14 {
                    return Err(GeometryError::Invalid(format!(
                        "weighted mesh has node {i} at negative radius {}",
                        n.x
                    )));
                }
            }
        }
        Ok(())
    }

    /// Signed area of triangle `i` (positive for counterclockwise winding).
    pub fn signed_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangles[i];
        let u = self.nodes[b] - self.nodes[a];
        let v = self.nodes[c] - self.nodes[a];
        0.5 * (u.x * v.y - u.y * v.x)
    }

    pub fn nodes(&self) -> &[Vector2<f64>] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[([usize; 2], BoundaryTag)] {
        &self.boundary_edges
    }

    pub fn weighted(&self) -> bool {
        self.weighted
    }

    /// Total mesh area (unweighted).
    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.signed_area(i)).sum()
    }

    /// Nodes lying on symmetry-line boundary edges (the Dirichlet set).
    pub fn symmetry_nodes(&self) -> Vec<usize> {
        let mut flags = vec![false; self.nodes.len()];
        for ([a, b], tag) in &self.boundary_edges {
            if *tag == BoundaryTag::SymmetryLine {
                flags[*a] = true;
                flags[*b] = true;
            }
        }
        flags.iter().enumerate().filter_map(|(i, &f)| f.then_some(i)).collect()
    }

    /// Longest triangle edge in the mesh.
    pub fn max_edge_len(&self) -> f64 {
        let mut h: f64 = 0.0;
        for tri in &self.triangles {
            for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                h = h.max((self.nodes[a] - self.nodes[b]).norm());
            }
        }
        h
    }
}

/// Open polyline crack in 2-D with per-segment unit normals (`n·e2 > 0`).
#[derive(Debug, Clone)]
pub struct Curve2D {
    points: Vec<Vector2<f64>>,
    normals: Vec<Vector2<f64>>,
}

impl Curve2D {
    /// Builds a curve from an ordered polyline; normals are derived from the
    /// segment tangents, flipped so `n·e2 > 0`.
    ///
    /// Validates: at least two points, finite coordinates, simple (no
    /// pairwise segment intersections), no vertical segments (which would
    /// have no up-facing normal), and all points below `-standoff`.
    pub fn new(points: Vec<Vector2<f64>>, standoff: f64) -> Result<Self, GeometryError> {
        if points.len() < 2 {
            return Err(GeometryError::Invalid("curve needs at least 2 points".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(GeometryError::Invalid(format!("curve point {i} not finite")));
            }
            if p.y > -standoff {
                return Err(GeometryError::Standoff { index: i, z: p.y, standoff });
            }
        }
        let mut normals = Vec::with_capacity(points.len() - 1);
        for (i, w) in points.windows(2).enumerate() {
            let t = w[1] - w[0];
            let len = t.norm();
            if len <= 0.0 {
                return Err(GeometryError::DegenerateTriangle { index: i, area: 0.0 });
            }
            // rotate tangent by +90°: (-t2, t1), then force n·e2 > 0
            let mut n = Vector2::new(-t.y, t.x) / len;
            if n.y < 0.0 {
                n = -n;
            }
            if n.y <= 0.0 {
                return Err(GeometryError::Orientation {
                    index: i,
                    detail: "vertical segment has no up-facing normal".into(),
                });
            }
            normals.push(n);
        }
        // simplicity: no two non-adjacent segments may intersect
        for i in 0..points.len() - 1 {
            for j in i + 2..points.len() - 1 {
                if segments_intersect(
                    &points[i],
                    &points[i + 1],
                    &points[j],
                    &points[j + 1],
                ) {
                    return Err(GeometryError::SelfIntersection { i, j });
                }
            }
        }
        Ok(Curve2D { points, normals })
    }

    pub fn points(&self) -> &[Vector2<f64>] {
        &self.points
    }

    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }

    /// Endpoints of segment `i`.
    pub fn segment(&self, i: usize) -> (Vector2<f64>, Vector2<f64>) {
        (self.points[i], self.points[i + 1])
    }

    /// Unit normal of segment `i` (points up).
    pub fn normal(&self, i: usize) -> &Vector2<f64> {
        &self.normals[i]
    }

    pub fn segment_len(&self, i: usize) -> f64 {
        (self.points[i + 1] - self.points[i]).norm()
    }

    /// Total polyline length.
    pub fn total_len(&self) -> f64 {
        (0..self.segment_count()).map(|i| self.segment_len(i)).sum()
    }

    /// Bounding-box diagonal.
    pub fn diameter(&self) -> f64 {
        let mut lo = Vector2::repeat(f64::INFINITY);
        let mut hi = Vector2::repeat(f64::NEG_INFINITY);
        for p in &self.points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (hi - lo).norm()
    }
}

/// Proper intersection test for closed segments, excluding shared endpoints.
fn segments_intersect(
    a: &Vector2<f64>,
    b: &Vector2<f64>,
    c: &Vector2<f64>,
    d: &Vector2<f64>,
) -> bool {
    let orient = |p: &Vector2<f64>, q: &Vector2<f64>, r: &Vector2<f64>| -> f64 {
        (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
    };
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_meshes_reject_downward_normals() {
        // a single downward-facing triangle below the surface
        let verts = vec![
            Vector3::new(0.0, 0.0, -2.0),
            Vector3::new(0.0, 1.0, -2.0),
            Vector3::new(1.0, 0.0, -2.0),
        ];
        let err = CrackMesh::new(verts, vec![[0, 1, 2]], MeshKind::OpenUp, 0.5);
        assert!(matches!(err, Err(GeometryError::Orientation { index: 0, .. })));
    }

    #[test]
    fn standoff_violations_name_the_vertex() {
        let verts = vec![
            Vector3::new(0.0, 0.0, -2.0),
            Vector3::new(1.0, 0.0, -2.0),
            Vector3::new(0.0, 1.0, -0.1),
        ];
        let err = CrackMesh::new(verts, vec![[0, 1, 2]], MeshKind::OpenUp, 0.5);
        assert!(matches!(err, Err(GeometryError::Standoff { index: 2, .. })));
    }

    #[test]
    fn curves_must_be_simple() {
        // a bowtie polyline
        let pts = vec![
            Vector2::new(0.0, -2.0),
            Vector2::new(1.0, -1.9),
            Vector2::new(0.0, -1.9),
            Vector2::new(1.0, -2.0),
        ];
        assert!(matches!(
            Curve2D::new(pts, 0.5),
            Err(GeometryError::SelfIntersection { .. })
        ));
    }

    #[test]
    fn curve_normals_face_up() {
        let pts = vec![
            Vector2::new(-1.0, -2.0),
            Vector2::new(0.0, -1.8),
            Vector2::new(1.0, -2.1),
        ];
        let curve = Curve2D::new(pts, 0.5).unwrap();
        for i in 0..curve.segment_count() {
            assert!(curve.normal(i).y > 0.0);
            // unit and orthogonal to the segment
            let (a, b) = curve.segment(i);
            assert!((curve.normal(i).norm() - 1.0).abs() < 1e-14);
            assert!(curve.normal(i).dot(&(b - a)).abs() < 1e-14);
        }
    }
}
