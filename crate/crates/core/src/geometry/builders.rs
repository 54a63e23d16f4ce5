//! Constructors for the crack surfaces used by the counterexamples and the
//! inversion study: geodesic hemispheres, closed spheres, surfaces of
//! revolution and planar rectangular patches.

use super::{CrackMesh, GeometryError, MeshKind};
use nalgebra::{Vector2, Vector3};

/// Geodesic subdivision of the upper unit hemisphere, starting from the four
/// upper octahedron faces. Midpoints are projected back to the sphere, so
/// equator vertices stay exactly on `z = 0` and are bit-identical between the
/// upper and lower hemisphere of the same refinement level.
fn unit_upper_hemisphere(n_refine: usize) -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let mut vertices = vec![
        Vector3::new(0.0, 0.0, 1.0),
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(0.0, 1.0, 0.0),
        Vector3::new(-1.0, 0.0, 0.0),
        Vector3::new(0.0, -1.0, 0.0),
    ];
    let mut triangles = vec![[0usize, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1]];
    for _ in 0..n_refine {
        let mut midpoint_cache: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for &[a, b, c] in &triangles {
            let mut mid = |p: usize, q: usize, vertices: &mut Vec<Vector3<f64>>| -> usize {
                let key = (p.min(q), p.max(q));
                *midpoint_cache.entry(key).or_insert_with(|| {
                    let m = (vertices[p] + vertices[q]).normalize();
                    vertices.push(m);
                    vertices.len() - 1
                })
            };
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        triangles = next;
    }
    (vertices, triangles)
}

/// Geodesic hemisphere crack of radius `radius` about `center`, refined
/// `n_refine` times (triangle count `4·4^n`). Both halves are oriented "up":
/// the upper hemisphere's normals are outward, the lower one's inward, and
/// the two share their equator vertex ring exactly.
///
/// # Errors
/// The sphere must stay below the free surface: `center.z + radius < 0`.
pub fn make_hemisphere(
    center: &Vector3<f64>,
    radius: f64,
    upper: bool,
    n_refine: usize,
) -> Result<CrackMesh, GeometryError> {
    if !(radius > 0.0) {
        return Err(GeometryError::Invalid(format!("radius {radius} must be positive")));
    }
    if center.z + radius >= 0.0 {
        return Err(GeometryError::Invalid(format!(
            "sphere reaches z = {}, above the free surface",
            center.z + radius
        )));
    }
    let (mut vertices, triangles) = unit_upper_hemisphere(n_refine);
    if !upper {
        // Mirror across the equator, keeping the winding: the derived normals
        // then point up (into the ball), as the orientation contract demands.
        for v in &mut vertices {
            v.z = -v.z;
        }
    }
    for v in &mut vertices {
        *v = center + radius * *v;
    }
    CrackMesh::new(vertices, triangles, MeshKind::OpenUp, -(center.z + radius))
}

/// Closed geodesic sphere with outward normals, for Green-identity tests.
/// Equator vertices of the two generating hemispheres are welded.
///
/// # Errors
/// Same containment requirement as [`make_hemisphere`].
pub fn make_sphere(
    center: &Vector3<f64>,
    radius: f64,
    n_refine: usize,
) -> Result<CrackMesh, GeometryError> {
    if !(radius > 0.0) {
        return Err(GeometryError::Invalid(format!("radius {radius} must be positive")));
    }
    if center.z + radius >= 0.0 {
        return Err(GeometryError::Invalid(format!(
            "sphere reaches z = {}, above the free surface",
            center.z + radius
        )));
    }
    let (upper_vertices, upper_triangles) = unit_upper_hemisphere(n_refine);
    let mut vertices = upper_vertices.clone();
    let mut triangles = upper_triangles.clone();
    // Mirror the lower half and weld the shared equator ring (z == 0 exactly,
    // since midpoint projection preserves the equator).
    let mut remap = vec![usize::MAX; upper_vertices.len()];
    let mut equator: std::collections::HashMap<(u64, u64), usize> = std::collections::HashMap::new();
    for (i, v) in upper_vertices.iter().enumerate() {
        if v.z == 0.0 {
            equator.insert((v.x.to_bits(), v.y.to_bits()), i);
        }
    }
    for (i, v) in upper_vertices.iter().enumerate() {
        if v.z == 0.0 {
            remap[i] = equator[&(v.x.to_bits(), v.y.to_bits())];
        } else {
            vertices.push(Vector3::new(v.x, v.y, -v.z));
            remap[i] = vertices.len() - 1;
        }
    }
    for &[a, b, c] in &upper_triangles {
        // flipped winding so the mirrored normals point outward (down)
        triangles.push([remap[a], remap[c], remap[b]]);
    }
    for v in &mut vertices {
        *v = center + radius * *v;
    }
    CrackMesh::new(vertices, triangles, MeshKind::Closed, -(center.z + radius))
}

/// Surface of revolution of the profile polyline `(r_i, z_i)` about the
/// vertical axis through `(axis.x, axis.y, 0)`, with `n_theta` angular
/// divisions. Profile points with `r = 0` become poles. Triangles are wound
/// so normals face up, which requires the surface to be a graph over the
/// horizontal plane (no vertical profile segments).
///
/// # Errors
/// `n_theta < 8` is a resolution error; non-simple or empty profiles and
/// profiles crossing `r < 0` are geometry errors.
pub fn make_revolution_surface(
    profile: &[Vector2<f64>],
    n_theta: usize,
    axis: &Vector2<f64>,
) -> Result<CrackMesh, GeometryError> {
    if n_theta < 8 {
        return Err(GeometryError::Resolution(format!(
            "n_theta = {n_theta} angular divisions (need at least 8)"
        )));
    }
    if profile.len() < 2 {
        return Err(GeometryError::Invalid("profile needs at least 2 points".into()));
    }
    for (i, p) in profile.iter().enumerate() {
        if p.x < 0.0 {
            return Err(GeometryError::Invalid(format!("profile point {i} has r < 0")));
        }
    }
    for w in profile.windows(2) {
        if (w[1] - w[0]).norm() == 0.0 {
            return Err(GeometryError::Invalid("repeated profile point".into()));
        }
        if w[1].x == w[0].x {
            return Err(GeometryError::Invalid(
                "vertical profile segment cannot be oriented up".into(),
            ));
        }
    }
    // simplicity of the profile polyline
    for i in 0..profile.len() - 1 {
        for j in i + 2..profile.len() - 1 {
            if super::segments_intersect(&profile[i], &profile[i + 1], &profile[j], &profile[j + 1])
            {
                return Err(GeometryError::SelfIntersection { i, j });
            }
        }
    }

    let mut vertices: Vec<Vector3<f64>> = Vec::new();
    // ring_start[i] = Some(base index) for r > 0 rings, None → pole vertex id
    enum Ring {
        Pole(usize),
        Circle(usize),
    }
    let mut rings = Vec::with_capacity(profile.len());
    for p in profile {
        if p.x == 0.0 {
            vertices.push(Vector3::new(axis.x, axis.y, p.y));
            rings.push(Ring::Pole(vertices.len() - 1));
        } else {
            let base = vertices.len();
            for j in 0..n_theta {
                let th = 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64;
                vertices.push(Vector3::new(
                    axis.x + p.x * th.cos(),
                    axis.y + p.x * th.sin(),
                    p.y,
                ));
            }
            rings.push(Ring::Circle(base));
        }
    }

    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut push_up = |tri: [usize; 3], vertices: &[Vector3<f64>]| {
        let [a, b, c] = tri;
        let n = (vertices[b] - vertices[a]).cross(&(vertices[c] - vertices[a]));
        if n.z >= 0.0 {
            triangles.push(tri);
        } else {
            triangles.push([a, c, b]);
        }
    };
    for w in rings.windows(2) {
        match (&w[0], &w[1]) {
            (Ring::Pole(p), Ring::Circle(base)) | (Ring::Circle(base), Ring::Pole(p)) => {
                for j in 0..n_theta {
                    let jn = (j + 1) % n_theta;
                    push_up([*p, base + j, base + jn], &vertices);
                }
            }
            (Ring::Circle(b0), Ring::Circle(b1)) => {
                for j in 0..n_theta {
                    let jn = (j + 1) % n_theta;
                    push_up([b0 + j, b1 + j, b1 + jn], &vertices);
                    push_up([b0 + j, b1 + jn, b0 + jn], &vertices);
                }
            }
            (Ring::Pole(_), Ring::Pole(_)) => {
                return Err(GeometryError::Invalid(
                    "consecutive profile points on the axis".into(),
                ));
            }
        }
    }
    let standoff = vertices.iter().map(|v| -v.z).fold(f64::INFINITY, f64::min);
    if standoff <= 0.0 {
        return Err(GeometryError::Invalid("surface touches the free surface".into()));
    }
    CrackMesh::new(vertices, triangles, MeshKind::OpenUp, standoff)
}

/// Planar rectangular crack patch: points
/// `center + s·a·e1 + t·b·e2`, `(s, t) ∈ [-1, 1]²`, triangulated on an
/// `n1 × n2` grid. `e1, e2` must be orthonormal with `(e1 × e2)·e3 > 0`.
///
/// # Errors
/// Non-orthonormal axes, non-positive half-widths or a patch reaching the
/// free surface are geometry errors.
pub fn make_planar_crack(
    center: &Vector3<f64>,
    e1: &Vector3<f64>,
    e2: &Vector3<f64>,
    half_widths: (f64, f64),
    n1: usize,
    n2: usize,
) -> Result<CrackMesh, GeometryError> {
    let (a, b) = half_widths;
    if !(a > 0.0 && b > 0.0) {
        return Err(GeometryError::Invalid(format!("half-widths ({a}, {b}) must be positive")));
    }
    if n1 == 0 || n2 == 0 {
        return Err(GeometryError::Resolution("need at least one cell per axis".into()));
    }
    let tol = 1e-12;
    if (e1.norm() - 1.0).abs() > tol || (e2.norm() - 1.0).abs() > tol || e1.dot(e2).abs() > tol {
        return Err(GeometryError::Invalid("patch axes must be orthonormal".into()));
    }
    let n = e1.cross(e2);
    if n.z <= 0.0 {
        return Err(GeometryError::Invalid(
            "patch axes must induce an up-facing normal (e1 × e2)·e3 > 0".into(),
        ));
    }
    let mut vertices = Vec::with_capacity((n1 + 1) * (n2 + 1));
    for i in 0..=n1 {
        let s = -1.0 + 2.0 * i as f64 / n1 as f64;
        for j in 0..=n2 {
            let t = -1.0 + 2.0 * j as f64 / n2 as f64;
            vertices.push(center + s * a * e1 + t * b * e2);
        }
    }
    let idx = |i: usize, j: usize| i * (n2 + 1) + j;
    let mut triangles = Vec::with_capacity(2 * n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            // winding chosen so the derived normal equals e1 × e2 (up)
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let standoff = vertices.iter().map(|v| -v.z).fold(f64::INFINITY, f64::min);
    if standoff <= 0.0 {
        return Err(GeometryError::Invalid("patch reaches the free surface".into()));
    }
    CrackMesh::new(vertices, triangles, MeshKind::OpenUp, standoff)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hemisphere_area_converges_to_two_pi() {
        // inscribed geodesic facets: area deficit shrinks at O(h²),
        // within 0.5% of 2πr² at refinement 4
        let c = Vector3::new(0.0, 0.0, -2.0);
        let mesh = make_hemisphere(&c, 1.0, true, 4).unwrap();
        let exact = 2.0 * std::f64::consts::PI;
        assert!((mesh.total_area() - exact).abs() < 5e-3 * exact);
        assert_eq!(mesh.triangles().len(), 4 * 4usize.pow(4));
    }

    #[test]
    fn hemisphere_pair_shares_the_equator_ring_exactly() {
        let c = Vector3::new(0.0, 0.0, -2.0);
        let up = make_hemisphere(&c, 1.0, true, 3).unwrap();
        let lo = make_hemisphere(&c, 1.0, false, 3).unwrap();
        let ring = |m: &CrackMesh| {
            let mut pts: Vec<_> = m
                .vertices()
                .iter()
                .filter(|v| v.z == -2.0)
                .map(|v| (v.x.to_bits(), v.y.to_bits()))
                .collect();
            pts.sort();
            pts
        };
        let ru = ring(&up);
        assert_eq!(ru.len(), 4 * 2usize.pow(3));
        assert_eq!(ru, ring(&lo));
    }

    #[test]
    fn lower_hemisphere_normals_point_up_and_inward() {
        let c = Vector3::new(0.0, 0.0, -2.0);
        let lo = make_hemisphere(&c, 1.0, false, 2).unwrap();
        for i in 0..lo.triangles().len() {
            assert!(lo.normal(i).z > 0.0);
            // inward: normal opposes the radial direction
            let radial = (lo.centroid(i) - c).normalize();
            assert!(lo.normal(i).dot(&radial) < 0.0);
        }
    }

    #[test]
    fn closed_sphere_has_no_boundary_and_welded_equator() {
        let c = Vector3::new(0.0, 0.0, -3.0);
        let s = make_sphere(&c, 1.0, 3).unwrap();
        assert!(s.boundary_vertices().is_empty());
        let nv = s.vertices().len();
        let nt = s.triangles().len();
        // Euler characteristic of a sphere: V - E + F = 2, E = 3F/2
        assert_eq!(nv as isize - (3 * nt / 2) as isize + nt as isize, 2);
    }

    #[test]
    fn revolution_surface_matches_hemisphere_area() {
        // revolve a quarter-circle profile: area → 2πr²
        let n = 64;
        let profile: Vec<Vector2<f64>> = (0..=n)
            .map(|i| {
                let th = std::f64::consts::FRAC_PI_2 * i as f64 / n as f64;
                Vector2::new(th.cos(), th.sin() - 3.0)
            })
            .collect();
        let m = make_revolution_surface(&profile, 64, &Vector2::new(0.0, 0.0)).unwrap();
        let exact = 2.0 * std::f64::consts::PI;
        assert!((m.total_area() - exact).abs() < 1e-2 * exact);
        for i in 0..m.triangles().len() {
            assert!(m.normal(i).z > 0.0);
        }
    }

    #[test]
    fn revolution_surface_rejects_coarse_angular_resolution() {
        let profile = vec![Vector2::new(0.0, -2.0), Vector2::new(1.0, -2.5)];
        assert!(matches!(
            make_revolution_surface(&profile, 6, &Vector2::new(0.0, 0.0)),
            Err(GeometryError::Resolution(_))
        ));
    }

    #[test]
    fn planar_patch_covers_its_rectangle() {
        let c = Vector3::new(0.5, -0.25, -2.0);
        let m = make_planar_crack(
            &c,
            &Vector3::new(1.0, 0.0, 0.0),
            &Vector3::new(0.0, 1.0, 0.0),
            (0.5, 0.25),
            8,
            4,
        )
        .unwrap();
        assert!((m.total_area() - 4.0 * 0.5 * 0.25).abs() < 1e-12);
        assert_eq!(m.boundary_vertices().len(), 2 * 8 + 2 * 4);
    }
}
