//! Gauss rules on triangles and segments, point–cell distances, and the
//! recursive near-field subdivision driver shared by all layer evaluations.

use super::PotentialError;
use nalgebra::{Vector2, Vector3};
use num_complex::Complex64;

/// Quadrature plumbing: base rule size and near-field subdivision controls.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    /// Base Gauss points per triangle; one of 1, 3, 6, 12.
    pub order: usize,
    /// Cells closer than `near_threshold × diam(cell)` to the target are
    /// subdivided. Must be ≥ 1.
    pub near_threshold: f64,
    /// Maximum subdivision depth, ≤ 8.
    pub max_depth: usize,
    /// Permit targets closer than the surface guard (used by jump probes).
    pub allow_near: bool,
}

impl QuadratureConfig {
    /// Validated constructor.
    pub fn new(order: usize, near_threshold: f64, max_depth: usize) -> Result<Self, PotentialError> {
        if ![1, 3, 6, 12].contains(&order) {
            return Err(PotentialError::Config(format!("unsupported rule size {order}")));
        }
        if !(near_threshold >= 1.0) {
            return Err(PotentialError::Config(format!(
                "near-field threshold {near_threshold} must be ≥ 1"
            )));
        }
        if max_depth > 8 {
            return Err(PotentialError::Config(format!("subdivision depth {max_depth} > 8")));
        }
        Ok(QuadratureConfig { order, near_threshold, max_depth, allow_near: false })
    }

    /// The same configuration with the surface guard disabled.
    pub fn near_allowed(mut self) -> Self {
        self.allow_near = true;
        self
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { order: 3, near_threshold: 2.0, max_depth: 8, allow_near: false }
    }
}

/// Barycentric Gauss rule on the reference triangle; weights sum to 1.
pub(super) fn triangle_rule(order: usize) -> &'static [([f64; 3], f64)] {
    // centroid rule (degree 1)
    const R1: [([f64; 3], f64); 1] = [([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1.0)];
    // three-point rule (degree 2)
    const R3: [([f64; 3], f64); 3] = [
        ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
        ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
        ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
    ];
    // six-point rule (degree 4)
    const A1: f64 = 0.108_103_018_168_070;
    const B1: f64 = 0.445_948_490_915_965;
    const W1: f64 = 0.223_381_589_678_011;
    const A2: f64 = 0.816_847_572_980_459;
    const B2: f64 = 0.091_576_213_509_771;
    const W2: f64 = 0.109_951_743_655_322;
    const R6: [([f64; 3], f64); 6] = [
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ];
    // twelve-point rule (degree 6)
    const C1: f64 = 0.873_821_971_016_996;
    const D1: f64 = 0.063_089_014_491_502;
    const V1: f64 = 0.050_844_906_370_207;
    const C2: f64 = 0.501_426_509_658_179;
    const D2: f64 = 0.249_286_745_170_910;
    const V2: f64 = 0.116_786_275_726_379;
    const E1: f64 = 0.636_502_499_121_399;
    const E2: f64 = 0.310_352_451_033_785;
    const E3: f64 = 0.053_145_049_844_816;
    const V3: f64 = 0.082_851_075_618_374;
    const R12: [([f64; 3], f64); 12] = [
        ([C1, D1, D1], V1),
        ([D1, C1, D1], V1),
        ([D1, D1, C1], V1),
        ([C2, D2, D2], V2),
        ([D2, C2, D2], V2),
        ([D2, D2, C2], V2),
        ([E1, E2, E3], V3),
        ([E1, E3, E2], V3),
        ([E2, E1, E3], V3),
        ([E2, E3, E1], V3),
        ([E3, E1, E2], V3),
        ([E3, E2, E1], V3),
    ];
    match order {
        1 => &R1,
        3 => &R3,
        6 => &R6,
        12 => &R12,
        _ => unreachable!("config validated"),
    }
}

/// Gauss–Legendre rule on [-1, 1] matched in polynomial degree to the
/// triangle rule of the same config (weights sum to 2).
pub(super) fn segment_rule(order: usize) -> &'static [(f64, f64)] {
    const G1: [(f64, f64); 1] = [(0.0, 2.0)];
    const G2: [(f64, f64); 2] = [(-0.577_350_269_189_625_8, 1.0), (0.577_350_269_189_625_8, 1.0)];
    const G3: [(f64, f64); 3] = [
        (-0.774_596_669_241_483_4, 5.0 / 9.0),
        (0.0, 8.0 / 9.0),
        (0.774_596_669_241_483_4, 5.0 / 9.0),
    ];
    const G4: [(f64, f64); 4] = [
        (-0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
        (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
    ];
    match order {
        1 => &G1,
        3 => &G2,
        6 => &G3,
        12 => &G4,
        _ => unreachable!("config validated"),
    }
}

/// Euclidean distance from `p` to the closed triangle `(a, b, c)`.
pub fn point_triangle_distance(
    p: &Vector3<f64>,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    c: &Vector3<f64>,
) -> f64 {
    // closest-point-on-triangle via barycentric region tests
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm();
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (ap - ab * v).norm();
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (ap - ac * w).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (bp - (c - b) * w).norm();
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (ap - ab * v - ac * w).norm()
}

/// Euclidean distance from `p` to the closed segment `(a, b)`.
pub fn point_segment_distance(p: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    let t = b - a;
    let len2 = t.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).dot(&t) / len2).clamp(0.0, 1.0);
    (p - (a + t * s)).norm()
}

fn tri_diameter(p: &[Vector3<f64>; 3]) -> f64 {
    (p[1] - p[0])
        .norm()
        .max((p[2] - p[1]).norm())
        .max((p[0] - p[2]).norm())
}

/// Additive accumulator with complex scaling, so one subdivision walk can
/// carry a kernel value and its gradient components together.
pub(super) trait Accum: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn mul(self, c: Complex64) -> Self;
}

impl Accum for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn mul(self, c: Complex64) -> Self {
        self * c
    }
}

/// Bundle of up to four complex channels (value plus gradient components).
#[derive(Clone, Copy)]
pub(super) struct Quad4(pub [Complex64; 4]);

impl Accum for Quad4 {
    fn zero() -> Self {
        Quad4([Complex64::new(0.0, 0.0); 4])
    }
    fn add(self, other: Self) -> Self {
        Quad4([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
            self.0[3] + other.0[3],
        ])
    }
    fn mul(self, c: Complex64) -> Self {
        Quad4([self.0[0] * c, self.0[1] * c, self.0[2] * c, self.0[3] * c])
    }
}

/// Integrates `f(y)·g(y)` over one triangle with linear corner data,
/// subdividing while the target is within the near-field band.
pub(super) fn integrate_triangle<T, F>(
    x: &Vector3<f64>,
    corners: &[Vector3<f64>; 3],
    gvals: &[Complex64; 3],
    depth: usize,
    q: &QuadratureConfig,
    f: &F,
) -> T
where
    T: Accum,
    F: Fn(&Vector3<f64>) -> T,
{
    let dist = point_triangle_distance(x, &corners[0], &corners[1], &corners[2]);
    if dist >= q.near_threshold * tri_diameter(corners) || depth >= q.max_depth {
        let cross = (corners[1] - corners[0]).cross(&(corners[2] - corners[0]));
        let area = 0.5 * cross.norm();
        let mut acc = T::zero();
        for (bary, w) in triangle_rule(q.order) {
            let y = corners[0] * bary[0] + corners[1] * bary[1] + corners[2] * bary[2];
            let g = gvals[0] * bary[0] + gvals[1] * bary[1] + gvals[2] * bary[2];
            acc = acc.add(f(&y).mul(g * (w * area)));
        }
        return acc;
    }
    // split into four; midpoint values are exact for linear data
    let m01 = (corners[0] + corners[1]) * 0.5;
    let m12 = (corners[1] + corners[2]) * 0.5;
    let m20 = (corners[2] + corners[0]) * 0.5;
    let g01 = (gvals[0] + gvals[1]) * 0.5;
    let g12 = (gvals[1] + gvals[2]) * 0.5;
    let g20 = (gvals[2] + gvals[0]) * 0.5;
    let children: [([Vector3<f64>; 3], [Complex64; 3]); 4] = [
        ([corners[0], m01, m20], [gvals[0], g01, g20]),
        ([m01, corners[1], m12], [g01, gvals[1], g12]),
        ([m20, m12, corners[2]], [g20, g12, gvals[2]]),
        ([m01, m12, m20], [g01, g12, g20]),
    ];
    let mut acc = T::zero();
    for (cp, cg) in &children {
        acc = acc.add(integrate_triangle(x, cp, cg, depth + 1, q, f));
    }
    acc
}

/// Segment analogue of [`integrate_triangle`] (weights carry the length).
pub(super) fn integrate_segment<T, F>(
    x: &Vector2<f64>,
    ends: &[Vector2<f64>; 2],
    gvals: &[Complex64; 2],
    depth: usize,
    q: &QuadratureConfig,
    f: &F,
) -> T
where
    T: Accum,
    F: Fn(&Vector2<f64>) -> T,
{
    let len = (ends[1] - ends[0]).norm();
    let dist = point_segment_distance(x, &ends[0], &ends[1]);
    if dist >= q.near_threshold * len || depth >= q.max_depth {
        let mut acc = T::zero();
        for (node, w) in segment_rule(q.order) {
            let s = 0.5 * (1.0 + node);
            let y = ends[0] * (1.0 - s) + ends[1] * s;
            let g = gvals[0] * (1.0 - s) + gvals[1] * s;
            acc = acc.add(f(&y).mul(g * (w * 0.5 * len)));
        }
        return acc;
    }
    let mid = (ends[0] + ends[1]) * 0.5;
    let gm = (gvals[0] + gvals[1]) * 0.5;
    let left: T = integrate_segment(x, &[ends[0], mid], &[gvals[0], gm], depth + 1, q, f);
    let right: T = integrate_segment(x, &[mid, ends[1]], &[gm, gvals[1]], depth + 1, q, f);
    left.add(right)
}
