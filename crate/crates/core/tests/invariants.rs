//! Property tests of the public API: algebraic identities the library
//! promises for *every* admissible input — linearity in the density, exact
//! length/frequency rescaling, root-finder contracts, mesh algebra, seeded
//! perturbation determinism and distance-function geometry.

use cracklab::geometry::{make_planar_crack, make_sphere, CrackMesh};
use cracklab::inversion::{predicted_bad_set, PlanarCrackParams};
use cracklab::potential::{
    eval_double_layer_3d, point_triangle_distance, DensityField, QuadratureConfig,
};
use cracklab::special::{spherical_dj, zeros_of_dj, WaveContext};
use nalgebra::Vector3;
use num_complex::Complex64;
use proptest::prelude::*;

fn quad() -> QuadratureConfig {
    QuadratureConfig::default()
}

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

/// Interior bump scaled by a complex factor; vanishes on the boundary loop.
fn bump(mesh: &CrackMesh, factor: Complex64) -> DensityField {
    let values = mesh
        .vertices()
        .iter()
        .map(|v| {
            let s = (v.x + 0.5) * std::f64::consts::PI;
            let t = (v.y + 0.5) * std::f64::consts::PI;
            factor * s.sin() * t.sin()
        })
        .collect();
    DensityField::on_mesh(mesh, values).unwrap()
}

/// A second, asymmetric interior profile so the two densities are not
/// proportional.
fn skewed(mesh: &CrackMesh, factor: Complex64) -> DensityField {
    let values = mesh
        .vertices()
        .iter()
        .map(|v| {
            let s = (v.x + 0.5) * std::f64::consts::PI;
            let t = (v.y + 0.5) * std::f64::consts::PI;
            factor * (2.0 * s).sin() * t.sin()
        })
        .collect();
    DensityField::on_mesh(mesh, values).unwrap()
}

fn complex_in(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The double layer is linear in the density: evaluating a complex
    /// combination equals the same combination of the evaluations.
    #[test]
    fn double_layer_is_linear_in_the_density(
        alpha in complex_in(2.0),
        beta in complex_in(2.0),
        k in 0.3f64..3.0,
    ) {
        let mesh = flat_crack(4);
        let ctx = WaveContext::from_wavenumber(k);
        let g = bump(&mesh, Complex64::new(1.0, 0.0));
        let h = skewed(&mesh, Complex64::new(0.4, -0.7));
        let combo = g.axpby(alpha, &h, beta);
        let pts = [
            Vector3::new(0.3, -0.1, -1.0),
            Vector3::new(-0.8, 0.4, -2.6),
            Vector3::new(0.0, 0.0, 0.0),
        ];
        let ug = eval_double_layer_3d(&mesh, &g, &ctx, &pts, &quad()).unwrap();
        let uh = eval_double_layer_3d(&mesh, &h, &ctx, &pts, &quad()).unwrap();
        let uc = eval_double_layer_3d(&mesh, &combo, &ctx, &pts, &quad()).unwrap();
        let scale = (0..pts.len()).map(|i| uc.value(i).norm()).fold(0.0, f64::max);
        for i in 0..pts.len() {
            let want = alpha * ug.value(i) + beta * uh.value(i);
            prop_assert!(
                (uc.value(i) - want).norm() <= 1e-12 * (1.0 + scale),
                "point {i}: {} vs {}", uc.value(i), want
            );
        }
    }

    /// Doubling or halving every length while inversely scaling the
    /// wavenumber leaves the field unchanged — the problem is scale-free.
    /// Powers of two keep the rescaling exact in floating point.
    #[test]
    fn binary_rescaling_leaves_the_field_unchanged(
        exp in -2i32..=2,
        k in 0.5f64..2.5,
        px in -0.9f64..0.9,
        pz in -3.0f64..-0.5,
    ) {
        let lambda = (2.0f64).powi(exp);
        let mesh = flat_crack(3);
        let g = bump(&mesh, Complex64::new(1.0, 0.3));
        let p = Vector3::new(px, 0.2, pz);

        let base = eval_double_layer_3d(
            &mesh, &g, &WaveContext::from_wavenumber(k), &[p], &quad(),
        ).unwrap();
        let scaled = eval_double_layer_3d(
            &mesh.scaled(lambda),
            &g,
            &WaveContext::from_wavenumber(k / lambda),
            &[p * lambda],
            &quad(),
        ).unwrap();
        // the kernel's 1/r and the area element trade a net factor of λ²·λ⁻²
        prop_assert!(
            (base.value(0) - scaled.value(0)).norm() <= 1e-12 * (1.0 + base.value(0).norm()),
            "{} vs {}", base.value(0), scaled.value(0)
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Every reported root of the spherical Bessel derivative is a root, the
    /// sequence strictly increases, and consecutive roots stay well apart.
    #[test]
    fn bessel_derivative_roots_honor_their_contract(
        l in 0usize..=3,
        count in 1usize..=6,
    ) {
        let zs = zeros_of_dj(l, count);
        prop_assert_eq!(zs.len(), count);
        for z in &zs {
            prop_assert!(z.is_finite() && *z > 0.0);
            prop_assert!(
                spherical_dj(l, *z).abs() <= 1e-11,
                "dj_{l}({z}) = {:.3e}", spherical_dj(l, *z)
            );
        }
        for w in zs.windows(2) {
            prop_assert!(w[1] > w[0] + 1.0, "roots {w:?} too close or unsorted");
        }
    }

    /// The predicted bad-frequency set is the root ladder divided by
    /// wavenumber times radius, so rescaling both leaves the products fixed.
    #[test]
    fn bad_set_scales_inversely_with_wavenumber_and_radius(
        k0 in 0.2f64..4.0,
        radius in 0.2f64..3.0,
    ) {
        let x_max = 12.0;
        let reference = predicted_bad_set(1.0, 1.0, x_max, 3);
        let scaled = predicted_bad_set(k0, radius, x_max / (k0 * radius), 3);
        prop_assert_eq!(reference.len(), scaled.len());
        for (a, b) in reference.iter().zip(&scaled) {
            prop_assert!(
                (a - b * k0 * radius).abs() <= 1e-12 * a,
                "{a} vs {} × {}", b, k0 * radius
            );
        }
    }

    /// Mesh algebra: mirroring across the free surface is an involution,
    /// uniform scaling multiplies areas by the square of the factor, and
    /// both operations preserve the triangle count.
    #[test]
    fn mesh_mirror_and_scaling_algebra(
        cz in -4.0f64..-1.5,
        hw in 0.2f64..1.0,
        s in 0.25f64..4.0,
    ) {
        let mesh = make_planar_crack(
            &Vector3::new(0.1, -0.2, cz),
            &Vector3::new(1.0, 0.0, 0.0),
            &Vector3::new(0.0, 1.0, 0.0),
            (hw, 0.5 * hw),
            3,
            2,
        ).unwrap();

        let twice = mesh.mirror_z().mirror_z();
        prop_assert_eq!(twice.vertices(), mesh.vertices());
        prop_assert_eq!(twice.triangles(), mesh.triangles());
        prop_assert!(
            (mesh.mirror_z().total_area() - mesh.total_area()).abs()
                <= 1e-12 * mesh.total_area()
        );

        let scaled = mesh.scaled(s);
        prop_assert_eq!(scaled.triangles().len(), mesh.triangles().len());
        prop_assert!(
            (scaled.total_area() - s * s * mesh.total_area()).abs()
                <= 1e-12 * s * s * mesh.total_area(),
            "area {} vs {}", scaled.total_area(), s * s * mesh.total_area()
        );
    }

    /// A sphere mesh is closed and refines toward the exact area from below.
    #[test]
    fn sphere_meshes_fill_out_the_exact_area(
        cz in -5.0f64..-2.0,
        radius in 0.3f64..1.2,
    ) {
        prop_assume!(cz + radius < -0.1);
        let center = Vector3::new(0.0, 0.0, cz);
        let exact = 4.0 * std::f64::consts::PI * radius * radius;
        let coarse = make_sphere(&center, radius, 1).unwrap().total_area();
        let fine = make_sphere(&center, radius, 3).unwrap().total_area();
        prop_assert!(coarse < fine && fine < exact, "{coarse} < {fine} < {exact}");
        prop_assert!(exact - fine <= 0.05 * exact, "inscribed area gap {}", exact - fine);
    }

    /// Seeded geometry perturbations are reproducible, bounded by the
    /// requested relative size, and vanish at zero amplitude.
    #[test]
    fn perturbed_parameters_are_deterministic_and_bounded(
        cz in -3.0f64..-1.0,
        w0 in 0.2f64..1.0,
        w1 in 0.2f64..1.0,
        rel in 0.0f64..0.2,
        seed in 0u64..1000,
    ) {
        let base = PlanarCrackParams::horizontal(Vector3::new(0.3, -0.4, cz), [w0, w1]);
        let a = base.perturbed(rel, seed);
        let b = base.perturbed(rel, seed);
        prop_assert_eq!(&a, &b, "same seed must give the same perturbation");

        let untouched = base.perturbed(0.0, seed);
        prop_assert_eq!(&untouched, &base);

        let bound = |x: f64, y: f64| (y - x).abs() <= rel * x.abs().max(0.5) * (1.0 + 1e-12);
        for i in 0..3 {
            prop_assert!(bound(base.center[i], a.center[i]));
        }
        for i in 0..2 {
            prop_assert!(bound(base.half_widths[i], a.half_widths[i]));
            prop_assert!(bound(base.tilt[i], a.tilt[i]));
        }
        prop_assert_eq!(a.modes, base.modes);
    }

    /// Point–triangle distance: non-negative, zero on the triangle itself,
    /// invariant under vertex relabeling and bounded by any vertex distance.
    #[test]
    fn point_triangle_distance_geometry(
        p in prop::array::uniform3(-2.0f64..2.0),
        a in prop::array::uniform3(-1.0f64..1.0),
        b in prop::array::uniform3(-1.0f64..1.0),
        c in prop::array::uniform3(-1.0f64..1.0),
        bary in (0.0f64..1.0, 0.0f64..1.0),
    ) {
        let (p, a, b, c) = (
            Vector3::from(p),
            Vector3::from(a),
            Vector3::from(b),
            Vector3::from(c),
        );
        let d = point_triangle_distance(&p, &a, &b, &c);
        prop_assert!(d >= 0.0 && d.is_finite());
        prop_assert!(
            (d - point_triangle_distance(&p, &c, &a, &b)).abs() <= 1e-12,
            "distance changed under vertex relabeling"
        );
        prop_assert!(d <= (p - a).norm() + 1e-14, "farther than a vertex");

        // a convex combination of the vertices lies on the triangle
        let (u, v) = bary;
        let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
        let on = a + u * (b - a) + v * (c - a);
        prop_assert!(
            point_triangle_distance(&on, &a, &b, &c) <= 1e-12,
            "interior point reported off the triangle"
        );
    }
}
