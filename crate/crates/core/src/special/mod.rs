//! Wave kernels and special functions.
//!
//! Everything downstream of this module speaks in terms of the outgoing
//! free-space kernel `Φ(x, y) = e^{ik|x-y|} / (4π|x-y|)` and its half-space
//! sibling
//!
//! ```text
//! G(x, y) = Φ(x, y) + Φ(x, ȳ),        ȳ = (y1, y2, -y3),
//! ```
//!
//! which satisfies `∂G/∂x3 = 0` on the plane `x3 = 0` (method of images for a
//! traction-free surface). The 2-D analogues use the Hankel function
//! `H0 = J0 + iY0` of the first kind.
//!
//! The module also carries the spherical Bessel functions `j_l` of low order,
//! root finding for their derivatives (the Neumann eigen-wavenumbers of the
//! unit ball), and the interior eigenfunction
//! `ψ(p) = j1(k1 |p|) · p3/|p|` associated with the first positive zero `k1`
//! of `j1'`.

mod cylindrical;
mod spherical;

pub use cylindrical::{bessel_j0, bessel_j1, bessel_y0, bessel_y1, hankel0, hankel1};
pub use spherical::{dj1, j1, spherical_dj, spherical_j, zeros_of_dj};

use nalgebra::Vector3;
use num_complex::Complex64;

/// Frequency bundle: the reference wavenumber `k0` and the sweep parameter
/// `t`, combined into the effective wavenumber `k = t·k0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveContext {
    k0: f64,
    t: f64,
}

impl WaveContext {
    /// Context with reference wavenumber `k0` scaled by `t`.
    ///
    /// # Panics
    /// Panics unless `k0 > 0`, `t > 0` and both are finite.
    pub fn new(k0: f64, t: f64) -> Self {
        assert!(k0.is_finite() && k0 > 0.0, "reference wavenumber must be positive");
        assert!(t.is_finite() && t > 0.0, "frequency scale must be positive");
        WaveContext { k0, t }
    }

    /// Context pinned directly at wavenumber `k` (i.e. `t = 1`).
    pub fn from_wavenumber(k: f64) -> Self {
        WaveContext::new(k, 1.0)
    }

    /// Reference wavenumber `k0`.
    pub fn k0(&self) -> f64 {
        self.k0
    }

    /// Frequency scale `t`.
    pub fn t(&self) -> f64 {
        self.t
    }

    /// Effective wavenumber `k = t·k0`.
    pub fn k(&self) -> f64 {
        self.t * self.k0
    }
}

/// Mirror of a point across the free surface `x3 = 0`.
pub fn mirror(p: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(p.x, p.y, -p.z)
}

/// Outgoing free-space kernel `Φ(x, y) = e^{ikr}/(4πr)`, `r = |x - y|`.
///
/// # Panics
/// Panics when `x == y` (the kernel is singular there).
pub fn phi_free(ctx: &WaveContext, x: &Vector3<f64>, y: &Vector3<f64>) -> Complex64 {
    let r = (x - y).norm();
    assert!(r > 0.0, "free-space kernel evaluated on its singularity");
    let k = ctx.k();
    Complex64::from_polar(1.0 / (4.0 * std::f64::consts::PI * r), k * r)
}

/// Half-space kernel `G(x, y) = Φ(x, y) + Φ(x, ȳ)` with `∂G/∂x3 = 0` on
/// `x3 = 0`.
///
/// # Panics
/// Panics when `x == y` or `x == ȳ`.
pub fn greens_halfspace(ctx: &WaveContext, x: &Vector3<f64>, y: &Vector3<f64>) -> Complex64 {
    phi_free(ctx, x, y) + phi_free(ctx, x, &mirror(y))
}

/// Gradient of `Φ` with respect to its first argument, evaluated at `d = x - y`:
/// `∇Φ(d) = Φ'(r)·d/r` with `Φ'(r) = (ik - 1/r)Φ(r)`.
fn grad_phi(k: f64, d: &Vector3<f64>) -> Vector3<Complex64> {
    let r = d.norm();
    debug_assert!(r > 0.0);
    let phi = Complex64::from_polar(1.0 / (4.0 * std::f64::consts::PI * r), k * r);
    let dphi = Complex64::new(-1.0 / r, k) * phi;
    let scale = dphi / r;
    Vector3::new(scale * d.x, scale * d.y, scale * d.z)
}

/// Gradient of the half-space kernel in the source point `y`:
/// `∇_y G(x, y) = -∇Φ(x - y) - M ∇Φ(x - ȳ)` with `M = diag(1, 1, -1)`.
///
/// # Panics
/// Panics when `x == y` or `x == ȳ`.
pub fn grad_y_greens_halfspace(
    ctx: &WaveContext,
    x: &Vector3<f64>,
    y: &Vector3<f64>,
) -> Vector3<Complex64> {
    let k = ctx.k();
    let d = x - y;
    let dm = x - mirror(y);
    assert!(d.norm() > 0.0 && dm.norm() > 0.0, "kernel gradient on its singularity");
    let g = grad_phi(k, &d);
    let gm = grad_phi(k, &dm);
    // -g - M gm, where M flips the third component.
    Vector3::new(-g.x - gm.x, -g.y - gm.y, -g.z + gm.z)
}

/// Gradient of the free-space kernel in the source point:
/// `∇_y Φ(x, y) = -∇Φ(x - y)`.
///
/// # Panics
/// Panics when `x == y`.
pub fn grad_y_phi_free(ctx: &WaveContext, x: &Vector3<f64>, y: &Vector3<f64>) -> Vector3<Complex64> {
    let d = x - y;
    assert!(d.norm() > 0.0, "kernel gradient on its singularity");
    let g = grad_phi(ctx.k(), &d);
    Vector3::new(-g.x, -g.y, -g.z)
}

/// Hessian of `Φ` at `d = x - y`, returned as the pair `(a, b)` such that
/// `H = a · (d̂ ⊗ d̂) + b · I`; `a = Φ'' - Φ'/r`, `b = Φ'/r`.
fn hessian_phi_parts(k: f64, d: &Vector3<f64>) -> (Complex64, Complex64, Vector3<f64>) {
    let r = d.norm();
    debug_assert!(r > 0.0);
    let phi = Complex64::from_polar(1.0 / (4.0 * std::f64::consts::PI * r), k * r);
    let ikm = Complex64::new(-1.0 / r, k);
    let dphi = ikm * phi;
    let d2phi = (ikm * ikm + Complex64::new(1.0 / (r * r), 0.0)) * phi;
    let b = dphi / r;
    let a = d2phi - b;
    (a, b, d / r)
}

/// Gradient in the observation point `x` of the double-layer kernel
/// `∂G/∂n(y) = ∇_y G(x, y)·n`:
///
/// `∇_x [∇_y G · n] = -H(x - y)·n - H(x - ȳ)·(M n)`,
///
/// with `H` the Hessian of `Φ` and `M = diag(1, 1, -1)`.
///
/// # Panics
/// Panics when `x == y` or `x == ȳ`.
pub fn grad_x_dny_greens_halfspace(
    ctx: &WaveContext,
    x: &Vector3<f64>,
    y: &Vector3<f64>,
    n: &Vector3<f64>,
) -> Vector3<Complex64> {
    let k = ctx.k();
    let d = x - y;
    let dm = x - mirror(y);
    assert!(d.norm() > 0.0 && dm.norm() > 0.0, "kernel gradient on its singularity");
    let mn = Vector3::new(n.x, n.y, -n.z);

    let mut out = Vector3::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for (dd, nn) in [(d, *n), (dm, mn)] {
        let (a, b, dhat) = hessian_phi_parts(k, &dd);
        let dn = dhat.dot(&nn);
        // H n = a (d̂·n) d̂ + b n
        out.x -= a * (dn * dhat.x) + b * nn.x;
        out.y -= a * (dn * dhat.y) + b * nn.y;
        out.z -= a * (dn * dhat.z) + b * nn.z;
    }
    out
}

/// Gradient in the observation point `x` of the free-space double-layer
/// kernel `∂Φ/∂n(y)`: `∇_x [∇_y Φ · n] = -H(x - y)·n`.
///
/// # Panics
/// Panics when `x == y`.
pub fn grad_x_dny_phi_free(
    ctx: &WaveContext,
    x: &Vector3<f64>,
    y: &Vector3<f64>,
    n: &Vector3<f64>,
) -> Vector3<Complex64> {
    let d = x - y;
    assert!(d.norm() > 0.0, "kernel gradient on its singularity");
    let (a, b, dhat) = hessian_phi_parts(ctx.k(), &d);
    let dn = dhat.dot(n);
    Vector3::new(
        -(a * (dn * dhat.x) + b * n.x),
        -(a * (dn * dhat.y) + b * n.y),
        -(a * (dn * dhat.z) + b * n.z),
    )
}

/// Interior eigenfunction of the unit ball with zero normal derivative on the
/// sphere: `ψ(p) = j1(k1 |p|) · p3/|p|`, where `k1` is the first positive
/// zero of `j1'`. Continuous at the origin with `ψ(p) → k1·p3/3`.
pub fn psi_ball(p: &Vector3<f64>, k1: f64) -> f64 {
    let r = p.norm();
    if r < 1e-12 {
        return k1 * p.z / 3.0;
    }
    j1(k1 * r) * p.z / r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn free_space_kernel_matches_direct_evaluation() {
        // k = 2.5, r = 0.3: e^{i·0.75}/(4π·0.3), evaluated independently.
        let ctx = WaveContext::from_wavenumber(2.5);
        let x = Vector3::new(0.1, -0.2, -1.0);
        let dir = Vector3::new(2.0, -1.0, 2.0) / 3.0;
        let y = x - 0.3 * dir;
        let got = phi_free(&ctx, &x, &y);
        let scale = 1.0 / (4.0 * std::f64::consts::PI * 0.3);
        assert_relative_eq!(got.re, scale * 0.75f64.cos(), max_relative = 1e-14);
        assert_relative_eq!(got.im, scale * 0.75f64.sin(), max_relative = 1e-14);
    }

    #[test]
    fn half_space_kernel_has_zero_vertical_derivative_on_surface() {
        // Central difference of G across the plane x3 = 0 vanishes.
        let ctx = WaveContext::from_wavenumber(1.7);
        let y = Vector3::new(0.4, -0.3, -2.0);
        for (sx, sy) in [(0.0, 0.0), (1.2, -0.6), (-2.5, 0.8)] {
            let h = 1e-5;
            let up = greens_halfspace(&ctx, &Vector3::new(sx, sy, h), &y);
            let dn = greens_halfspace(&ctx, &Vector3::new(sx, sy, -h), &y);
            let deriv = (up - dn).norm() / (2.0 * h);
            let scale = greens_halfspace(&ctx, &Vector3::new(sx, sy, 0.0), &y).norm();
            assert!(deriv <= 1e-8 * scale, "d3 G = {deriv:.3e} vs scale {scale:.3e}");
        }
    }

    #[test]
    fn kernel_gradients_match_finite_differences() {
        let ctx = WaveContext::from_wavenumber(2.1);
        let x = Vector3::new(0.3, 0.7, -1.4);
        let y = Vector3::new(-0.2, 0.1, -2.3);
        let h = 1e-6;

        let g = grad_y_greens_halfspace(&ctx, &x, &y);
        for i in 0..3 {
            let mut e = Vector3::zeros();
            e[i] = h;
            let fd = (greens_halfspace(&ctx, &x, &(y + e)) - greens_halfspace(&ctx, &x, &(y - e)))
                / Complex64::new(2.0 * h, 0.0);
            assert!((g[i] - fd).norm() <= 1e-6 * g[i].norm().max(1.0), "component {i}");
        }

        let n = Vector3::new(0.1, -0.3, 0.9).normalize();
        let gx = grad_x_dny_greens_halfspace(&ctx, &x, &y, &n);
        for i in 0..3 {
            let mut e = Vector3::zeros();
            e[i] = h;
            let kp = grad_y_greens_halfspace(&ctx, &(x + e), &y).dot(&n.map(|v| Complex64::new(v, 0.0)));
            let km = grad_y_greens_halfspace(&ctx, &(x - e), &y).dot(&n.map(|v| Complex64::new(v, 0.0)));
            let fd = (kp - km) / Complex64::new(2.0 * h, 0.0);
            assert!((gx[i] - fd).norm() <= 1e-5 * gx[i].norm().max(1.0), "component {i}");
        }
    }

    #[test]
    fn psi_is_smooth_at_origin_and_odd_in_x3() {
        let k1 = zeros_of_dj(1, 1)[0];
        assert!(approx_eq(psi_ball(&Vector3::new(0.0, 0.0, 1e-9), k1), k1 / 3.0 * 1e-9, 1e-6));
        let p = Vector3::new(0.3, -0.2, 0.5);
        let q = Vector3::new(0.3, -0.2, -0.5);
        assert_relative_eq!(psi_ball(&p, k1), -psi_ball(&q, k1), max_relative = 1e-14);
    }

    #[test]
    fn psi_satisfies_helmholtz_with_order_two_stencil_decay() {
        // (Δ + k1²)ψ = 0 checked by the 7-point Laplacian at interior points;
        // halving h divides the residual by about 4.
        let k1 = zeros_of_dj(1, 1)[0];
        let pts = [
            Vector3::new(0.2, 0.1, 0.3),
            Vector3::new(-0.4, 0.2, -0.1),
            Vector3::new(0.1, -0.5, 0.4),
        ];
        for p in pts {
            let resid = |h: f64| {
                let mut lap = -6.0 * psi_ball(&p, k1);
                for i in 0..3 {
                    let mut e = Vector3::zeros();
                    e[i] = h;
                    lap += psi_ball(&(p + e), k1) + psi_ball(&(p - e), k1);
                }
                (lap / (h * h) + k1 * k1 * psi_ball(&p, k1)).abs()
            };
            let r1 = resid(1e-2);
            let r2 = resid(5e-3);
            let order = (r1 / r2).log2();
            assert!(r1 < 1e-3, "stencil residual too large: {r1:.3e}");
            assert!((order - 2.0).abs() < 0.3, "observed order {order:.2}");
        }
    }

    #[test]
    fn psi_normal_derivative_vanishes_on_unit_sphere() {
        // dψ/dr on |p| = 1 is j1'(k1) · cosθ = 0 by the choice of k1.
        let k1 = zeros_of_dj(1, 1)[0];
        for (u, v) in [(0.3f64, 0.1f64), (0.7, -0.4), (0.05, 0.9)] {
            let w = (1.0 - u * u - v * v).max(0.0).sqrt();
            let p = Vector3::new(u, v, w);
            let h = 1e-6;
            let outer = psi_ball(&(p * (1.0 + h)), k1);
            let inner = psi_ball(&(p * (1.0 - h)), k1);
            assert!((outer - inner).abs() / (2.0 * h) < 1e-9);
        }
    }
}
