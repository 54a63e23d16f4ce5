//! Spherical Bessel functions `j_l` of orders 0..=3, their derivatives, and
//! the positive zeros of `d/dx j_l` — the Neumann eigen-wavenumbers of the
//! unit ball.
//!
//! Closed trigonometric forms are used except near the origin, where they
//! cancel catastrophically; there the ascending series
//! `j_l(x) = Σ_m (-1)^m x^{2m+l} / (2^m m! (2l+2m+1)!!)` takes over.

/// Largest supported order of `spherical_j`/`spherical_dj`.
pub const MAX_ORDER: usize = 3;

/// Switch point below which `j1`/`dj1` use their Taylor branch.
const J1_SERIES_CUTOFF: f64 = 1e-2;

/// Switch point below which higher orders use the ascending series.
const SERIES_CUTOFF: f64 = 0.5;

/// Spherical Bessel function `j1(x) = sin x / x² - cos x / x`.
///
/// Below `|x| = 1e-2` the Taylor branch `x/3 - x³/30 + x⁵/840 - x⁷/45360`
/// is used; the two branches agree to better than 1e-10 at the switch.
pub fn j1(x: f64) -> f64 {
    if x.abs() < J1_SERIES_CUTOFF {
        let x2 = x * x;
        return x * (1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 45360.0);
    }
    x.sin() / (x * x) - x.cos() / x
}

/// Derivative `j1'(x)`, with the Taylor branch
/// `1/3 - x²/10 + x⁴/168 - x⁶/6480` below `|x| = 1e-2`.
pub fn dj1(x: f64) -> f64 {
    if x.abs() < J1_SERIES_CUTOFF {
        let x2 = x * x;
        return 1.0 / 3.0 - x2 / 10.0 + x2 * x2 / 168.0 - x2 * x2 * x2 / 6480.0;
    }
    // j1' = j0 - (2/x) j1
    let j0 = x.sin() / x;
    j0 - 2.0 * j1(x) / x
}

/// Ascending series for `j_l`, accurate near the origin for any small `x`.
fn series_jl(l: usize, x: f64) -> f64 {
    // leading coefficient x^l / (2l+1)!!
    let mut lead = 1.0;
    let mut dfact = 1.0;
    for i in 0..l {
        lead *= x;
        dfact *= (2 * i + 3) as f64;
    }
    let mut term = lead / dfact;
    let mut sum = term;
    let x2 = x * x;
    for m in 1..40 {
        term *= -x2 / (2.0 * m as f64 * (2 * l + 2 * m + 1) as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Spherical Bessel function `j_l(x)` for `l ∈ {0, 1, 2, 3}`.
///
/// # Panics
/// Panics for orders above [`MAX_ORDER`].
pub fn spherical_j(l: usize, x: f64) -> f64 {
    assert!(l <= MAX_ORDER, "spherical order {l} unsupported (max {MAX_ORDER})");
    if l >= 2 && x.abs() < SERIES_CUTOFF {
        return series_jl(l, x);
    }
    match l {
        0 => {
            if x.abs() < J1_SERIES_CUTOFF {
                let x2 = x * x;
                1.0 - x2 / 6.0 + x2 * x2 / 120.0
            } else {
                x.sin() / x
            }
        }
        1 => j1(x),
        2 => {
            let (s, c) = x.sin_cos();
            (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x)
        }
        3 => {
            let (s, c) = x.sin_cos();
            let x2 = x * x;
            (15.0 / (x2 * x) - 6.0 / x) * s / x - (15.0 / x2 - 1.0) * c / x
        }
        _ => unreachable!(),
    }
}

/// Derivative `d/dx j_l(x)` for `l ∈ {0, 1, 2, 3}` via
/// `j_l' = j_{l-1} - (l+1)/x · j_l` (and `j_0' = -j_1`).
///
/// # Panics
/// Panics for orders above [`MAX_ORDER`].
pub fn spherical_dj(l: usize, x: f64) -> f64 {
    assert!(l <= MAX_ORDER, "spherical order {l} unsupported (max {MAX_ORDER})");
    match l {
        0 => -j1(x),
        1 => dj1(x),
        _ => {
            if x.abs() < SERIES_CUTOFF {
                if x == 0.0 {
                    return 0.0; // j_l ~ x^l with l ≥ 2, so the slope vanishes
                }
                return series_jl(l - 1, x) - (l as f64 + 1.0) / x * series_jl(l, x);
            }
            spherical_j(l - 1, x) - (l as f64 + 1.0) / x * spherical_j(l, x)
        }
    }
}

/// First `count` positive zeros of `d/dx j_l`, in increasing order.
///
/// A sign-change scan with step 0.1 brackets each root (skipping the trivial
/// stationary point at the origin), and bisection narrows the bracket to an
/// interval of width `≤ 1e-13`, so `|dj_l(root)| ≤ 1e-12` at every returned
/// root.
///
/// # Panics
/// Panics for orders above [`MAX_ORDER`] or `count == 0`.
pub fn zeros_of_dj(l: usize, count: usize) -> Vec<f64> {
    assert!(l <= MAX_ORDER, "spherical order {l} unsupported (max {MAX_ORDER})");
    assert!(count > 0, "requested zero count must be positive");
    let f = |x: f64| spherical_dj(l, x);
    let mut zeros = Vec::with_capacity(count);
    let step = 0.1;
    let mut a = 0.05;
    let mut fa = f(a);
    while zeros.len() < count {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa.signum() != fb.signum() {
            zeros.push(bisect(&f, a, b));
        }
        a = b;
        fa = fb;
        assert!(a < 1e4, "root scan for dj_{l} ran away");
    }
    zeros
}

/// Bisection on a bracketing interval, narrowed to width `1e-13`.
fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    assert!(fa.signum() != f(b).signum(), "bisection bracket does not change sign");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a < 1e-13 {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
