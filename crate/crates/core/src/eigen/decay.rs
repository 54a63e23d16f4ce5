//! Decay diagnostics of an eigenfunction near the left tip `(-1, 0)` of a
//! cusped domain: tip-neighborhood mass `I(R)` with its log-log slope, and
//! weighted integrals `W(α) = ∫ σ^{-2α} φ²` with `σ` the distance to the tip.

use super::{element_mass, EigenError, EigenPair};
use nalgebra::Vector2;
use serde::Serialize;

/// Tip-distance below which σ-integrals subdivide elements locally.
const NEAR_TIP: f64 = 0.25;

/// Local subdivision depth for σ-integrals near the tip.
const SUBDIV_DEPTH: usize = 2;

/// Decay measurements of an eigenfunction around the left cusp tip.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    /// Neighborhood radii, ascending.
    pub radii: Vec<f64>,
    /// `I(R) = ∫_{x1 < -1+R} φ²` in the pair's own measure.
    pub integrals: Vec<f64>,
    /// Least-squares slope of `log I(R)` against `log R`.
    pub slope: f64,
    /// Exponents of the σ-weighted integrals.
    pub alphas: Vec<f64>,
    /// `W(α) = ∫ σ^{-2α} φ²` in the pair's own measure.
    pub sigma_integrals: Vec<f64>,
}

fn sigma(p: &Vector2<f64>) -> f64 {
    ((p.x + 1.0).powi(2) + p.y * p.y).sqrt()
}

/// One-point σ-integral over a triangle, with local subdivision: evaluates
/// `area · w · σ(c)^(-2α) · φ(c)²` at centroids of the `4^depth` children.
fn sigma_accum(
    p: &[Vector2<f64>; 3],
    f: &[f64; 3],
    depth: usize,
    two_alpha: f64,
    weighted: bool,
    acc: &mut f64,
) {
    if depth == 0 {
        let area = 0.5 * (p[1] - p[0]).perp(&(p[2] - p[0]));
        let c = (p[0] + p[1] + p[2]) / 3.0;
        let fc = (f[0] + f[1] + f[2]) / 3.0;
        let w = if weighted { c.x } else { 1.0 };
        *acc += area * w * sigma(&c).powf(-two_alpha) * fc * fc;
        return;
    }
    let m01 = (p[0] + p[1]) / 2.0;
    let m12 = (p[1] + p[2]) / 2.0;
    let m20 = (p[2] + p[0]) / 2.0;
    let f01 = (f[0] + f[1]) / 2.0;
    let f12 = (f[1] + f[2]) / 2.0;
    let f20 = (f[2] + f[0]) / 2.0;
    sigma_accum(&[p[0], m01, m20], &[f[0], f01, f20], depth - 1, two_alpha, weighted, acc);
    sigma_accum(&[m01, p[1], m12], &[f01, f[1], f12], depth - 1, two_alpha, weighted, acc);
    sigma_accum(&[m20, m12, p[2]], &[f20, f12, f[2]], depth - 1, two_alpha, weighted, acc);
    sigma_accum(&[m01, m12, m20], &[f01, f12, f20], depth - 1, two_alpha, weighted, acc);
}

/// Measures the decay of `φ²` mass into the left tip.
///
/// `radii` must hold at least four values in `(0, 1)` spanning a decade;
/// `I(R)` sums exact element integrals of `φ²` over elements contained in
/// `{x1 < -1 + R}`, so the values are monotone by construction. The smallest
/// radius must contain at least three full element bands, otherwise the mesh
/// cannot resolve it and a resolution error is raised.
pub fn decay_report(
    pair: &EigenPair,
    radii: &[f64],
    alphas: &[f64],
) -> Result<DecayReport, EigenError> {
    if radii.len() < 4 {
        return Err(EigenError::Invalid(format!(
            "{} radii given but at least 4 are needed for a slope fit",
            radii.len()
        )));
    }
    let mut radii: Vec<f64> = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    if !(radii[0] > 0.0 && *radii.last().unwrap() < 1.0) {
        return Err(EigenError::Invalid("radii must lie strictly inside (0, 1)".into()));
    }
    if radii.last().unwrap() / radii[0] < 10.0 * (1.0 - 1e-12) {
        return Err(EigenError::Invalid(format!(
            "radii {:.3}..{:.3} span less than a decade",
            radii[0],
            radii.last().unwrap()
        )));
    }
    for a in alphas {
        if !(a.is_finite() && *a > 0.0) {
            return Err(EigenError::Invalid(format!("sigma exponent {a} must be positive")));
        }
    }

    let mesh = pair.mesh();
    let phi = pair.phi();
    let weighted = pair.weighted();
    // exact per-element ∫ φ² and the rightmost vertex abscissa
    let mut cell_mass = Vec::with_capacity(mesh.triangles().len());
    let mut cell_max_x = Vec::with_capacity(mesh.triangles().len());
    for tri in mesh.triangles() {
        let p = [mesh.nodes()[tri[0]], mesh.nodes()[tri[1]], mesh.nodes()[tri[2]]];
        let f = [phi[tri[0]], phi[tri[1]], phi[tri[2]]];
        let me = element_mass(&p, weighted);
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += f[i] * me[i][j] * f[j];
            }
        }
        cell_mass.push(s);
        cell_max_x.push(p[0].x.max(p[1].x).max(p[2].x));
    }

    // the smallest radius must contain at least 3 complete element bands
    let r_min = radii[0];
    let mut bands: Vec<f64> = cell_max_x
        .iter()
        .copied()
        .filter(|&x| x < -1.0 + r_min + 1e-14)
        .collect();
    bands.sort_by(f64::total_cmp);
    bands.dedup_by(|a, b| (*a - *b).abs() <= 1e-13);
    if bands.len() < 3 {
        return Err(EigenError::Resolution(format!(
            "only {} element bands inside the smallest radius {r_min}",
            bands.len()
        )));
    }

    let integrals: Vec<f64> = radii
        .iter()
        .map(|&r| {
            cell_max_x
                .iter()
                .zip(&cell_mass)
                .filter(|(&x, _)| x < -1.0 + r + 1e-14)
                .map(|(_, &m)| m)
                .sum()
        })
        .collect();
    for (r, i) in radii.iter().zip(&integrals) {
        if !(i.is_finite() && *i > 0.0) {
            return Err(EigenError::Resolution(format!(
                "tip mass I({r}) = {i} is not positive; mesh too coarse"
            )));
        }
    }

    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = integrals.iter().map(|i| i.ln()).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - xm) * (y - ym);
        den += (x - xm) * (x - xm);
    }
    let slope = num / den;
    if !slope.is_finite() {
        return Err(EigenError::Resolution(format!("slope fit degenerated to {slope}")));
    }

    let sigma_integrals: Vec<f64> = alphas
        .iter()
        .map(|&alpha| {
            let mut acc = 0.0;
            for tri in mesh.triangles() {
                let p = [mesh.nodes()[tri[0]], mesh.nodes()[tri[1]], mesh.nodes()[tri[2]]];
                let f = [phi[tri[0]], phi[tri[1]], phi[tri[2]]];
                let near = p.iter().map(sigma).fold(f64::INFINITY, f64::min) < NEAR_TIP;
                let depth = if near { SUBDIV_DEPTH } else { 0 };
                sigma_accum(&p, &f, depth, 2.0 * alpha, weighted, &mut acc);
            }
            acc
        })
        .collect();

    Ok(DecayReport {
        radii,
        integrals,
        slope,
        alphas: alphas.to_vec(),
        sigma_integrals,
    })
}
