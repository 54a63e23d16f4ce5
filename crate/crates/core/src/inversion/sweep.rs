//! Frequency sweep for crack distinguishability: at each probe frequency the
//! field radiated by a reference crack is fitted, by linear least squares,
//! with fields radiated from a candidate crack, and the relative residual
//! `ι(t)` is recorded. Frequencies where `ι` collapses are exactly the ones
//! at which boundary measurements cannot tell the two cracks apart; for a
//! split sphere those sit on the ladder of zeros of the derivative spherical
//! Bessel functions.

use super::{forward_matrix, least_squares, InversionError};
use crate::geometry::CrackMesh;
use crate::potential::{eval_double_layer_3d, DensityField, QuadratureConfig};
use crate::special::{zeros_of_dj, WaveContext};
use nalgebra::{DVector, Vector3};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;

/// Data norms below this are treated as degenerate rather than divided by.
const DEGENERATE_NORM: f64 = 1e-280;

/// Outcome of a frequency sweep: the residual curve, the dips it found, and
/// the predicted bad frequencies it was checked against.
#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Probe frequencies, strictly increasing.
    pub ts: Vec<f64>,
    /// Relative matching residual `ι(t) ≥ 0` per frequency.
    pub iotas: Vec<f64>,
    /// One representative frequency per contiguous run of `ι < threshold`.
    pub dips: Vec<f64>,
    /// Predicted indistinguishable frequencies, sorted.
    pub predicted: Vec<f64>,
    /// Dip-detection threshold the sweep ran with.
    pub threshold: f64,
}

impl SweepResult {
    /// Nearest predicted bad frequency to `t`, with the distance; `None`
    /// when no predictions were supplied.
    pub fn nearest_predicted(&self, t: f64) -> Option<(f64, f64)> {
        self.predicted
            .iter()
            .map(|&p| (p, (t - p).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Frequencies `t ≤ t_max` at which a sphere of the given radius admits an
/// interior eigenfield at wavenumber `t·k0`: the zeros of `d/dx j_l` for
/// `l = 0..=max_degree`, rescaled by `1/(k0·radius)` and sorted.
pub fn predicted_bad_set(k0: f64, radius: f64, t_max: f64, max_degree: usize) -> Vec<f64> {
    let x_max = k0 * radius * t_max;
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Vec::new();
    }
    let count = (x_max / PI).ceil() as usize + 2;
    let mut ts: Vec<f64> = (0..=max_degree)
        .flat_map(|l| zeros_of_dj(l, count))
        .filter(|&x| x <= x_max)
        .map(|x| x / (k0 * radius))
        .collect();
    ts.sort_by(f64::total_cmp);
    ts
}

/// Axially symmetric Legendre profiles `P_j((z − z_c)/radius)` for the given
/// degrees, sampled at the mesh vertices. These are the traces of zonal
/// interior eigenfields on a sphere about `center`; they deliberately skip
/// the rim-vanishing check, since even-degree profiles are nonzero there.
pub fn zonal_basis(
    mesh: &CrackMesh,
    center: &Vector3<f64>,
    radius: f64,
    degrees: &[usize],
) -> Result<Vec<DensityField>, InversionError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(InversionError::Invalid("zonal basis needs a positive radius".into()));
    }
    if degrees.is_empty() {
        return Err(InversionError::Invalid("zonal basis needs at least one degree".into()));
    }
    let xs: Vec<f64> = mesh
        .vertices()
        .iter()
        .map(|v| (v.z - center.z) / radius)
        .collect();
    degrees
        .iter()
        .map(|&j| {
            DensityField::unchecked(xs.iter().map(|&x| legendre(j, x).into()).collect())
                .map_err(InversionError::from)
        })
        .collect()
}

/// Legendre polynomial `P_j(x)` by the three-term recurrence.
fn legendre(j: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    match j {
        0 => 1.0,
        1 => x,
        _ => {
            for n in 1..j {
                let next = ((2 * n + 1) as f64 * x * cur - n as f64 * prev) / (n + 1) as f64;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Sweeps the probe frequency: at each `t` the field of `(crack1, g1)` is
/// matched on `pts` by the best density in the span of `basis2` on `crack2`,
/// and `ι(t)` is the relative residual of that fit.
///
/// Frequencies are processed independently (in parallel) and reduced in
/// order; a vanishing reference field is flagged, not divided by.
pub fn frequency_sweep(
    crack1: &CrackMesh,
    g1: &DensityField,
    crack2: &CrackMesh,
    basis2: &[DensityField],
    k0: f64,
    ts: &[f64],
    pts: &[Vector3<f64>],
    predicted: Vec<f64>,
    threshold: f64,
    q: &QuadratureConfig,
) -> Result<SweepResult, InversionError> {
    if !(k0 > 0.0 && k0.is_finite()) {
        return Err(InversionError::Invalid("base wavenumber must be positive".into()));
    }
    if ts.is_empty() {
        return Err(InversionError::Invalid("empty frequency grid".into()));
    }
    if !ts.iter().all(|t| t.is_finite() && *t > 0.0) || !ts.windows(2).all(|w| w[0] < w[1]) {
        return Err(InversionError::Invalid(
            "frequencies must be positive and strictly increasing".into(),
        ));
    }
    if pts.is_empty() {
        return Err(InversionError::Invalid("no observation points".into()));
    }
    if basis2.is_empty() || basis2.len() > pts.len() {
        return Err(InversionError::Invalid(
            "candidate basis must be non-empty and no larger than the observation set".into(),
        ));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(InversionError::Invalid("dip threshold must lie in (0, 1)".into()));
    }

    let iotas: Vec<f64> = ts
        .par_iter()
        .map(|&t| -> Result<f64, InversionError> {
            let ctx = WaveContext::new(k0, t);
            let data = eval_double_layer_3d(crack1, g1, &ctx, pts, q)?;
            let d = DVector::from_column_slice(data.values());
            let dnorm = d.norm();
            if !(dnorm > DEGENERATE_NORM) {
                return Err(InversionError::DegenerateData { t });
            }
            let a = forward_matrix(crack2, basis2, &ctx, pts, q)?;
            let (_, residual, _, _) = least_squares(&a, &d)?;
            Ok(residual / dnorm)
        })
        .collect::<Result<_, _>>()?;

    let mut dips = Vec::new();
    let mut run_best: Option<(f64, f64)> = None;
    for (&t, &iota) in ts.iter().zip(&iotas) {
        if iota < threshold {
            match &mut run_best {
                Some((best, at)) if iota < *best => {
                    *best = iota;
                    *at = t;
                }
                Some(_) => {}
                None => run_best = Some((iota, t)),
            }
        } else if let Some((_, at)) = run_best.take() {
            dips.push(at);
        }
    }
    if let Some((_, at)) = run_best {
        dips.push(at);
    }

    Ok(SweepResult {
        ts: ts.to_vec(),
        iotas,
        dips,
        predicted,
        threshold,
    })
}

/// Writes a sweep as CSV: `t,iota,predicted_bad_nearest,dist_to_predicted`,
/// one row per frequency, full-precision scientific notation.
pub fn write_sweep_csv(
    result: &SweepResult,
    out: &mut dyn Write,
) -> Result<(), InversionError> {
    writeln!(out, "t,iota,predicted_bad_nearest,dist_to_predicted")?;
    for (&t, &iota) in result.ts.iter().zip(&result.iotas) {
        let (nearest, dist) = result.nearest_predicted(t).unwrap_or((f64::NAN, f64::NAN));
        writeln!(out, "{t:.16e},{iota:.16e},{nearest:.16e},{dist:.16e}")?;
    }
    Ok(())
}
