//! Geometry recovery by projected misfit descent: for each candidate set of
//! the seven geometry parameters (center, two tilts, two half-widths) the
//! density coefficients are eliminated exactly by least squares, and a
//! Nelder–Mead simplex walks the remaining seven-dimensional landscape.
//! Deterministic for a fixed seed: restart simplexes draw their jitter from
//! a counter-seeded ChaCha stream.

use super::{fit_density, DensityFit, InversionError, InversionSpec, PlanarCrackParams};
use crate::potential::QuadratureConfig;
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Number of free geometry parameters.
const DIM: usize = 7;

/// Relative simplex size of the first restart; later restarts shrink by
/// [`RESTART_SHRINK`].
const FIRST_STEP: f64 = 0.05;

/// Geometric factor between successive restart simplex sizes.
const RESTART_SHRINK: f64 = 0.4;

/// Maximum number of simplex restarts around the incumbent best point.
const MAX_RESTARTS: usize = 6;

/// Misfit spread below which a simplex counts as converged.
const F_TOL: f64 = 1e-15;

/// Simplex diameter below which a simplex counts as converged.
const X_TOL: f64 = 1e-11;

/// Relative misfit at the floating-point noise floor; reaching it ends the
/// search outright instead of polishing further.
const SUCCESS_F: f64 = 1e-14;

/// Result of a geometry fit: the best parameters found, their misfit, and
/// the evaluation-by-evaluation trace.
#[derive(Debug, Clone)]
pub struct GeometryFit {
    /// Best geometry with its projected density coefficients.
    pub params: PlanarCrackParams,
    /// Relative misfit `‖A c − d‖ / ‖d‖` at the best geometry.
    pub misfit: f64,
    /// Best misfit after each evaluation (monotone non-increasing).
    pub history: Vec<f64>,
    pub evaluations: usize,
    /// False when the evaluation budget ran out before the simplex settled.
    pub converged: bool,
    pub seed: u64,
    pub budget: usize,
}

fn pack(p: &PlanarCrackParams) -> [f64; DIM] {
    [
        p.center.x,
        p.center.y,
        p.center.z,
        p.tilt[0],
        p.tilt[1],
        p.half_widths[0],
        p.half_widths[1],
    ]
}

fn unpack(theta: &[f64; DIM], template: &PlanarCrackParams) -> PlanarCrackParams {
    PlanarCrackParams {
        center: Vector3::new(theta[0], theta[1], theta[2]),
        tilt: [theta[3], theta[4]],
        half_widths: [theta[5], theta[6]],
        modes: template.modes,
        coeffs: template.coeffs.clone(),
    }
}

/// Projected misfit of one geometry candidate; infeasible geometries
/// (non-positive widths, patches crossing the free surface, rank collapse)
/// score infinity so the simplex backs away from them.
fn projected_misfit(
    theta: &[f64; DIM],
    spec: &InversionSpec,
    template: &PlanarCrackParams,
    cells: usize,
    q: &QuadratureConfig,
) -> (f64, Option<DensityFit>) {
    let p = unpack(theta, template);
    if !(p.half_widths[0] > 0.0 && p.half_widths[1] > 0.0 && p.center.z < 0.0) {
        return (f64::INFINITY, None);
    }
    let Ok(mesh) = p.mesh(cells) else {
        return (f64::INFINITY, None);
    };
    let Ok(basis) = p.basis(&mesh) else {
        return (f64::INFINITY, None);
    };
    match fit_density(&mesh, &basis, &spec.ctx, &spec.data, q) {
        Ok(fit) if fit.relative_residual.is_finite() && !fit.ill_posed => {
            let f = fit.relative_residual;
            (f, Some(fit))
        }
        _ => (f64::INFINITY, None),
    }
}

/// Budgeted misfit evaluator that tracks the incumbent best.
struct Evaluator<'a> {
    spec: &'a InversionSpec,
    template: &'a PlanarCrackParams,
    cells: usize,
    q: &'a QuadratureConfig,
    evaluations: usize,
    history: Vec<f64>,
    best_f: f64,
    best_theta: [f64; DIM],
    best_fit: Option<DensityFit>,
}

impl Evaluator<'_> {
    /// Evaluates one candidate; `None` once the budget is spent.
    fn eval(&mut self, theta: &[f64; DIM]) -> Option<f64> {
        if self.evaluations >= self.spec.budget {
            return None;
        }
        self.evaluations += 1;
        let (f, fit) = projected_misfit(theta, self.spec, self.template, self.cells, self.q);
        if f < self.best_f {
            self.best_f = f;
            self.best_theta = *theta;
            self.best_fit = fit;
        }
        self.history.push(self.best_f);
        Some(f)
    }
}

/// One Nelder–Mead run from the given start simplex until the simplex
/// settles or the budget runs out; returns whether it settled.
fn nelder_mead(ev: &mut Evaluator<'_>, simplex: &mut Vec<([f64; DIM], f64)>) -> Option<bool> {
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 <= SUCCESS_F {
            return Some(true);
        }
        let spread = simplex[DIM].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() <= F_TOL * (1.0 + simplex[0].1.abs()) && diameter <= X_TOL {
            return Some(true);
        }

        let mut centroid = [0.0; DIM];
        for (x, _) in &simplex[..DIM] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / DIM as f64;
            }
        }
        let worst = simplex[DIM];
        let blend = |s: f64| {
            let mut x = [0.0; DIM];
            for i in 0..DIM {
                x[i] = centroid[i] + s * (centroid[i] - worst.0[i]);
            }
            x
        };

        let xr = blend(1.0);
        let fr = ev.eval(&xr)?;
        if fr < simplex[0].1 {
            let xe = blend(2.0);
            let fe = ev.eval(&xe)?;
            simplex[DIM] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[DIM - 1].1 {
            simplex[DIM] = (xr, fr);
            continue;
        }
        let contracted = if fr < worst.1 {
            let xc = blend(0.5);
            let fc = ev.eval(&xc)?;
            (fc <= fr).then_some((xc, fc))
        } else {
            let xc = blend(-0.5);
            let fc = ev.eval(&xc)?;
            (fc < worst.1).then_some((xc, fc))
        };
        if let Some(better) = contracted {
            simplex[DIM] = better;
            continue;
        }
        // shrink toward the best vertex
        let best = simplex[0].0;
        for i in 1..=DIM {
            let mut x = [0.0; DIM];
            for j in 0..DIM {
                x[j] = best[j] + 0.5 * (simplex[i].0[j] - best[j]);
            }
            let f = ev.eval(&x)?;
            simplex[i] = (x, f);
        }
    }
}

/// Fits the seven geometry parameters of a planar crack to the spec's data
/// by restarted Nelder–Mead with the density eliminated per candidate.
///
/// Deterministic given `seed` and the initial guess. When the budget runs
/// out the best parameters so far come back with `converged: false`.
pub fn fit_geometry(
    spec: &InversionSpec,
    init: &PlanarCrackParams,
    cells: usize,
    q: &QuadratureConfig,
    seed: u64,
) -> Result<GeometryFit, InversionError> {
    spec.validate()?;
    init.validate()?;
    if spec.budget == 0 {
        return Err(InversionError::Invalid("optimizer budget must be positive".into()));
    }
    if cells == 0 {
        return Err(InversionError::Invalid("patch mesh needs at least one cell".into()));
    }

    let mut ev = Evaluator {
        spec,
        template: init,
        cells,
        q,
        evaluations: 0,
        history: Vec::new(),
        best_f: f64::INFINITY,
        best_theta: pack(init),
        best_fit: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut converged = false;

    'restarts: for restart in 0..=MAX_RESTARTS {
        let origin = ev.best_theta;
        let step = FIRST_STEP * RESTART_SHRINK.powi(restart as i32);
        let Some(f0) = ev.eval(&origin) else { break };
        let mut simplex = vec![(origin, f0)];
        for i in 0..DIM {
            let mut x = origin;
            let jitter = 1.0 + 0.25 * rng.gen_range(-1.0..1.0);
            x[i] += step * jitter * x[i].abs().max(0.5);
            let Some(f) = ev.eval(&x) else { break 'restarts };
            simplex.push((x, f));
        }
        match nelder_mead(&mut ev, &mut simplex) {
            Some(true) => converged = true,
            _ => break,
        }
        if ev.best_f <= SUCCESS_F {
            break;
        }
    }

    if !ev.best_f.is_finite() {
        return Err(InversionError::Invalid(
            "no feasible geometry candidate within the budget".into(),
        ));
    }
    let mut params = unpack(&ev.best_theta, init);
    if let Some(fit) = &ev.best_fit {
        params.coeffs = fit.coeffs.clone();
    }
    Ok(GeometryFit {
        params,
        misfit: ev.best_f,
        history: ev.history,
        evaluations: ev.evaluations,
        converged,
        seed,
        budget: spec.budget,
    })
}

/// Joint relative misfit of one geometry against several observation sets
/// (one per frequency): `√(Σ rᵢ²) / √(Σ ‖dᵢ‖²)` with the density refit per
/// set. Infeasible geometries score infinity.
pub fn misfit_landscape(
    specs: &[InversionSpec],
    p: &PlanarCrackParams,
    cells: usize,
    q: &QuadratureConfig,
) -> Result<f64, InversionError> {
    if specs.is_empty() {
        return Err(InversionError::Invalid("no observation sets".into()));
    }
    for spec in specs {
        spec.validate()?;
    }
    p.validate()?;
    let mesh = match p.mesh(cells) {
        Ok(m) => m,
        Err(_) => return Ok(f64::INFINITY),
    };
    let basis = p.basis(&mesh)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for spec in specs {
        let fit = fit_density(&mesh, &basis, &spec.ctx, &spec.data, q)?;
        let dnorm: f64 = spec.data.values().iter().map(|v| v.norm_sqr()).sum();
        num += fit.residual * fit.residual;
        den += dnorm;
    }
    if den == 0.0 {
        return Err(InversionError::Invalid("all observation sets are zero".into()));
    }
    Ok((num / den).sqrt())
}

#[derive(Serialize)]
struct FitRecord<'a> {
    center: [f64; 3],
    tilt: [f64; 2],
    half_widths: [f64; 2],
    modes: usize,
    coeffs: Vec<[f64; 2]>,
    misfit: f64,
    history: &'a [f64],
    seed: u64,
    budget: usize,
    evaluations: usize,
    converged: bool,
}

/// Writes a [`GeometryFit`] as pretty-printed JSON: parameters, misfit
/// trace, seed and budget.
pub fn write_fit_json(
    fit: &GeometryFit,
    out: &mut dyn std::io::Write,
) -> Result<(), InversionError> {
    let p = &fit.params;
    let record = FitRecord {
        center: [p.center.x, p.center.y, p.center.z],
        tilt: p.tilt,
        half_widths: p.half_widths,
        modes: p.modes,
        coeffs: p.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        misfit: fit.misfit,
        history: &fit.history,
        seed: fit.seed,
        budget: fit.budget,
        evaluations: fit.evaluations,
        converged: fit.converged,
    };
    serde_json::to_writer_pretty(&mut *out, &record)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::forward_map;
    use super::*;
    use crate::potential::FieldSamples;
    use crate::special::WaveContext;
    use num_complex::Complex64;

    fn quad() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn plane_grid(n: usize, extent: f64) -> Vec<Vector3<f64>> {
        let step = 2.0 * extent / (n - 1) as f64;
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                pts.push(Vector3::new(
                    -extent + step * i as f64,
                    -extent + step * j as f64,
                    0.0,
                ));
            }
        }
        pts
    }

    fn truth() -> PlanarCrackParams {
        PlanarCrackParams::horizontal(Vector3::new(0.0, 0.0, -2.0), [0.5, 0.5])
    }

    fn spec_for(p: &PlanarCrackParams, k: f64, cells: usize, budget: usize) -> InversionSpec {
        let ctx = WaveContext::from_wavenumber(k);
        let pts = plane_grid(5, 2.0);
        InversionSpec {
            data: forward_map(p, &ctx, &pts, cells, &quad()).unwrap(),
            ctx,
            budget,
            noise: 0.0,
        }
    }

    #[test]
    fn starting_at_the_truth_converges_immediately() {
        let p = truth();
        let spec = spec_for(&p, 1.0, 4, 400);
        let fit = fit_geometry(&spec, &p, 4, &quad(), 42).unwrap();
        assert!(fit.converged);
        assert!(fit.misfit <= 1e-10, "misfit {}", fit.misfit);
        assert!(fit.history[0] <= 1e-10, "first evaluation {}", fit.history[0]);
        assert!(fit.evaluations < 200, "took {} evaluations", fit.evaluations);
    }

    #[test]
    fn a_detuned_start_recovers_the_geometry() {
        let p = truth();
        let spec = spec_for(&p, 1.0, 5, 1500);
        let init = p.perturbed(0.1, 42);
        let fit = fit_geometry(&spec, &init, 5, &quad(), 42).unwrap();
        assert!(fit.misfit <= 1e-6, "misfit {}", fit.misfit);
        let center_err = (fit.params.center - p.center).norm() / p.center.norm();
        assert!(center_err <= 0.01, "center error {center_err:.3e}");
        for i in 0..2 {
            let w_err =
                (fit.params.half_widths[i] - p.half_widths[i]).abs() / p.half_widths[i];
            assert!(w_err <= 0.01, "half-width {i} error {w_err:.3e}");
        }
        // the misfit trace is monotone non-increasing
        assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn the_fit_is_deterministic_in_the_seed() {
        let p = truth();
        let spec = spec_for(&p, 1.0, 4, 120);
        let init = p.perturbed(0.1, 9);
        let a = fit_geometry(&spec, &init, 4, &quad(), 42).unwrap();
        let b = fit_geometry(&spec, &init, 4, &quad(), 42).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.params, b.params);
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn an_exhausted_budget_returns_best_so_far_with_the_flag_down() {
        let p = truth();
        let spec = spec_for(&p, 1.0, 4, 25);
        let init = p.perturbed(0.1, 3);
        let fit = fit_geometry(&spec, &init, 4, &quad(), 42).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.evaluations, 25);
        assert!(fit.misfit.is_finite());
        assert!(fit.history.len() == 25);
    }

    #[test]
    fn a_second_frequency_steepens_the_depth_size_tradeoff() {
        let p = truth();
        let low = spec_for(&p, 0.5, 4, 1);
        let high = spec_for(&p, 2.5, 4, 1);

        // trade depth against size along the classic ambiguity direction
        let mut traded = p.clone();
        traded.center.z -= 0.12;
        traded.half_widths = [0.56, 0.56];

        let single = misfit_landscape(std::slice::from_ref(&low), &traded, 4, &quad()).unwrap();
        let joint =
            misfit_landscape(&[low.clone(), high.clone()], &traded, 4, &quad()).unwrap();
        assert!(
            joint >= single * (1.0 - 1e-12),
            "joint misfit {joint:.3e} is shallower than single-frequency {single:.3e}"
        );
        // and both vanish at the truth
        assert!(misfit_landscape(&[low, high], &p, 4, &quad()).unwrap() <= 1e-12);
    }

    #[test]
    fn fit_json_records_parameters_seed_and_budget() {
        let p = truth();
        let spec = spec_for(&p, 1.0, 3, 60);
        let fit = fit_geometry(&spec, &p, 3, &quad(), 7).unwrap();
        let mut buf = Vec::new();
        write_fit_json(&fit, &mut buf).unwrap();
        let parsed: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(parsed["seed"], 7);
        assert_eq!(parsed["budget"], 60);
        assert_eq!(parsed["center"][2], -2.0);
        assert!(parsed["history"].as_array().unwrap().len() >= 1);
    }

    #[test]
    fn degenerate_specs_are_rejected() {
        let p = truth();
        let mut spec = spec_for(&p, 1.0, 3, 0);
        assert!(matches!(
            fit_geometry(&spec, &p, 3, &quad(), 1),
            Err(InversionError::Invalid(_))
        ));
        spec.budget = 10;
        let empty = InversionSpec {
            data: FieldSamples::new3(&[], vec![], None),
            ctx: spec.ctx,
            budget: 10,
            noise: 0.0,
        };
        assert!(fit_geometry(&empty, &p, 3, &quad(), 1).is_err());
        let bad_init = PlanarCrackParams {
            coeffs: vec![Complex64::new(f64::NAN, 0.0)],
            ..PlanarCrackParams::horizontal(Vector3::new(0.0, 0.0, -2.0), [0.5, 0.5])
        };
        assert!(fit_geometry(&spec, &bad_init, 3, &quad(), 1).is_err());
    }
}
