//! Command-line front end for the crack laboratory: reproducible experiment
//! recipes that emit CSV/JSON artifacts plus a run manifest with content
//! hashes. Configuration precedence is CLI flags over config file over
//! defaults, and the effective configuration is echoed into the manifest.
//!
//! Exit codes: `0` success, `2` bad flags or config (nothing written),
//! `3` numerical or I/O failure while running the recipe.

use clap::{Args, Parser, Subcommand};
use cracklab::counterexample::{
    build_axisym_instance, build_cusp2d_instance, build_sphere_instance, cauchy_gap,
    write_gap_report_json, PlaneGrid,
};
use cracklab::eigen::cusp_eigenpair;
use cracklab::geometry::CuspDomainSpec;
use cracklab::inversion::{
    fit_geometry, forward_map, frequency_sweep, write_fit_json, write_sweep_csv, zonal_basis,
    InversionSpec, PlanarCrackParams,
};
use cracklab::potential::QuadratureConfig;
use cracklab::special::{zeros_of_dj, WaveContext};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

/// Observation half-width used by the `forward` and `invert` recipes.
const PATCH_EXTENT: f64 = 2.0;

/// Observation half-width used by the `sweep` recipe.
const SWEEP_EXTENT: f64 = 8.0;

/// Dip-detection threshold used by the `sweep` recipe.
const SWEEP_THRESHOLD: f64 = 0.05;

/// Optimizer evaluation budget used by the `invert` recipe.
const INVERT_BUDGET: usize = 2000;

#[derive(Parser)]
#[command(
    name = "cracklab",
    version,
    about = "Half-space crack laboratory: forward fields, eigen counterexamples, \
             inversion and frequency sweeps"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Radiate a horizontal unit-mode crack patch and record the surface field.
    #[command(name = "forward")]
    Forward(ForwardArgs),
    /// Split-sphere eigen pair: measure the surface Cauchy gap.
    #[command(name = "counterexample-sphere")]
    CounterexampleSphere(SphereArgs),
    /// Planar cusp eigen pair: measure the surface Cauchy gap in 2-D.
    #[command(name = "counterexample-cusp2d")]
    CounterexampleCusp2d(Cusp2dArgs),
    /// Revolved cusp eigen pair: measure the surface Cauchy gap.
    #[command(name = "counterexample-axisym")]
    CounterexampleAxisym(AxisymArgs),
    /// Solve the cusp-domain Neumann eigenproblem and report the eigenvalue.
    #[command(name = "eigen-cusp")]
    EigenCusp(EigenArgs),
    /// Round-trip geometry recovery from synthetic patch data.
    #[command(name = "invert")]
    Invert(InvertArgs),
    /// Frequency sweep of the split-sphere indistinguishability indicator.
    #[command(name = "sweep")]
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory for artifacts (default: current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed echoed into the manifest (default 42).
    #[arg(long)]
    seed: Option<u64>,
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ForwardArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Wavenumber of the radiated field (default 1.0).
    #[arg(long)]
    k: Option<f64>,
    /// Observation points per grid axis (default 21).
    #[arg(long)]
    grid: Option<usize>,
    /// Patch mesh cells per axis (default 8).
    #[arg(long)]
    refine: Option<usize>,
}

#[derive(Args)]
struct SphereArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Target wavenumber; the sphere is rescaled to keep it resonant
    /// (default: the resonant wavenumber of the unit sphere).
    #[arg(long)]
    k: Option<f64>,
    /// Observation points per grid axis (default 41).
    #[arg(long)]
    grid: Option<usize>,
    /// Hemisphere refinement level (default 4).
    #[arg(long)]
    refine: Option<usize>,
}

#[derive(Args)]
struct Cusp2dArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Cusp flatness parameter in (0, 1] (default 1.0).
    #[arg(long)]
    a: Option<f64>,
    /// Eigen mesh step (default 0.1).
    #[arg(long)]
    h: Option<f64>,
    /// Observation points per grid axis (default 41).
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct AxisymArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Profile mesh step (default 0.2).
    #[arg(long)]
    h: Option<f64>,
    /// Angular refinement level: 6·2^(refine−1) segments (default 3).
    #[arg(long)]
    refine: Option<usize>,
    /// Observation points per grid axis (default 21).
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct EigenArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Cusp flatness parameter in (0, 1] (default 1.0).
    #[arg(long)]
    a: Option<f64>,
    /// Eigen mesh step (default 0.05).
    #[arg(long)]
    h: Option<f64>,
}

#[derive(Args)]
struct InvertArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Wavenumber of the synthetic data (default 1.0).
    #[arg(long)]
    k: Option<f64>,
    /// Observation points per grid axis (default 5).
    #[arg(long)]
    grid: Option<usize>,
    /// Patch mesh cells per axis (default 5).
    #[arg(long)]
    refine: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Base wavenumber k0 (default 1.0).
    #[arg(long)]
    k: Option<f64>,
    /// Observation points per grid axis (default 21).
    #[arg(long)]
    grid: Option<usize>,
    /// Hemisphere refinement level (default 3).
    #[arg(long)]
    refine: Option<usize>,
    /// Lowest probe frequency (default 1.5).
    #[arg(long = "t-min")]
    t_min: Option<f64>,
    /// Highest probe frequency (default 5.0).
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    /// Probe frequency step (default 0.01).
    #[arg(long = "t-step")]
    t_step: Option<f64>,
}

/// On-disk config schema; every field optional, unknown fields rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    out: Option<PathBuf>,
    seed: Option<u64>,
    refine: Option<usize>,
    grid: Option<usize>,
    a: Option<f64>,
    h: Option<f64>,
    k: Option<f64>,
    t_min: Option<f64>,
    t_max: Option<f64>,
    t_step: Option<f64>,
    /// Zonal mode of the sweep pair (config-file only; default 1).
    mode: Option<usize>,
}

enum CliError {
    /// Bad flags or config: exit 2, nothing has been written.
    Schema(String),
    /// The recipe itself failed: exit 3.
    Run(String),
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Run(e.to_string())
    }
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let outcome = match &cli.cmd {
        Cmd::Forward(args) => run_forward(args, started),
        Cmd::CounterexampleSphere(args) => run_sphere(args, started),
        Cmd::CounterexampleCusp2d(args) => run_cusp2d(args, started),
        Cmd::CounterexampleAxisym(args) => run_axisym(args, started),
        Cmd::EigenCusp(args) => run_eigen(args, started),
        Cmd::Invert(args) => run_invert(args, started),
        Cmd::Sweep(args) => run_sweep(args, started),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Schema(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

/// Loads the optional config file; I/O or schema problems are exit-2 errors.
fn load_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| schema(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| schema(format!("{}: {e}", path.display())))
}

/// Flag > config file > default.
fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>, default: T) -> T {
    flag.clone().or_else(|| file.clone()).unwrap_or(default)
}

fn check(cond: bool, msg: &str) -> Result<(), CliError> {
    cond.then_some(()).ok_or_else(|| schema(msg.to_string()))
}

/// Collects artifacts in an output directory and hashes each one.
struct RunDir {
    dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    sha256: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    config: serde_json::Value,
    versions: Versions,
    wall_time_s: f64,
    artifacts: &'a [ManifestEntry],
}

#[derive(Serialize)]
struct Versions {
    cracklab: &'static str,
    cli: &'static str,
}

impl RunDir {
    fn create(dir: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&dir)?;
        Ok(RunDir { dir, entries: Vec::new() })
    }

    /// Writes one artifact and records its content hash.
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        std::fs::write(self.dir.join(name), bytes)?;
        let digest = Sha256::digest(bytes);
        let mut hex = String::with_capacity(64);
        for b in digest {
            write!(hex, "{b:02x}").expect("hex formatting");
        }
        self.entries.push(ManifestEntry {
            file: name.to_string(),
            sha256: hex,
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// Writes the run manifest; call last so every artifact is listed.
    fn finish(
        self,
        subcommand: &str,
        config: serde_json::Value,
        started: Instant,
    ) -> Result<(), CliError> {
        let manifest = Manifest {
            subcommand,
            config,
            versions: Versions { cracklab: cracklab::VERSION, cli: env!("CARGO_PKG_VERSION") },
            wall_time_s: started.elapsed().as_secs_f64(),
            artifacts: &self.entries,
        };
        let mut text = serde_json::to_vec_pretty(&manifest)?;
        text.push(b'\n');
        std::fs::write(self.dir.join("run_manifest.json"), text)?;
        Ok(())
    }
}

/// Square observation grid on the free surface, row-major with x fastest.
fn surface_grid(n: usize, extent: f64) -> Vec<Vector3<f64>> {
    let step = 2.0 * extent / (n - 1) as f64;
    let mut pts = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            pts.push(Vector3::new(
                -extent + step * i as f64,
                -extent + step * j as f64,
                0.0,
            ));
        }
    }
    pts
}

fn run_forward(args: &ForwardArgs, started: Instant) -> Result<(), CliError> {
    let file = load_config(args.common.config.as_deref())?;
    let out = pick(&args.common.out, &file.out, PathBuf::from("."));
    let seed = pick(&args.common.seed, &file.seed, 42);
    let k = pick(&args.k, &file.k, 1.0);
    let grid = pick(&args.grid, &file.grid, 21);
    let cells = pick(&args.refine, &file.refine, 8);
    check(k.is_finite() && k > 0.0, "k must be a positive finite wavenumber")?;
    check(grid >= 2, "grid needs at least 2 points per axis")?;
    check((1..=64).contains(&cells), "refine must lie in 1..=64")?;
    let config = serde_json::json!({
        "out": out, "seed": seed, "k": k, "grid": grid, "refine": cells,
        "extent": PATCH_EXTENT,
    });

    let params = PlanarCrackParams::horizontal(Vector3::new(0.0, 0.0, -2.0), [0.5, 0.5]);
    let ctx = WaveContext::from_wavenumber(k);
    let pts = surface_grid(grid, PATCH_EXTENT);
    let samples = forward_map(&params, &ctx, &pts, cells, &QuadratureConfig::default())?;

    let mut run = RunDir::create(out)?;
    let mut csv = Vec::new();
    samples.write_csv(&mut csv)?;
    run.put("samples.csv", &csv)?;
    run.finish("forward", config, started)
}

fn run_sphere(args: &SphereArgs, started: Instant) -> Result<(), CliError> {
    let file = load_config(args.common.config.as_deref())?;
    let out = pick(&args.common.out, &file.out, PathBuf::from("."));
    let seed = pick(&args.common.seed, &file.seed, 42);
    let grid = pick(&args.grid, &file.grid, 41);
    let refine = pick(&args.refine, &file.refine, 4);
    let k = args.k.or(file.k);
    check(grid >= 2, "grid needs at least 2 points per axis")?;
    check((1..=6).contains(&refine), "refine must lie in 1..=6")?;
    if let Some(k) = k {
        check(k.is_finite() && k > 0.0, "k must be a positive finite wavenumber")?;
    }
    let config = serde_json::json!({
        "out": out, "seed": seed, "grid": grid, "refine": refine, "k": k,
    });

    let inst = build_sphere_instance(k, refine)?;
    let radius = zeros_of_dj(1, 1)[0] / inst.ctx().k();
    let plane = PlaneGrid { n: grid, extent: 4.0 * radius };
    let report = cauchy_gap(&inst, &plane, &QuadratureConfig::default())?;

    let mut run = RunDir::create(out)?;
    let mut json = Vec::new();
    write_gap_report_json(&report, &mut json)?;
    run.put("gap.json", &json)?;
    run.finish("counterexample-sphere", config, started)
}

fn run_cusp2d(args: &Cusp2dArgs, started: Instant) -> Result<(), CliError> {
    let file = load_config(args.common.config.as_deref())?;
    let out = pick(&args.common.out, &file.out, PathBuf::from("."));
    let seed = pick(&args.common.seed, &file.seed, 42);
    let a = pick(&args.a, &file.a, 1.0);
    let h = pick(&args.h, &file.h, 0.1);
    let grid = pick(&args.grid, &file.grid, 41);
    check(a.is_finite() && a > 0.0 && a <= 1.0, "a must lie in (0, 1]")?;
    check(h.is_finite() && h > 0.0 && h <= 0.5, "h must lie in (0, 0.5]")?;
    check(grid >= 2, "grid needs at least 2 points per axis")?;
    let config = serde_json::json!({
        "out": out, "seed": seed, "a": a, "h": h, "grid": grid,
    });

    let inst = build_cusp2d_instance(a, h)?;
    let plane = PlaneGrid { n: grid, extent: 4.0 };
    let report = cauchy_gap(&inst, &plane, &QuadratureConfig::default())?;

    let mut run = RunDir::create(out)?;
    let mut json = Vec::new();
    write_gap_report_json(&report, &mut json)?;
    run.put("gap.json", &json)?;
    run.finish("counterexample-cusp2d", config, started)
}

fn run_axisym(args: &AxisymArgs, started: Instant) -> Result<(), CliError> {
    let file = load_config(args.common.config.as_deref())?;
    let out = pick(&args.common.out, &file.out, PathBuf::from("."));
    let seed = pick(&args.common.seed, &file.seed, 42);
    let h = pick(&args.h, &file.h, 0.2);
    let refine = pick(&args.refine, &file.refine, 3);
    let grid = pick(&args.grid, &file.grid, 21);
    check(h.is_finite() && h > 0.0 && h <= 0.5, "h must lie in (0, 0.5]")?;
    check((1..=6).contains(&refine), "refine must lie in 1..=6")?;
    check(grid >= 2, "grid needs at least 2 points per axis")?;
    let n_theta = 6 << (refine - 1);
    let config = serde_json::json!({
        "out": out, "seed": seed, "h": h, "refine": refine, "grid": grid,
        "n_theta": n_theta,
    });

    let inst = build_axisym_instance(h, n_theta)?;
    let plane = PlaneGrid { n: grid, extent: 4.0 };
    let report = cauchy_gap(&inst, &plane, &QuadratureConfig::default())?;

    let mut run = RunDir::create(out)?;
    let mut json = Vec::new();
    write_gap_report_json(&report, &mut json)?;
    run.put("gap.json", &json)?;
    run.finish("counterexample-axisym", config, started)
}

/// Eigenvalue record emitted by `eigen-cusp`.
#[derive(Serialize)]
struct EigenRecord {
    a: f64,
    h: f64,
    mu2: f64,
    k: f64,
    err_estimate: Option<f64>,
    dof: usize,
}

fn run_eigen(args: &EigenArgs, started: Instant) -> Result<(), CliError> {
    let file = load_config(args.common.config.as_deref())?;
    let out = pick(&args.common.out, &file.out, PathBuf::from("."));
    let seed = pick(&args.common.seed, &file.seed, 42);
    let a = pick(&args.a, &file.a, 1.0);
    let h = pick(&args.h, &file.h, 0.05);
    check(a.is_finite() && a > 0.0 && a <= 1.0, "a must lie in (0, 1]")?;
    check(h.is_finite() && h > 0.0 && h <= 0.5, "h must lie in (0, 0.5]")?;
    let config = serde_json::json!({ "out": out, "seed": seed, "a": a, "h": h });

    let spec = CuspDomainSpec::new(a, -2.0)?;
    let pair = cusp_eigenpair(&spec, h)?;
    let record = EigenRecord {
        a,
        h,
        mu2: pair.mu2(),
        k: pair.mu2().sqrt(),
        err_estimate: pair.err_estimate(),
        dof: pair.phi().len(),
    };

    let mut run = RunDir::create(out)?;
    let mut json = serde_json::to_vec_pretty(&record)?;
    json.push(b'\n');
    run.put("eigen.json", &json)?;
    run.finish("eigen-cusp", config, started)
}

fn run_invert(args: &InvertArgs, started: Instant) -> Result<(), CliError> {
    let file = load_config(args.common.config.as_deref())?;
    let out = pick(&args.common.out, &file.out, PathBuf::from("."));
    let seed = pick(&args.common.seed, &file.seed, 42);
    let k = pick(&args.k, &file.k, 1.0);
    let grid = pick(&args.grid, &file.grid, 5);
    let cells = pick(&args.refine, &file.refine, 5);
    check(k.is_finite() && k > 0.0, "k must be a positive finite wavenumber")?;
    check(grid >= 2, "grid needs at least 2 points per axis")?;
    check((1..=64).contains(&cells), "refine must lie in 1..=64")?;
    let config = serde_json::json!({
        "out": out, "seed": seed, "k": k, "grid": grid, "refine": cells,
        "budget": INVERT_BUDGET, "extent": PATCH_EXTENT, "perturbation": 0.1,
    });

    let q = QuadratureConfig::default();
    let truth = PlanarCrackParams::horizontal(Vector3::new(0.0, 0.0, -2.0), [0.5, 0.5]);
    let ctx = WaveContext::from_wavenumber(k);
    let pts = surface_grid(grid, PATCH_EXTENT);
    let data = forward_map(&truth, &ctx, &pts, cells, &q)?;
    let spec = InversionSpec { data, ctx, budget: INVERT_BUDGET, noise: 0.0 };
    let init = truth.perturbed(0.1, seed);
    let fit = fit_geometry(&spec, &init, cells, &q, seed)?;

    let mut run = RunDir::create(out)?;
    let mut csv = Vec::new();
    spec.data.write_csv(&mut csv)?;
    run.put("data.csv", &csv)?;
    let mut json = Vec::new();
    write_fit_json(&fit, &mut json)?;
    run.put("fit.json", &json)?;
    run.finish("invert", config, started)
}

/// Sweep summary emitted next to the per-frequency CSV.
#[derive(Serialize)]
struct SweepRecord {
    mode: usize,
    threshold: f64,
    dips: Vec<f64>,
    predicted: Vec<f64>,
}

fn run_sweep(args: &SweepArgs, started: Instant) -> Result<(), CliError> {
    let file = load_config(args.common.config.as_deref())?;
    let out = pick(&args.common.out, &file.out, PathBuf::from("."));
    let seed = pick(&args.common.seed, &file.seed, 42);
    let k0 = pick(&args.k, &file.k, 1.0);
    let grid = pick(&args.grid, &file.grid, 21);
    let refine = pick(&args.refine, &file.refine, 3);
    let t_min = pick(&args.t_min, &file.t_min, 1.5);
    let t_max = pick(&args.t_max, &file.t_max, 5.0);
    let t_step = pick(&args.t_step, &file.t_step, 0.01);
    let mode = file.mode.unwrap_or(1);
    check(k0.is_finite() && k0 > 0.0, "k must be a positive finite wavenumber")?;
    check(grid >= 2, "grid needs at least 2 points per axis")?;
    check((1..=6).contains(&refine), "refine must lie in 1..=6")?;
    check(t_min.is_finite() && t_min > 0.0, "t-min must be positive")?;
    check(t_max.is_finite() && t_max > t_min, "t-max must exceed t-min")?;
    check(t_step.is_finite() && t_step > 0.0, "t-step must be positive")?;
    check(mode <= 3, "mode must lie in 0..=3")?;
    let config = serde_json::json!({
        "out": out, "seed": seed, "k": k0, "grid": grid, "refine": refine,
        "t_min": t_min, "t_max": t_max, "t_step": t_step, "mode": mode,
        "extent": SWEEP_EXTENT, "threshold": SWEEP_THRESHOLD,
    });

    let mut ts = Vec::new();
    let mut i = 0usize;
    loop {
        let t = t_min + t_step * i as f64;
        if t > t_max + 1e-12 {
            break;
        }
        ts.push(t);
        i += 1;
    }

    let inst = build_sphere_instance(None, refine)?;
    let (crack1, crack2) = match inst.pieces() {
        cracklab::counterexample::CrackPair::Surfaces { crack1, crack2 } => (crack1, crack2),
        _ => unreachable!("the sphere instance is a surface pair"),
    };
    let center = Vector3::new(0.0, 0.0, -2.0);
    let g1 = zonal_basis(crack1, &center, 1.0, &[mode])?.remove(0);
    let basis2 = zonal_basis(crack2, &center, 1.0, &[mode])?;
    let ladder = (t_max * k0 / std::f64::consts::PI).ceil() as usize + 2;
    let predicted: Vec<f64> = zeros_of_dj(mode, ladder)
        .into_iter()
        .map(|x| x / k0)
        .filter(|t| *t <= t_max)
        .collect();
    let pts = surface_grid(grid, SWEEP_EXTENT);
    let sweep = frequency_sweep(
        crack1,
        &g1,
        crack2,
        &basis2,
        k0,
        &ts,
        &pts,
        predicted,
        SWEEP_THRESHOLD,
        &QuadratureConfig::default(),
    )?;

    let mut run = RunDir::create(out)?;
    let mut csv = Vec::new();
    write_sweep_csv(&sweep, &mut csv)?;
    run.put("sweep.csv", &csv)?;
    let record = SweepRecord {
        mode,
        threshold: sweep.threshold,
        dips: sweep.dips.clone(),
        predicted: sweep.predicted.clone(),
    };
    let mut json = serde_json::to_vec_pretty(&record)?;
    json.push(b'\n');
    run.put("sweep.json", &json)?;
    run.finish("sweep", config, started)
}
