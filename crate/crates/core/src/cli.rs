//! Command-line surface: one subcommand per stage, artifacts under
//! `<out>/<config hash>/`, every file stamped with the full config hash.
//!
//! Exit status: 0 success, 1 a verified condition failed, 2 invalid
//! configuration, 3 missing prerequisite artifact, 4 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::curve::{reach, trace, CurvePoint, SolutionCurve};
use crate::discretization::{read_real_csv, Grid};
use crate::dynamics::{stability_experiment, ExperimentConfig, OrbitRecord, Parity};
use crate::error::{Error, Result};
use crate::linearization::principal_eigenpair;
use crate::model::{audit_prototype, AuditGrid, Prototype};
use crate::spectral::analyze;
use crate::stationary::Stationary;
use crate::waveguide::dispersion_curve;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_MISSING_PREREQUISITE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "satwave",
    version,
    about = "Standing waves of a saturable 1D NLS: branch, spectra, stability"
)]
pub struct Cli {
    /// TOML run configuration (defaults are used for anything omitted).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base output directory; each run writes to `<out>/<config hash>/`.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the seed of the randomized probes.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the structural assumptions on the nonlinearity.
    Audit,
    /// Principal eigenvalue of the saturated linear problem.
    LambdaInf,
    /// One standing wave, with identities and a uniqueness probe.
    Solve,
    /// Continuation across the frequency window.
    Trace,
    /// Spectral conditions at every traced point.
    Spectrum,
    /// Slope condition along the traced branch.
    Slope,
    /// Perturbed time evolution near selected traced waves.
    Simulate,
    /// Power-dispersion curve of the waveguide reading.
    Waveguide,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Audit => "audit",
            Command::LambdaInf => "lambda-inf",
            Command::Solve => "solve",
            Command::Trace => "trace",
            Command::Spectrum => "spectrum",
            Command::Slope => "slope",
            Command::Simulate => "simulate",
            Command::Waveguide => "waveguide",
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. } | Error::InvalidGrid(_) | Error::Config(_) | Error::LambdaOutOfRange { .. } => {
            EXIT_INVALID_CONFIG
        }
        Error::MissingArtifact { .. } => EXIT_MISSING_PREREQUISITE,
        _ => EXIT_NUMERIC,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            println!("{}: {}", cli.command.name(), outcome.summary);
            println!("report: {}", outcome.report.display());
            if outcome.passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Result of a successful command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub report: PathBuf,
}

/// Resolves the configuration and output directory of a command line.
pub fn resolve(cli: &Cli) -> Result<(RunConfig, RunDir)> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let dir = RunDir::new(&cli.out, &cfg)?;
    Ok((cfg, dir))
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let (cfg, dir) = resolve(cli)?;
    dir.write_json("config.json", &cfg.to_json())?;
    match cli.command {
        Command::Audit => cmd_audit(&cfg, &dir),
        Command::LambdaInf => cmd_lambda_inf(&cfg, &dir),
        Command::Solve => cmd_solve(&cfg, &dir),
        Command::Trace => cmd_trace(&cfg, &dir),
        Command::Spectrum => cmd_spectrum(&cfg, &dir),
        Command::Slope => cmd_slope(&cfg, &dir),
        Command::Simulate => cmd_simulate(&cfg, &dir),
        Command::Waveguide => cmd_waveguide(&cfg, &dir),
    }
}

/// Output directory of one configuration.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub path: PathBuf,
    pub hash: String,
}

impl RunDir {
    pub fn new(base: &Path, cfg: &RunConfig) -> Result<Self> {
        let path = base.join(cfg.short_hash());
        fs::create_dir_all(&path)?;
        Ok(Self { path, hash: cfg.hash() })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    /// Writes a text artifact whose first line is `# config_hash=<hash>`.
    pub fn write_text(&self, name: &str, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<PathBuf> {
        let path = self.file(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut buf = Vec::new();
        writeln!(buf, "# config_hash={}", self.hash)?;
        body(&mut buf)?;
        fs::write(&path, buf)?;
        Ok(path)
    }

    /// Writes `{"config_hash": ..., "data": value}`.
    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.file(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let doc = serde_json::json!({ "config_hash": self.hash, "data": value });
        fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
        Ok(path)
    }

    pub fn read_json<T: for<'de> Deserialize<'de>>(&self, name: &str, command: &'static str) -> Result<T> {
        let path = self.require(name, command)?;
        let text = fs::read_to_string(&path)?;
        let doc: serde_json::Value = serde_json::from_str(&text)?;
        serde_json::from_value(doc["data"].clone()).map_err(|e| Error::MalformedArtifact {
            path,
            reason: e.to_string(),
        })
    }

    pub fn require(&self, name: &str, command: &'static str) -> Result<PathBuf> {
        let path = self.file(name);
        if path.is_file() {
            Ok(path)
        } else {
            Err(Error::MissingArtifact { path, command })
        }
    }

    pub fn read_field(&self, name: &str, grid: &Grid, command: &'static str) -> Result<Vec<f64>> {
        let path = self.require(name, command)?;
        let text = fs::read_to_string(&path)?;
        let (_, values) = read_real_csv(&text).map_err(|reason| Error::MalformedArtifact {
            path: path.clone(),
            reason,
        })?;
        if values.len() != grid.len() {
            return Err(Error::MalformedArtifact {
                path,
                reason: format!("{} samples for a grid of {}", values.len(), grid.len()),
            });
        }
        Ok(values)
    }
}

fn model(cfg: &RunConfig) -> Result<Prototype> {
    Prototype::new(cfg.model)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LambdaInfRecord {
    lambda_inf: f64,
    lambda_grid: f64,
    lambda_refined: f64,
    radius: f64,
    points: usize,
}

fn lambda_inf(cfg: &RunConfig, dir: &RunDir) -> Result<LambdaInfRecord> {
    if let Ok(r) = dir.read_json::<LambdaInfRecord>("lambda_inf.json", "lambda-inf") {
        return Ok(r);
    }
    let m = model(cfg)?;
    let grid = cfg.build_grid()?;
    let p = principal_eigenpair(&m, &grid)?;
    let rec = LambdaInfRecord {
        lambda_inf: p.lambda_inf,
        lambda_grid: p.lambda_grid,
        lambda_refined: p.lambda_refined,
        radius: grid.radius(),
        points: grid.len(),
    };
    dir.write_json("lambda_inf.json", &rec)?;
    dir.write_text("phi_inf.csv", |b| grid.write_real_csv(b, &p.phi_inf))?;
    Ok(rec)
}

pub fn cmd_audit(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome> {
    let report = audit_prototype(cfg.model, &AuditGrid::default());
    let path = dir.write_json("audit.json", &report)?;
    let failed: Vec<_> = report.failures().map(|r| r.assumption.clone()).collect();
    Ok(Outcome {
        passed: failed.is_empty(),
        summary: if failed.is_empty() {
            "all assumptions pass".into()
        } else {
            format!("failed: {}", failed.join(", "))
        },
        report: path,
    })
}

pub fn cmd_lambda_inf(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome> {
    let _ = fs::remove_file(dir.file("lambda_inf.json"));
    let rec = lambda_inf(cfg, dir)?;
    Ok(Outcome {
        passed: true,
        summary: format!("lambda_inf = {:.12}", rec.lambda_inf),
        report: dir.file("lambda_inf.json"),
    })
}

/// Linear interpolation of `u` at `x` (zero outside the grid).
fn sample_at(grid: &Grid, u: &[f64], x: f64) -> f64 {
    let h = grid.spacing();
    let t = (x + grid.radius()) / h;
    if t < 0.0 || t > (u.len() - 1) as f64 {
        return 0.0;
    }
    let j = (t.floor() as usize).min(u.len() - 2);
    let w = t - j as f64;
    (1.0 - w) * u[j] + w * u[j + 1]
}

#[derive(Debug, Clone, Serialize)]
struct SolveRecord {
    wave: serde_json::Value,
    energy_identity: f64,
    pohozaev_identity: f64,
    decay_ratio_error: f64,
    smallest_singular_value: f64,
    /// `max |u_probe - u|` for each randomized guess (`None`: no convergence).
    probe_distances: Vec<Option<f64>>,
}

pub fn cmd_solve(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome> {
    let m = model(cfg)?;
    let grid = cfg.build_grid()?;
    let li = lambda_inf(cfg, dir)?.lambda_inf;
    let st = Stationary::new(&m, &grid, li).with_config(cfg.newton);
    let lambda = cfg.solve.lambda * li;
    let wave = reach(&st, lambda, cfg.model.alpha, &cfg.trace.step)?;
    let ids = st.identities(&wave);
    let smin = st.jacobian(lambda, &wave.u).smallest_singular_value(30)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let probes: Vec<(f64, f64)> = (0..cfg.solve.probes)
        .map(|_| (rng.gen_range(0.8..1.2), rng.gen_range(0.85..1.15)))
        .collect();
    let probe_distances: Vec<Option<f64>> = probes
        .par_iter()
        .map(|&(amp, width)| {
            let guess = grid.sample(|x| amp * sample_at(&grid, &wave.u, x * width));
            st.solve(lambda, &guess)
                .ok()
                .map(|w| w.u.iter().zip(&wave.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        })
        .collect();

    dir.write_text("wave.csv", |b| wave.write_csv(&grid, b))?;
    let rec = SolveRecord {
        wave: wave.sidecar(),
        energy_identity: ids.energy,
        pohozaev_identity: ids.pohozaev,
        decay_ratio_error: (wave.decay_ratio + lambda.sqrt()).abs() / lambda.sqrt(),
        smallest_singular_value: smin,
        probe_distances: probe_distances.clone(),
    };
    let path = dir.write_json("wave.json", &rec)?;
    let unique = probe_distances.iter().flatten().all(|d| *d < 1e-6);
    let passed = ids.energy < 1e-5 && ids.pohozaev < 1e-5 && rec.decay_ratio_error < 0.01 && unique;
    Ok(Outcome {
        passed,
        summary: format!(
            "lambda = {lambda:.6}, sup u = {:.6}, mass = {:.6}, residual = {:.2e}",
            wave.sup(),
            wave.mass,
            wave.residual_inf
        ),
        report: path,
    })
}

fn point_name(kind: &str, i: usize) -> String {
    format!("points/{kind}_{i:03}.csv")
}

pub fn cmd_trace(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome> {
    let m = model(cfg)?;
    let grid = cfg.build_grid()?;
    let li = lambda_inf(cfg, dir)?.lambda_inf;
    let st = Stationary::new(&m, &grid, li).with_config(cfg.newton);
    let window = (cfg.trace.lambda_min * li, cfg.trace.lambda_max * li);
    let curve = trace(&st, window, cfg.model.alpha, &cfg.trace.step)?;
    for (i, p) in curve.points.iter().enumerate() {
        dir.write_text(&point_name("u", i), |b| grid.write_real_csv(b, &p.wave.u))?;
        dir.write_text(&point_name("xi", i), |b| grid.write_real_csv(b, &p.xi))?;
    }
    dir.write_json("curve.json", &curve)?;
    let path = dir.write_text("curve.csv", |b| curve.write_csv(b))?;
    let invariants = curve.points.iter().all(CurvePoint::satisfies_invariants);
    let passed = invariants && curve.mass_strictly_increasing();
    Ok(Outcome {
        passed,
        summary: format!(
            "{} points, termination {:?}, invariants {}",
            curve.points.len(),
            curve.termination,
            if invariants { "hold" } else { "violated" }
        ),
        report: path,
    })
}

/// The traced curve with profiles reattached from `points/`.
pub fn load_curve(dir: &RunDir, grid: &Grid) -> Result<SolutionCurve> {
    dir.require("curve.csv", "trace")?;
    let mut curve: SolutionCurve = dir.read_json("curve.json", "trace")?;
    for (i, p) in curve.points.iter_mut().enumerate() {
        p.wave.u = dir.read_field(&point_name("u", i), grid, "trace")?;
        p.xi = dir.read_field(&point_name("xi", i), grid, "trace")?;
    }
    Ok(curve)
}

pub fn cmd_spectrum(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome> {
    let m = model(cfg)?;
    let grid = cfg.build_grid()?;
    let curve = load_curve(dir, &grid)?;
    let reports = curve
        .points
        .par_iter()
        .map(|p| analyze(&p.wave, &m, &grid, cfg.newton.closure))
        .collect::<Result<Vec<_>>>()?;
    for (i, r) in reports.iter().enumerate() {
        dir.write_json(&format!("spectrum/point_{i:03}.json"), r)?;
    }
    let path = dir.write_json("spectrum.json", &reports)?;
    let s1 = reports.iter().filter(|r| r.pass_s1).count();
    let s2 = reports.iter().filter(|r| r.pass_s2).count();
    Ok(Outcome {
        passed: s1 == reports.len() && s2 == reports.len(),
        summary: format!("S1 {s1}/{n}, S2 {s2}/{n}", n = reports.len()),
        report: path,
    })
}

#[derive(Debug, Clone, Serialize)]
struct SlopeRow {
    lambda: f64,
    slope_xi: f64,
    slope_direct: f64,
    relative_gap: f64,
    zeta_quantity: Option<f64>,
    xi_zero: Option<f64>,
}

pub fn cmd_slope(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome> {
    let grid = cfg.build_grid()?;
    let curve = load_curve(dir, &grid)?;
    let rows: Vec<SlopeRow> = curve
        .points
        .iter()
        .map(|p| SlopeRow {
            lambda: p.lambda(),
            slope_xi: p.slope_xi,
            slope_direct: p.slope_direct,
            relative_gap: (p.slope_direct - p.slope_xi).abs() / p.slope_xi.abs(),
            zeta_quantity: p.zeta_quantity,
            xi_zero: p.xi_zero,
        })
        .collect();
    let positive = rows.iter().all(|r| r.slope_xi > 0.0 && r.slope_direct > 0.0);
    let agree = rows.iter().all(|r| r.relative_gap < 1e-3);
    let zeta = rows.iter().all(|r| r.zeta_quantity.is_some_and(|q| q > 0.0));
    let monotone = curve.mass_strictly_increasing();
    let path = dir.write_json(
        "slope.json",
        &serde_json::json!({
            "rows": rows,
            "positive": positive,
            "agree": agree,
            "zeta_positive": zeta,
            "mass_increasing": monotone,
        }),
    )?;
    Ok(Outcome {
        passed: positive && agree && zeta && monotone,
        summary: format!(
            "positive {positive}, agreement {agree}, zeta quantity positive {zeta}, mass increasing {monotone}"
        ),
        report: path,
    })
}

#[derive(Debug, Clone, Serialize)]
struct OrbitSummary {
    lambda: f64,
    parity: Parity,
    delta: f64,
    max_distance: f64,
    bound: f64,
    halved_ratio: f64,
    max_boundary_mass: f64,
    pass: bool,
}

fn nearest_point(curve: &SolutionCurve, lambda: f64) -> Option<usize> {
    (0..curve.points.len()).min_by(|&a, &b| {
        let da = (curve.points[a].lambda() - lambda).abs();
        let db = (curve.points[b].lambda() - lambda).abs();
        da.total_cmp(&db)
    })
}

pub fn cmd_simulate(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome> {
    let m = model(cfg)?;
    let grid = cfg.build_grid()?;
    let curve = load_curve(dir, &grid)?;
    let d = &cfg.dynamics;
    let mut selected: Vec<usize> = d
        .lambdas
        .iter()
        .filter_map(|f| nearest_point(&curve, f * curve.lambda_inf))
        .collect();
    selected.dedup();
    let mut jobs = Vec::new();
    for &i in &selected {
        for parity in [Parity::Even, Parity::Odd] {
            for delta in [d.delta, 0.5 * d.delta] {
                jobs.push((i, parity, delta));
            }
        }
    }
    let records = jobs
        .par_iter()
        .map(|&(i, parity, delta)| {
            let ec = ExperimentConfig {
                delta,
                parity,
                t_final: d.t_final,
                dt: d.dt,
                sample_interval: d.sample_interval,
                symbol: d.symbol,
                ..Default::default()
            };
            stability_experiment(&curve.points[i].wave, &m, &grid, &ec)
        })
        .collect::<Result<Vec<OrbitRecord>>>()?;
    let mut summaries = Vec::new();
    for (k, rec) in records.iter().enumerate() {
        let (i, parity, _) = jobs[k];
        let tag = if k % 2 == 0 { "delta" } else { "half_delta" };
        let name = format!("orbits/orbit_{i:03}_{}_{tag}.csv", parity_name(parity));
        dir.write_text(&name, |b| rec.write_csv(b))?;
        if k % 2 == 0 {
            let half = &records[k + 1];
            let bound = d.excursion_factor * rec.delta * rec.wave_h1;
            let ratio = half.max_distance() / rec.max_distance();
            summaries.push(OrbitSummary {
                lambda: rec.lambda,
                parity,
                delta: rec.delta,
                max_distance: rec.max_distance(),
                bound,
                halved_ratio: ratio,
                max_boundary_mass: rec.max_boundary_mass.max(half.max_boundary_mass),
                pass: rec.max_distance() <= bound && (0.3..=0.7).contains(&ratio),
            });
        }
    }
    let path = dir.write_json("simulate.json", &summaries)?;
    let passed = summaries.iter().all(|s| s.pass);
    Ok(Outcome {
        passed,
        summary: format!(
            "{} experiments, {} within bounds",
            summaries.len(),
            summaries.iter().filter(|s| s.pass).count()
        ),
        report: path,
    })
}

fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::Even => "even",
        Parity::Odd => "odd",
    }
}

pub fn cmd_waveguide(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome> {
    dir.require("curve.csv", "trace")?;
    let curve: SolutionCurve = dir.read_json("curve.json", "trace")?;
    let samples: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.lambda(), p.wave.mass)).collect();
    let disp = dispersion_curve(&samples, &cfg.waveguide, curve.lambda_inf)?;
    let path = dir.write_text("dispersion.csv", |b| disp.write_csv(b))?;
    let increasing = disp.power_increasing();
    Ok(Outcome {
        passed: increasing,
        summary: format!(
            "k in ({:.6}, {:.6}), {} points, power increasing {increasing}",
            disp.k1,
            disp.k3,
            disp.points.len()
        ),
        report: path,
    })
}
