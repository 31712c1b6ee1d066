//! The branch `lambda -> u(lambda)` of positive standing waves, its tangent
//! `xi = du/dlambda`, and the slope `d/dlambda int u^2`.
//!
//! Continuation is in the natural parameter: the slope is positive on the
//! whole window, so the branch is a graph over `lambda` and has no folds.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{prolong, symmetrize, Grid};
use crate::error::{Error, Result};
use crate::model::{zeta, Nonlinearity};
use crate::stationary::{relative, StandingWave, Stationary, StationaryIdentities};

/// Relative residuals of the integral identities satisfied along the branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// `int_0^inf u^2 = 2 int_0^inf d2f u^3 xi`.
    pub lagrange: f64,
    /// `int_0^inf [2f + x d1f - d2f u^2] u xi = 2 lambda int_0^inf u xi`.
    pub tangent: f64,
    /// Pohozaev-type identity of the profile itself.
    pub pohozaev: f64,
    /// Energy identity of the profile itself.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub wave: StandingWave,
    #[serde(skip)]
    pub xi: Vec<f64>,
    /// `2 int u xi` over the line.
    pub slope_xi: f64,
    /// Centered difference of the mass in `lambda`.
    pub slope_direct: f64,
    /// Relative `L2` distance between `xi` and the centered difference of `u`.
    pub xi_fd_error: f64,
    pub identities: IdentityResiduals,
    /// First sign change of `xi` on `x > 0` (linear interpolation).
    pub xi_zero: Option<f64>,
    /// Number of sign changes of `xi` on the nodes `x >= 0`.
    pub sign_changes: usize,
    /// `int_0^inf [zeta(x) - zeta(x0)] d2f u^3 xi + zeta(x0)/2 int_0^inf u^2`,
    /// evaluated along the profile.
    pub zeta_quantity: Option<f64>,
}

impl CurvePoint {
    pub fn lambda(&self) -> f64 {
        self.wave.lambda
    }

    /// The branch-point predicates: positive slopes that agree, and the
    /// one-crossing shape of `xi`.
    pub fn satisfies_invariants(&self) -> bool {
        let c = self.xi.len() / 2;
        self.slope_xi > 0.0
            && self.slope_direct > 0.0
            && (self.slope_direct - self.slope_xi).abs() / self.slope_xi < 1e-3
            && self.xi[c] > 0.0
            && self.sign_changes == 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    WindowEdge,
    NewtonFailure { lambda: f64, message: String },
    AmplitudeCap { lambda: f64, sup: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionCurve {
    pub points: Vec<CurvePoint>,
    pub lambda_inf: f64,
    pub termination: Termination,
}

impl SolutionCurve {
    pub fn masses(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.wave.mass).collect()
    }

    pub fn mass_strictly_increasing(&self) -> bool {
        self.points.windows(2).all(|w| w[0].wave.mass < w[1].wave.mass)
    }

    /// The three identity columns hold, in order, the Lagrange, tangent and
    /// Pohozaev residuals of [`IdentityResiduals`].
    pub const CSV_HEADER: &'static str =
        "lambda,mass,slope_xi,slope_direct,sup_u,decay_ratio,intid_res1,intid_res2,intid_res4,x0";

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for p in &self.points {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.6e},{:.6e},{:.6e},{}",
                p.wave.lambda,
                p.wave.mass,
                p.slope_xi,
                p.slope_direct,
                p.wave.sup(),
                p.wave.decay_ratio,
                p.identities.lagrange,
                p.identities.tangent,
                p.identities.pohozaev,
                p.xi_zero.map_or("nan".to_string(), |x| format!("{x:.17e}")),
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepConfig {
    /// Number of equally spaced output frequencies.
    pub points: usize,
    /// Smallest continuation step, relative to the output spacing.
    pub min_step: f64,
    pub grow: f64,
    pub shrink: f64,
    /// Newton iteration count at or below which a step counts as easy.
    pub easy_iters: usize,
    pub amplitude_cap: f64,
    /// Frequency offset of the centered differences.
    pub fd_delta: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            points: 60,
            min_step: 1e-6,
            grow: 1.3,
            shrink: 0.5,
            easy_iters: 3,
            amplitude_cap: 1e3,
            fd_delta: 1e-4,
        }
    }
}

/// Solves `D_u F xi = -d_lambda F`, so that `xi = du/dlambda` along the branch.
pub fn solve_xi<M: Nonlinearity + ?Sized>(st: &Stationary<'_, M>, wave: &StandingWave) -> Result<Vec<f64>> {
    let rhs: Vec<f64> = st.lambda_derivative(wave.lambda, &wave.u).iter().map(|v| -v).collect();
    let mut xi = st.jacobian(wave.lambda, &wave.u).solve(&rhs)?;
    symmetrize(&mut xi);
    Ok(xi)
}

/// Residuals of the four identities for a wave and its tangent.
pub fn check_identities<M: Nonlinearity + ?Sized>(
    st: &Stationary<'_, M>,
    wave: &StandingWave,
    xi: &[f64],
) -> IdentityResiduals {
    let g = st.grid;
    let x = g.nodes();
    let u = &wave.u;
    let n = u.len();
    let mut mass = vec![0.0; n];
    let mut lag = vec![0.0; n];
    let mut tan = vec![0.0; n];
    let mut uxi = vec![0.0; n];
    for j in 0..n {
        let s = u[j] * u[j];
        let (f, d1, d2) = (st.model.f(x[j], s), st.model.d1f(x[j], s), st.model.d2f(x[j], s));
        mass[j] = s;
        lag[j] = 2.0 * d2 * s * u[j] * xi[j];
        tan[j] = (2.0 * f + x[j] * d1 - d2 * s) * u[j] * xi[j];
        uxi[j] = u[j] * xi[j];
    }
    let StationaryIdentities { energy, pohozaev } = st.identities(wave);
    IdentityResiduals {
        lagrange: relative(g.half_line_integral(&mass), g.half_line_integral(&lag)),
        tangent: relative(
            g.half_line_integral(&tan),
            2.0 * wave.lambda * g.half_line_integral(&uxi),
        ),
        pohozaev,
        energy,
    }
}

/// `2 int u xi` over the line.
pub fn slope(grid: &Grid, wave: &StandingWave, xi: &[f64]) -> f64 {
    2.0 * grid.l2_inner(&wave.u, xi)
}

/// Sign changes of `xi` on `x >= 0` and the first crossing, by linear interpolation.
pub fn sign_structure(grid: &Grid, xi: &[f64]) -> (usize, Option<f64>) {
    let c = grid.center();
    let x = grid.nodes();
    let mut count = 0;
    let mut first = None;
    let mut prev: Option<(usize, f64)> = None;
    for j in c..xi.len() {
        if xi[j] == 0.0 {
            continue;
        }
        if let Some((k, v)) = prev {
            if v.signum() != xi[j].signum() {
                count += 1;
                if first.is_none() {
                    let t = v / (v - xi[j]);
                    first = Some(x[k] + t * (x[j] - x[k]));
                }
            }
        }
        prev = Some((j, xi[j]));
    }
    (count, first)
}

/// The quantity whose vanishing the slope argument rules out.
pub fn zeta_quantity<M: Nonlinearity + ?Sized>(
    st: &Stationary<'_, M>,
    wave: &StandingWave,
    xi: &[f64],
    x0: f64,
) -> Result<f64> {
    let g = st.grid;
    let x = g.nodes();
    let u = &wave.u;
    let c = g.center();
    let k = c + ((x0 / g.spacing()).floor() as usize).min(u.len() - c - 2);
    let t = (x0 - x[k]) / g.spacing();
    let u0 = (1.0 - t) * u[k] + t * u[k + 1];
    let z0 = zeta(st.model, x0, u0 * u0)?;
    let mut weighted = vec![0.0; u.len()];
    for j in c..u.len() {
        let s = u[j] * u[j];
        // zeta is only needed on x > 0; the center node carries it by continuity
        let xj = x[j].max(f64::MIN_POSITIVE);
        weighted[j] = (zeta(st.model, xj, s)? - z0) * st.model.d2f(x[j], s) * s * u[j] * xi[j];
    }
    let mass: Vec<f64> = u.iter().map(|v| v * v).collect();
    Ok(g.half_line_integral(&weighted) + 0.5 * z0 * g.half_line_integral(&mass))
}

/// Fully populates a branch point: tangent, finite-difference cross-checks,
/// identities and the sign structure of `xi`.
pub fn curve_point<M: Nonlinearity + ?Sized>(
    st: &Stationary<'_, M>,
    wave: StandingWave,
    fd_delta: f64,
) -> Result<CurvePoint> {
    let g = st.grid;
    let xi = solve_xi(st, &wave)?;
    let shifted = |d: f64| {
        let guess: Vec<f64> = wave.u.iter().zip(&xi).map(|(u, x)| u + d * x).collect();
        st.solve(wave.lambda + d, &guess)
    };
    let plus = shifted(fd_delta)?;
    let minus = shifted(-fd_delta)?;
    let slope_direct = (plus.mass - minus.mass) / (2.0 * fd_delta);
    let fd: Vec<f64> = plus
        .u
        .iter()
        .zip(&minus.u)
        .map(|(p, m)| (p - m) / (2.0 * fd_delta))
        .collect();
    let diff: Vec<f64> = fd.iter().zip(&xi).map(|(a, b)| a - b).collect();
    let xi_fd_error = g.norms(&diff).l2 / g.norms(&xi).l2;

    let identities = check_identities(st, &wave, &xi);
    let (sign_changes, xi_zero) = sign_structure(g, &xi);
    let zeta_quantity = xi_zero.and_then(|x0| zeta_quantity(st, &wave, &xi, x0).ok());
    Ok(CurvePoint {
        slope_xi: slope(g, &wave, &xi),
        slope_direct,
        xi_fd_error,
        identities,
        xi_zero,
        sign_changes,
        zeta_quantity,
        wave,
        xi,
    })
}

/// Continuation across `[lambda_min, lambda_max]`, reporting the waves at
/// `step.points` equally spaced frequencies.
///
/// Between output frequencies the step adapts: it shrinks on Newton failure
/// and grows after easy solves. A failure after the step underflows, or an
/// amplitude above the cap, ends the run with a partial curve.
pub fn trace<M: Nonlinearity + ?Sized>(
    st: &Stationary<'_, M>,
    window: (f64, f64),
    alpha: f64,
    step: &StepConfig,
) -> Result<SolutionCurve> {
    let (lo, hi) = window;
    if !(0.0 < lo && lo < hi && hi < st.lambda_inf) || step.points < 2 {
        return Err(Error::Config(format!(
            "trace window ({lo}, {hi}) must satisfy 0 < lo < hi < {} with at least 2 points",
            st.lambda_inf
        )));
    }
    let spacing = (hi - lo) / (step.points - 1) as f64;
    let targets: Vec<f64> = (0..step.points).map(|k| lo + k as f64 * spacing).collect();

    let seed = st.initial_guess(lo, alpha);
    let first = st.solve(lo, &seed).map_err(|e| Error::Seeding {
        lambda: lo,
        reason: format!("{e} (sech guess with amplitude {:.3e})", seed[seed.len() / 2]),
    })?;

    let mut current = first.clone();
    let mut waves = vec![first];
    let mut termination = Termination::WindowEdge;
    let mut dl = spacing;
    for &target in &targets[1..] {
        match continue_to(st, current, target, &mut dl, spacing, step) {
            Ok(w) => current = w,
            Err((lambda, e)) => {
                termination = Termination::NewtonFailure {
                    lambda,
                    message: e.to_string(),
                };
                break;
            }
        }
        if current.sup() > step.amplitude_cap {
            termination = Termination::AmplitudeCap {
                lambda: current.lambda,
                sup: current.sup(),
            };
            break;
        }
        waves.push(current.clone());
    }

    let points = waves
        .into_par_iter()
        .map(|w| curve_point(st, w, step.fd_delta))
        .collect::<Result<Vec<_>>>()?;
    Ok(SolutionCurve {
        points,
        lambda_inf: st.lambda_inf,
        termination,
    })
}

/// Adaptive predictor-corrector steps from `current` to `target`.
///
/// On failure returns the frequency of the last rejected step with its error.
fn continue_to<M: Nonlinearity + ?Sized>(
    st: &Stationary<'_, M>,
    mut current: StandingWave,
    target: f64,
    dl: &mut f64,
    max_step: f64,
    step: &StepConfig,
) -> std::result::Result<StandingWave, (f64, Error)> {
    while current.lambda < target {
        let remaining = target - current.lambda;
        let (next, d) = if *dl >= remaining {
            (target, remaining)
        } else {
            (current.lambda + *dl, *dl)
        };
        let xi = solve_xi(st, &current).map_err(|e| (current.lambda, e))?;
        let guess: Vec<f64> = current.u.iter().zip(&xi).map(|(u, x)| u + d * x).collect();
        match st.solve(next, &guess) {
            Ok(w) => {
                if w.iterations <= step.easy_iters {
                    *dl = (*dl * step.grow).min(max_step);
                }
                current = w;
            }
            Err(e) => {
                *dl *= step.shrink;
                if *dl < step.min_step * max_step {
                    return Err((next, e));
                }
            }
        }
    }
    Ok(current)
}

/// The branch wave at `lambda`, seeded at `min(lambda, lambda_inf / 20)` from
/// the pure-power profile and continued upward.
pub fn reach<M: Nonlinearity + ?Sized>(
    st: &Stationary<'_, M>,
    lambda: f64,
    alpha: f64,
    step: &StepConfig,
) -> Result<StandingWave> {
    let lo = lambda.min(0.05 * st.lambda_inf);
    let seed = st.initial_guess(lo, alpha);
    let first = st.solve(lo, &seed).map_err(|e| Error::Seeding {
        lambda: lo,
        reason: e.to_string(),
    })?;
    let max_step = (st.lambda_inf / step.points.max(2) as f64).max(f64::MIN_POSITIVE);
    let mut dl = max_step;
    continue_to(st, first, lambda, &mut dl, max_step, step).map_err(|(_, e)| e)
}

/// Identity residuals of the same branch point on `grid` and on `grid.refined()`.
///
/// `guess` is a converged profile on `grid` at a nearby frequency.
pub fn refinement_pair<M: Nonlinearity + ?Sized>(
    st: &Stationary<'_, M>,
    lambda: f64,
    guess: &[f64],
) -> Result<(IdentityResiduals, IdentityResiduals)> {
    let coarse = st.solve(lambda, guess)?;
    let xi = solve_xi(st, &coarse)?;
    let a = check_identities(st, &coarse, &xi);
    let fine_grid = st.grid.refined();
    let fine = Stationary {
        model: st.model,
        grid: &fine_grid,
        lambda_inf: st.lambda_inf,
        config: st.config,
    };
    let w = fine.solve(lambda, &prolong(&coarse.u))?;
    let xi = solve_xi(&fine, &w)?;
    Ok((a, check_identities(&fine, &w, &xi)))
}
