//! Positive even solutions of `u'' + f(x, u^2) u = lambda u` for a fixed
//! frequency, by damped Newton iteration on the truncated grid.
//!
//! The outermost rows close the problem with the exponential-decay condition
//! `u'(+-R) = -+sqrt(lambda) u(+-R)`, realized through a ghost node
//! `u_{-1} = u_1 - 2 h sqrt(lambda) u_0` (mirrored on the right).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::discretization::{max_abs, symmetrize, Grid};
use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;
use crate::model::Nonlinearity;

/// How the outermost rows of the operator are closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Closure {
    /// `u'(+-R) = -+sqrt(lambda) u(+-R)`.
    #[default]
    Robin,
    /// Zero ghost values beyond the walls; kept for cross-checks.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonConfig {
    /// Stop once `||F||_inf` drops below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Step reduction factor of the backtracking line search.
    pub backtrack: f64,
    pub max_halvings: usize,
    pub closure: Closure,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 50,
            backtrack: 0.5,
            max_halvings: 20,
            closure: Closure::Robin,
        }
    }
}

/// A converged point `(lambda, u)` of the solution branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandingWave {
    pub lambda: f64,
    #[serde(skip)]
    pub u: Vec<f64>,
    pub residual_inf: f64,
    /// `u'(R) / u(R)` from a one-sided second-order difference.
    pub decay_ratio: f64,
    /// `int u^2` over the whole line.
    pub mass: f64,
    pub iterations: usize,
}

impl StandingWave {
    pub fn sup(&self) -> f64 {
        max_abs(&self.u)
    }

    /// Writes the profile as `x,value` rows.
    pub fn write_csv<W: Write>(&self, grid: &Grid, out: W) -> Result<()> {
        grid.write_real_csv(out, &self.u)
    }

    /// JSON sidecar with the scalar diagnostics.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "lambda": self.lambda,
            "residual": self.residual_inf,
            "decay_ratio": self.decay_ratio,
            "mass": self.mass,
            "iterations": self.iterations,
        })
    }
}

/// The discretized map `F(lambda, u)` for one model on one grid.
pub struct Stationary<'a, M: Nonlinearity + ?Sized> {
    pub model: &'a M,
    pub grid: &'a Grid,
    /// Upper end of the admissible frequency window.
    pub lambda_inf: f64,
    pub config: NewtonConfig,
}

impl<'a, M: Nonlinearity + ?Sized> Stationary<'a, M> {
    pub fn new(model: &'a M, grid: &'a Grid, lambda_inf: f64) -> Self {
        Self {
            model,
            grid,
            lambda_inf,
            config: NewtonConfig::default(),
        }
    }

    pub fn with_config(mut self, config: NewtonConfig) -> Self {
        self.config = config;
        self
    }

    fn check_lambda(&self, lambda: f64) -> Result<()> {
        if !(lambda > 0.0 && lambda < self.lambda_inf) {
            return Err(Error::LambdaOutOfRange {
                lambda,
                lambda_inf: self.lambda_inf,
            });
        }
        Ok(())
    }

    /// Coefficient of `u_0` contributed by the closure (beyond the plain stencil).
    fn wall_coefficient(&self, lambda: f64) -> f64 {
        match self.config.closure {
            Closure::Robin => -2.0 * lambda.sqrt() / self.grid.spacing(),
            Closure::Dirichlet => 0.0,
        }
    }

    /// Second difference with the configured closure.
    pub fn laplacian(&self, lambda: f64, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let inv = 1.0 / (self.grid.spacing() * self.grid.spacing());
        let mut out = self.grid.second_derivative(u);
        if self.config.closure == Closure::Robin {
            let w = self.wall_coefficient(lambda);
            out[0] = (2.0 * u[1] - 2.0 * u[0]) * inv + w * u[0];
            out[n - 1] = (2.0 * u[n - 2] - 2.0 * u[n - 1]) * inv + w * u[n - 1];
        }
        out
    }

    /// `u'' + f(x, u^2) u - lambda u` nodewise.
    pub fn residual(&self, lambda: f64, u: &[f64]) -> Vec<f64> {
        let x = self.grid.nodes();
        let mut r = self.laplacian(lambda, u);
        for j in 0..u.len() {
            r[j] += (self.model.f(x[j], u[j] * u[j]) - lambda) * u[j];
        }
        r
    }

    /// `D_u F(lambda, u) v = v'' + [f + 2 d2f u^2] v - lambda v`.
    pub fn jacobian(&self, lambda: f64, u: &[f64]) -> Tridiagonal {
        let n = u.len();
        let x = self.grid.nodes();
        let inv = 1.0 / (self.grid.spacing() * self.grid.spacing());
        let mut lower = vec![inv; n - 1];
        let mut upper = vec![inv; n - 1];
        let mut diag: Vec<f64> = (0..n)
            .map(|j| {
                let s = u[j] * u[j];
                -2.0 * inv + self.model.f(x[j], s) + 2.0 * self.model.d2f(x[j], s) * s - lambda
            })
            .collect();
        if self.config.closure == Closure::Robin {
            let w = self.wall_coefficient(lambda);
            upper[0] = 2.0 * inv;
            lower[n - 2] = 2.0 * inv;
            diag[0] += w;
            diag[n - 1] += w;
        }
        Tridiagonal::new(lower, diag, upper)
    }

    /// `d F / d lambda` at fixed `u`.
    pub fn lambda_derivative(&self, lambda: f64, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let mut d: Vec<f64> = u.iter().map(|v| -v).collect();
        if self.config.closure == Closure::Robin {
            let c = -1.0 / (self.grid.spacing() * lambda.sqrt());
            d[0] += c * u[0];
            d[n - 1] += c * u[n - 1];
        }
        d
    }

    /// `A sech(sqrt(lambda) x)^(2/(p-1))`, the ground state of the pure power
    /// equation with exponent `p = 2 alpha + 1`.
    pub fn initial_guess(&self, lambda: f64, alpha: f64) -> Vec<f64> {
        let p = 2.0 * alpha + 1.0;
        let amp = (lambda * (p + 1.0) / 2.0).powf(1.0 / (p - 1.0));
        let k = lambda.sqrt();
        self.grid.sample(|x| amp * (1.0 / (k * x).cosh()).powf(2.0 / (p - 1.0)))
    }

    /// Damped Newton from `guess`; the result is checked for positivity,
    /// evenness and monotone decay before it is returned.
    pub fn solve(&self, lambda: f64, guess: &[f64]) -> Result<StandingWave> {
        self.check_lambda(lambda)?;
        self.grid.check_len(guess.len())?;
        let cfg = &self.config;
        let mut u = guess.to_vec();
        symmetrize(&mut u);
        let mut r = self.residual(lambda, &u);
        let mut rn = max_abs(&r);
        let mut iterations = 0;
        while rn >= cfg.tol {
            if iterations == cfg.max_iters || !rn.is_finite() {
                return Err(Error::NewtonDivergence {
                    iterations,
                    residual: rn,
                });
            }
            iterations += 1;
            let delta = self.jacobian(lambda, &u).solve(&r)?;
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..=cfg.max_halvings {
                let mut trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a - t * d).collect();
                symmetrize(&mut trial);
                let tr = self.residual(lambda, &trial);
                let tn = max_abs(&tr);
                if tn < rn {
                    u = trial;
                    r = tr;
                    rn = tn;
                    accepted = true;
                    break;
                }
                t *= cfg.backtrack;
            }
            if !accepted {
                return Err(Error::NewtonDivergence {
                    iterations,
                    residual: rn,
                });
            }
        }
        let wave = self.wave(lambda, u, rn, iterations);
        validate_shape(&wave.u, self.grid)?;
        Ok(wave)
    }

    /// Wraps an already converged profile with its diagnostics.
    pub fn wave(&self, lambda: f64, u: Vec<f64>, residual_inf: f64, iterations: usize) -> StandingWave {
        let n = u.len();
        let h = self.grid.spacing();
        let du = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
        StandingWave {
            lambda,
            decay_ratio: du / u[n - 1],
            mass: self.grid.integrate(&u.iter().map(|v| v * v).collect::<Vec<_>>()),
            u,
            residual_inf,
            iterations,
        }
    }

    /// Re-evaluates a stored profile, e.g. one read back from disk.
    pub fn from_profile(&self, lambda: f64, u: Vec<f64>) -> Result<StandingWave> {
        self.grid.check_len(u.len())?;
        let rn = max_abs(&self.residual(lambda, &u));
        Ok(self.wave(lambda, u, rn, 0))
    }

    /// Relative residuals of the energy and Pohozaev-type identities.
    pub fn identities(&self, wave: &StandingWave) -> StationaryIdentities {
        let x = self.grid.nodes();
        let u = &wave.u;
        let lam = wave.lambda;
        let u2: Vec<f64> = u.iter().map(|v| v * v).collect();
        let half_mass = self.grid.half_line_integral(&u2);

        let potential: Vec<f64> = (0..u.len()).map(|j| self.model.f(x[j], u2[j]) * u2[j]).collect();
        let energy_lhs = self.grid.half_line_integral(&potential) - self.grid.half_line_gradient_energy(u);
        let energy_rhs = lam * half_mass;

        let pohozaev: Vec<f64> = (0..u.len())
            .map(|j| {
                potential[j] + self.model.antiderivative(x[j], u2[j]) + x[j] * self.model.d1_antiderivative(x[j], u2[j])
            })
            .collect();
        let pohozaev_lhs = self.grid.half_line_integral(&pohozaev);
        let pohozaev_rhs = 2.0 * lam * half_mass;

        StationaryIdentities {
            energy: relative(energy_lhs, energy_rhs),
            pohozaev: relative(pohozaev_lhs, pohozaev_rhs),
        }
    }

    /// Checks the envelope `|u(x)| <= ||u||_inf exp(-sqrt(eta) (|x| - r_eps))`
    /// with `eps = eta = lambda / 2`, where `r_eps` is the first radius beyond
    /// which `f(x, s) <= eps` for every sampled intensity.
    pub fn decay_envelope(&self, wave: &StandingWave, intensities: &[f64]) -> DecayEnvelope {
        let eps = 0.5 * wave.lambda;
        let eta = wave.lambda - eps;
        let x = self.grid.nodes();
        let c = self.grid.center();
        let sup_f = |xv: f64| intensities.iter().fold(0.0_f64, |m, &s| m.max(self.model.f(xv, s)));
        let mut r_eps = None;
        for j in (c..x.len()).rev() {
            if sup_f(x[j]) > eps {
                break;
            }
            r_eps = Some(x[j]);
        }
        let sup = wave.sup();
        let worst = r_eps.map(|r| {
            (0..x.len())
                .map(|j| wave.u[j].abs() - sup * (-(eta.sqrt()) * (x[j].abs() - r)).exp())
                .fold(f64::NEG_INFINITY, f64::max)
        });
        DecayEnvelope {
            r_eps,
            worst_excess: worst,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryIdentities {
    /// `int_0^inf f u^2 - (u')^2 = lambda int_0^inf u^2`.
    pub energy: f64,
    /// `int_0^inf [f u^2 + int_0^{u^2} (f + x d1f)] = 2 lambda int_0^inf u^2`.
    pub pohozaev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayEnvelope {
    /// `None` when `f` exceeds `eps` all the way to the wall.
    pub r_eps: Option<f64>,
    /// `max_j (|u_j| - envelope_j)`; non-positive when the bound holds.
    pub worst_excess: Option<f64>,
}

pub(crate) fn relative(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Positivity on all nodes and strict decrease on `x > 0`.
pub fn validate_shape(u: &[f64], grid: &Grid) -> Result<()> {
    if let Some((node, &value)) = u.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::PositivityViolation { node, value });
    }
    let c = grid.center();
    if let Some(k) = u[c..].windows(2).position(|w| !(w[1] < w[0])) {
        return Err(Error::ShapeViolation { node: c + k + 1 });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearization::principal_eigenpair;
    use crate::model::{Prototype, PrototypeParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Prototype, Grid, f64) {
        let m = Prototype::new(PrototypeParams::default()).unwrap();
        let g = Grid::default();
        let li = principal_eigenpair(&m, &g).unwrap().lambda_inf;
        (m, g, li)
    }

    #[test]
    fn zero_is_a_solution() {
        let (m, g, li) = setup();
        let st = Stationary::new(&m, &g, li);
        let r = st.residual(0.3, &vec![0.0; g.len()]);
        assert!(r.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let (m, g, li) = setup();
        let st = Stationary::new(&m, &g, li);
        let lam = 0.4;
        let u = st.initial_guess(lam, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let jv = st.jacobian(lam, &u).matvec(&v);
        let err = |eps: f64| {
            let up: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + eps * b).collect();
            let um: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - eps * b).collect();
            let (rp, rm) = (st.residual(lam, &up), st.residual(lam, &um));
            (0..g.len())
                .map(|j| ((rp[j] - rm[j]) / (2.0 * eps) - jv[j]).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(1e-3), err(5e-4));
        assert!(e1 < 1e-5, "{e1}");
        assert!(e1 / e2 > 3.0, "{e1} {e2}");
    }

    #[test]
    fn jacobian_at_zero_is_shifted_laplacian() {
        let (m, g, li) = setup();
        let st = Stationary::new(&m, &g, li).with_config(NewtonConfig {
            closure: Closure::Dirichlet,
            ..Default::default()
        });
        let j = st.jacobian(0.3, &vec![0.0; g.len()]);
        let inv = 1.0 / (g.spacing() * g.spacing());
        assert!(j.diag.iter().all(|d| (d + 2.0 * inv + 0.3).abs() < 1e-9));
        assert!(j.lower.iter().chain(&j.upper).all(|o| *o == inv));
    }

    #[test]
    fn lambda_out_of_window_is_rejected() {
        let (m, g, li) = setup();
        let st = Stationary::new(&m, &g, li);
        let guess = vec![1.0; g.len()];
        for lam in [0.0, -0.1, li, li + 0.1] {
            assert!(matches!(st.solve(lam, &guess), Err(Error::LambdaOutOfRange { .. })));
        }
    }

    #[test]
    fn mid_curve_solution() {
        let (m, g, li) = setup();
        let st = Stationary::new(&m, &g, li);
        let lam = 0.5 * li;
        // reach mid-curve by a few continuation steps from the small-lambda seed
        let mut u = st.initial_guess(0.05 * li, 1.0);
        for k in 1..=10 {
            let l = li * (0.05 + 0.045 * k as f64);
            u = st.solve(l, &u).unwrap().u;
        }
        let w = st.solve(lam, &u).unwrap();
        assert!(w.residual_inf < 1e-9);
        assert!(
            (w.decay_ratio + lam.sqrt()).abs() < 0.01 * lam.sqrt(),
            "{}",
            w.decay_ratio
        );
        let n = g.len();
        assert!((0..n).all(|j| w.u[j] == w.u[n - 1 - j]));
        let ids = st.identities(&w);
        assert!(ids.energy < 1e-5, "{ids:?}");
        assert!(ids.pohozaev < 1e-5, "{ids:?}");
        let smin = st.jacobian(lam, &w.u).smallest_singular_value(30).unwrap();
        assert!(smin > 1e-4, "{smin}");
        let env = st.decay_envelope(&w, &crate::model::logspace(1e-6, 1e6, 200));
        assert!(env.r_eps.is_some());
        assert!(env.worst_excess.unwrap() <= 0.0, "{env:?}");
    }

    #[test]
    fn distinct_guesses_reach_the_same_wave() {
        let (m, g, li) = setup();
        let st = Stationary::new(&m, &g, li);
        let lam = 0.1 * li;
        let base = st.initial_guess(lam, 1.0);
        let reference = st.solve(lam, &base).unwrap();
        for (scale, width) in [(0.7, 1.0), (1.3, 1.0), (1.0, 0.8), (1.0, 1.25), (0.9, 1.1)] {
            let k = lam.sqrt() * width;
            let amp = reference.sup() * scale;
            let guess = g.sample(|x| amp / (k * x).cosh().powi(2));
            let w = st.solve(lam, &guess).unwrap();
            let d =
                w.u.iter()
                    .zip(&reference.u)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
            assert!(d < 1e-6, "{d}");
        }
    }

    #[test]
    fn saturated_limit_of_the_residual() {
        // with f frozen at f_inf the residual at (lambda_inf, phi_inf) vanishes
        let m = Prototype::new(PrototypeParams::default()).unwrap();
        let g = Grid::default();
        let p = principal_eigenpair(&m, &g).unwrap();
        struct Frozen<'a>(&'a Prototype);
        impl Nonlinearity for Frozen<'_> {
            fn f(&self, x: f64, _: f64) -> f64 {
                self.0.f_inf(x)
            }
            fn d1f(&self, x: f64, _: f64) -> f64 {
                self.0.potential_derivative(x)
            }
            fn d2f(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn antiderivative(&self, x: f64, s: f64) -> f64 {
                self.0.f_inf(x) * s
            }
            fn f_inf(&self, x: f64) -> f64 {
                self.0.f_inf(x)
            }
            fn bound(&self) -> f64 {
                1.0
            }
        }
        let frozen = Frozen(&m);
        let st = Stationary::new(&frozen, &g, f64::INFINITY).with_config(NewtonConfig {
            closure: Closure::Dirichlet,
            ..Default::default()
        });
        let r = st.residual(p.lambda_grid, &p.phi_inf);
        let n = g.len();
        assert!(max_abs(&r[1..n - 1]) < 1e-8, "{}", max_abs(&r));
    }
}
