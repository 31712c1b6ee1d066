//! Time evolution of `i psi_t + psi_xx + f(x, |psi|^2) psi = 0` by Strang
//! splitting, and the phase-orbit distance to a standing wave.
//!
//! The kinetic flow is exact in Fourier space on the periodic closure of the
//! grid (the last node duplicates the first); the nonlinear flow is an exact
//! pointwise phase rotation because it preserves `|psi|`.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::discretization::Grid;
use crate::error::{Error, Result};
use crate::model::Nonlinearity;
use crate::stationary::StandingWave;

/// Fourier multiplier representing `-d^2/dx^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KineticSymbol {
    /// `k^2`: the continuum second derivative.
    Spectral,
    /// `(4/h^2) sin^2(k h / 2)`: the 3-point stencil, under which the
    /// stationary profiles of this crate are exact equilibria.
    #[default]
    FiniteDifference,
}

impl KineticSymbol {
    fn eval(self, k: f64, h: f64) -> f64 {
        match self {
            KineticSymbol::Spectral => k * k,
            KineticSymbol::FiniteDifference => {
                let s = (0.5 * k * h).sin();
                4.0 * s * s / (h * h)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    /// Samples on all grid nodes; the last equals the first.
    pub psi: Vec<Complex64>,
    pub mass: f64,
    pub energy: f64,
}

/// Strang-split propagator for a fixed model, grid and time step.
pub struct SplitStep<'a, M: Nonlinearity + ?Sized> {
    model: &'a M,
    grid: &'a Grid,
    dt: f64,
    symbol: KineticSymbol,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `exp(-i dt sigma(k))`, already divided by the transform length.
    propagator: Vec<Complex64>,
    sigma: Vec<f64>,
}

impl<'a, M: Nonlinearity + ?Sized> SplitStep<'a, M> {
    pub fn new(model: &'a M, grid: &'a Grid, dt: f64, symbol: KineticSymbol) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let m = grid.len() - 1;
        let h = grid.spacing();
        let period = m as f64 * h;
        let mut planner = FftPlanner::new();
        let sigma: Vec<f64> = (0..m)
            .map(|j| {
                let q = if j <= m / 2 { j as f64 } else { j as f64 - m as f64 };
                symbol.eval(2.0 * std::f64::consts::PI * q / period, h)
            })
            .collect();
        let propagator = sigma
            .iter()
            .map(|s| Complex64::from_polar(1.0 / m as f64, -dt * s))
            .collect();
        Ok(Self {
            model,
            grid,
            dt,
            symbol,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
            propagator,
            sigma,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn symbol(&self) -> KineticSymbol {
        self.symbol
    }

    pub fn state(&self, t: f64, psi: Vec<Complex64>) -> FieldState {
        FieldState {
            t,
            mass: self.mass(&psi),
            energy: self.energy(&psi),
            psi,
        }
    }

    fn rotate(&self, psi: &mut [Complex64], tau: f64) {
        let x = self.grid.nodes();
        for (j, p) in psi.iter_mut().enumerate() {
            *p *= Complex64::from_polar(1.0, tau * self.model.f(x[j], p.norm_sqr()));
        }
    }

    fn kinetic(&self, psi: &mut [Complex64]) {
        self.forward.process(psi);
        for (p, g) in psi.iter_mut().zip(&self.propagator) {
            *p *= g;
        }
        self.inverse.process(psi);
    }

    /// Advances `steps` time steps in place.
    pub fn advance(&self, state: &mut FieldState, steps: usize) {
        let m = self.grid.len() - 1;
        let psi = &mut state.psi[..m];
        self.rotate(psi, 0.5 * self.dt);
        for k in 0..steps {
            self.kinetic(psi);
            // consecutive half rotations merge into one full rotation
            let tau = if k + 1 == steps { 0.5 * self.dt } else { self.dt };
            self.rotate(psi, tau);
        }
        state.psi[m] = state.psi[0];
        state.t += steps as f64 * self.dt;
        state.mass = self.mass(&state.psi);
        state.energy = self.energy(&state.psi);
    }

    /// One Strang step.
    pub fn step(&self, state: &FieldState) -> FieldState {
        let mut next = state.clone();
        self.advance(&mut next, 1);
        next
    }

    /// `h sum |psi|^2` over one period.
    pub fn mass(&self, psi: &[Complex64]) -> f64 {
        let m = self.grid.len() - 1;
        self.grid.spacing() * psi[..m].iter().map(|p| p.norm_sqr()).sum::<f64>()
    }

    /// `int |psi'|^2 - F(x, |psi|^2)` with the kinetic part measured by the
    /// same symbol the propagator uses.
    pub fn energy(&self, psi: &[Complex64]) -> f64 {
        let m = self.grid.len() - 1;
        let h = self.grid.spacing();
        let mut hat = psi[..m].to_vec();
        self.forward.process(&mut hat);
        let kinetic = h / m as f64 * hat.iter().zip(&self.sigma).map(|(p, s)| s * p.norm_sqr()).sum::<f64>();
        let x = self.grid.nodes();
        let potential = h
            * (0..m)
                .map(|j| self.model.antiderivative(x[j], psi[j].norm_sqr()))
                .sum::<f64>();
        kinetic - potential
    }
}

/// `inf_theta |psi - e^{i theta} u|_{H1}` and its minimizer
/// `theta = arg <psi, u>_{H1}`.
pub fn orbit_distance(psi: &[Complex64], u: &[f64], grid: &Grid) -> (f64, f64) {
    let dpsi = grid.derivative_complex(psi);
    let du = grid.derivative(u);
    let mut inner = Complex64::new(0.0, 0.0);
    for j in 0..u.len() {
        inner += grid.weight(j) * (psi[j] * u[j] + dpsi[j] * du[j]);
    }
    let theta = inner.arg();
    let phase = Complex64::from_polar(1.0, theta);
    let diff: Vec<Complex64> = psi.iter().zip(u).map(|(p, v)| p - phase * v).collect();
    (grid.norms_complex(&diff).h1, theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Fixed perturbation shapes of unit `H1` norm.
pub fn perturbation_shape(grid: &Grid, parity: Parity) -> Vec<f64> {
    let mut eta = match parity {
        Parity::Even => grid.sample(|x| (-0.25 * x * x).exp() * (1.0 - 0.25 * x * x)),
        Parity::Odd => grid.sample(|x| x * (-0.25 * x * x).exp()),
    };
    let n = grid.norms(&eta).h1;
    eta.iter_mut().for_each(|v| *v /= n);
    eta
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub delta: f64,
    pub parity: Parity,
    pub t_final: f64,
    pub dt: f64,
    pub sample_interval: f64,
    pub symbol: KineticSymbol,
    /// Relative mass drift that invalidates a run.
    pub mass_tol: f64,
    /// Relative energy drift that invalidates a run.
    pub energy_tol: f64,
    /// Width of the boundary layer `|x| > R - width` whose mass is monitored.
    pub boundary_width: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            delta: 1e-3,
            parity: Parity::Even,
            t_final: 50.0,
            dt: 1e-3,
            sample_interval: 0.1,
            symbol: KineticSymbol::FiniteDifference,
            mass_tol: 1e-8,
            energy_tol: 1e-5,
            boundary_width: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub lambda: f64,
    pub delta: f64,
    pub parity: Parity,
    pub times: Vec<f64>,
    pub distance: Vec<f64>,
    pub theta_opt: Vec<f64>,
    pub mass_drift: Vec<f64>,
    pub energy_drift: Vec<f64>,
    /// `|u|_{H1}` of the unperturbed wave.
    pub wave_h1: f64,
    /// Largest mass found in the boundary layer.
    pub max_boundary_mass: f64,
}

impl OrbitRecord {
    pub fn max_distance(&self) -> f64 {
        self.distance.iter().copied().fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,distance,theta_opt,mass_drift,energy_drift")?;
        for k in 0..self.times.len() {
            writeln!(
                out,
                "{:.6},{:.17e},{:.17e},{:.6e},{:.6e}",
                self.times[k], self.distance[k], self.theta_opt[k], self.mass_drift[k], self.energy_drift[k]
            )?;
        }
        Ok(())
    }
}

/// Evolves `u + delta eta` and records the orbit distance at every sample time.
pub fn stability_experiment<M: Nonlinearity + ?Sized>(
    wave: &StandingWave,
    model: &M,
    grid: &Grid,
    cfg: &ExperimentConfig,
) -> Result<OrbitRecord> {
    let prop = SplitStep::new(model, grid, cfg.dt, cfg.symbol)?;
    let eta = perturbation_shape(grid, cfg.parity);
    let n = grid.len();
    let mut psi: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(wave.u[j] + cfg.delta * eta[j], 0.0))
        .collect();
    psi[n - 1] = psi[0];
    let mut state = prop.state(0.0, psi);
    let (m0, e0) = (state.mass, state.energy);
    let per_sample = (cfg.sample_interval / cfg.dt).round().max(1.0) as usize;
    let samples = (cfg.t_final / (per_sample as f64 * cfg.dt)).round() as usize;
    let x = grid.nodes();
    let edge = grid.radius() - cfg.boundary_width;

    let mut rec = OrbitRecord {
        lambda: wave.lambda,
        delta: cfg.delta,
        parity: cfg.parity,
        times: Vec::with_capacity(samples + 1),
        distance: Vec::with_capacity(samples + 1),
        theta_opt: Vec::with_capacity(samples + 1),
        mass_drift: Vec::with_capacity(samples + 1),
        energy_drift: Vec::with_capacity(samples + 1),
        wave_h1: grid.norms(&wave.u).h1,
        max_boundary_mass: 0.0,
    };
    for k in 0..=samples {
        if k > 0 {
            prop.advance(&mut state, per_sample);
        }
        let (d, theta) = orbit_distance(&state.psi, &wave.u, grid);
        let md = (state.mass - m0).abs() / m0;
        let ed = (state.energy - e0).abs() / e0.abs();
        let boundary: Vec<f64> = (0..n)
            .map(|j| {
                if x[j].abs() > edge {
                    state.psi[j].norm_sqr()
                } else {
                    0.0
                }
            })
            .collect();
        rec.max_boundary_mass = rec.max_boundary_mass.max(grid.integrate(&boundary));
        rec.times.push(state.t);
        rec.distance.push(d);
        rec.theta_opt.push(theta);
        rec.mass_drift.push(md);
        rec.energy_drift.push(ed);
        if md > cfg.mass_tol {
            return Err(Error::IntegratorDrift {
                quantity: "mass",
                drift: md,
                limit: cfg.mass_tol,
            });
        }
        if ed > cfg.energy_tol {
            return Err(Error::IntegratorDrift {
                quantity: "energy",
                drift: ed,
                limit: cfg.energy_tol,
            });
        }
    }
    Ok(rec)
}

/// `sigma / sqrt(sigma^2 + 2 i t) exp(-x^2 / (2 (sigma^2 + 2 i t)))`, the free
/// evolution of `exp(-x^2 / (2 sigma^2))`.
pub fn free_gaussian(x: f64, t: f64, sigma: f64) -> Complex64 {
    let z = Complex64::new(sigma * sigma, 2.0 * t);
    sigma / z.sqrt() * (-(x * x) / (2.0 * z)).exp()
}
