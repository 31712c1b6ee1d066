//! Planar TE waveguide reading of the branch.
//!
//! A guided mode `E = U(x) e^{i(kz - wt)}` of a self-focusing dielectric
//! `eps_L + eps_NL(x, |E|^2)` has an envelope solving the stationary problem
//! with `f(x, s) = (w/c)^2 eps_NL(x, s/2)` and `lambda = k^2 - (w/c)^2 eps_L`.
//! Units are normalized so that `c = 1`; `omega_over_c` is then also `w`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaveguideParams {
    pub omega_over_c: f64,
    pub eps_l: f64,
}

impl Default for WaveguideParams {
    fn default() -> Self {
        Self {
            omega_over_c: 1.0,
            eps_l: 1.0,
        }
    }
}

impl WaveguideParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("omega_over_c", self.omega_over_c), ("eps_l", self.eps_l)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    constraint: "(> 0)",
                });
            }
        }
        Ok(())
    }

    /// `(w/c)^2 eps_L`.
    fn linear_term(&self) -> f64 {
        self.omega_over_c * self.omega_over_c * self.eps_l
    }

    /// `lambda(k) = k^2 - (w/c)^2 eps_L`.
    pub fn lambda_of_k(&self, k: f64) -> f64 {
        k * k - self.linear_term()
    }

    pub fn k_of_lambda(&self, lambda: f64) -> f64 {
        (lambda + self.linear_term()).sqrt()
    }

    /// `eps_NL(x, s) = (c/w)^2 f(x, 2s)` for a given `f`.
    pub fn nonlinear_permittivity(&self, f: impl Fn(f64, f64) -> f64, x: f64, s: f64) -> f64 {
        f(x, 2.0 * s) / (self.omega_over_c * self.omega_over_c)
    }

    /// `P = (c^2 k / 2w) int U^2`.
    pub fn power(&self, k: f64, mass: f64) -> f64 {
        k / (2.0 * self.omega_over_c) * mass
    }
}

/// `(k1, k3) = ((w/c) sqrt(eps_L), sqrt((w/c)^2 eps_L + lambda_inf))`.
pub fn k_window(params: &WaveguideParams, lambda_inf: f64) -> (f64, f64) {
    (
        params.omega_over_c * params.eps_l.sqrt(),
        (params.linear_term() + lambda_inf).sqrt(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    pub k: f64,
    pub lambda: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    pub k1: f64,
    pub k3: f64,
    pub lambda_inf: f64,
    pub points: Vec<DispersionPoint>,
    /// Inputs that fell outside the guided window.
    pub skipped: Vec<String>,
}

impl Dispersion {
    pub fn power_increasing(&self) -> bool {
        self.points.windows(2).all(|w| w[0].power < w[1].power)
    }

    /// `k,lambda,power` rows after a comment line holding the window as JSON.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header = serde_json::json!({"k1": self.k1, "k3": self.k3, "lambda_inf": self.lambda_inf});
        writeln!(out, "# {header}")?;
        writeln!(out, "k,lambda,power")?;
        for p in &self.points {
            writeln!(out, "{:.17e},{:.17e},{:.17e}", p.k, p.lambda, p.power)?;
        }
        Ok(())
    }
}

/// Maps branch samples `(lambda, int u^2)` to the power-dispersion curve.
pub fn dispersion_curve(samples: &[(f64, f64)], params: &WaveguideParams, lambda_inf: f64) -> Result<Dispersion> {
    params.validate()?;
    let (k1, k3) = k_window(params, lambda_inf);
    let mut points = Vec::with_capacity(samples.len());
    let mut skipped = Vec::new();
    for &(lambda, mass) in samples {
        if !(lambda > 0.0 && lambda < lambda_inf) {
            skipped.push(format!("lambda = {lambda} outside (0, {lambda_inf})"));
            continue;
        }
        let k = params.k_of_lambda(lambda);
        points.push(DispersionPoint {
            k,
            lambda,
            power: params.power(k, mass),
        });
    }
    points.sort_by(|a, b| a.k.total_cmp(&b.k));
    Ok(Dispersion {
        k1,
        k3,
        lambda_inf,
        points,
        skipped,
    })
}
