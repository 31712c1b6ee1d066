//! The self-adjoint operators governing stability of a standing wave,
//!
//! `L1 v = -v'' - [f + 2 d2f u^2] v + lambda v` and `L2 v = -v'' - f v + lambda v`,
//!
//! and the two spectral conditions: `L1` has exactly one negative eigenvalue
//! and trivial kernel, and `L2` is non-negative with kernel spanned by `u`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::discretization::Grid;
use crate::error::Result;
use crate::linalg::{dot, norm, SymTridiagonal};
use crate::linearization::{tridiag_spectrum, SpectrumReport};
use crate::model::Nonlinearity;
use crate::stationary::{Closure, StandingWave};

/// Symmetric matrices of both operators.
///
/// With [`Closure::Robin`] the matrices act on all nodes and carry the
/// exponential-decay rows of the stationary problem, symmetrized by the square
/// roots of the trapezoid end weights; `u` is then a discrete kernel vector of
/// `L2` exactly. With [`Closure::Dirichlet`] they act on the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityOperators {
    pub l1: SymTridiagonal,
    pub l2: SymTridiagonal,
    pub closure: Closure,
    /// Bottom of the essential spectrum of both operators, `lambda`.
    pub essential_threshold: f64,
    /// `h^2 max |f + 2 d2f u^2|`.
    pub kernel_tol: f64,
}

impl StabilityOperators {
    /// Maps a grid field to the coordinates the matrices act on.
    pub fn embed(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        match self.closure {
            Closure::Dirichlet => u[1..n - 1].to_vec(),
            Closure::Robin => {
                let mut v = u.to_vec();
                v[0] *= FRAC_1_SQRT_2;
                v[n - 1] *= FRAC_1_SQRT_2;
                v
            }
        }
    }
}

/// Assembles both operators at a converged wave.
pub fn assemble<M: Nonlinearity + ?Sized>(
    wave: &StandingWave,
    model: &M,
    grid: &Grid,
    closure: Closure,
) -> StabilityOperators {
    let x = grid.nodes();
    let n = grid.len();
    let h = grid.spacing();
    let inv = 1.0 / (h * h);
    let lam = wave.lambda;
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    let mut pot_max = 0.0_f64;
    for j in 0..n {
        let s = wave.u[j] * wave.u[j];
        let f = model.f(x[j], s);
        let full = f + 2.0 * model.d2f(x[j], s) * s;
        pot_max = pot_max.max(full.abs());
        d1.push(2.0 * inv - full + lam);
        d2.push(2.0 * inv - f + lam);
    }
    let mut off = vec![-inv; n - 1];
    match closure {
        Closure::Dirichlet => {
            for d in [&mut d1, &mut d2] {
                d.pop();
                d.remove(0);
            }
            off.truncate(n - 3);
        }
        Closure::Robin => {
            let wall = 2.0 * lam.sqrt() / h;
            for d in [&mut d1, &mut d2] {
                d[0] += wall;
                d[n - 1] += wall;
            }
            off[0] *= SQRT_2;
            off[n - 2] *= SQRT_2;
        }
    }
    StabilityOperators {
        l1: SymTridiagonal::new(d1, off.clone()),
        l2: SymTridiagonal::new(d2, off),
        closure,
        essential_threshold: lam,
        kernel_tol: h * h * pot_max,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S1Report {
    pub morse: usize,
    pub lowest: Option<f64>,
    pub second: Option<f64>,
    pub kernel_dimension: usize,
    pub pass: bool,
    #[serde(skip)]
    pub spectrum: Option<SpectrumReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S2Report {
    pub mu0: Option<f64>,
    /// `|<v0, u>| / (|v0| |u|)` in the operator coordinates.
    pub overlap: f64,
    /// Euclidean distance between `v0` and `u / |u|` after sign alignment.
    pub distance: f64,
    /// `|L2 u| / |u|`.
    pub kernel_residual: f64,
    pub morse: usize,
    pub kernel_dimension: usize,
    pub pass: bool,
}

/// Exactly one eigenvalue below `-kernel_tol` and none in the kernel band.
pub fn check_s1(ops: &StabilityOperators) -> Result<S1Report> {
    let r = tridiag_spectrum(&ops.l1.diag, &ops.l1.off, ops.essential_threshold, ops.kernel_tol)?;
    let lowest = r.discrete_eigenvalues.first().copied();
    let second = r.discrete_eigenvalues.get(1).copied();
    let pass = r.morse_index == 1
        && r.kernel_dimension() == 0
        && lowest.is_some_and(|m| m < 0.0)
        && second.is_none_or(|m| m > ops.kernel_tol);
    Ok(S1Report {
        morse: r.morse_index,
        lowest,
        second,
        kernel_dimension: r.kernel_dimension(),
        pass,
        spectrum: Some(r),
    })
}

/// Lowest eigenvalue of `L2` in the kernel band with eigenvector along `u`,
/// and no further kernel candidate.
pub fn check_s2(ops: &StabilityOperators, wave: &StandingWave) -> Result<S2Report> {
    let r = tridiag_spectrum(&ops.l2.diag, &ops.l2.off, ops.essential_threshold, ops.kernel_tol)?;
    let embedded = ops.embed(&wave.u);
    let u = &embedded[..];
    let un = norm(u);
    let kernel_residual = norm(&ops.l2.matvec(u)) / un;
    let (mu0, overlap, distance) = match (r.discrete_eigenvalues.first(), r.eigenvectors.first()) {
        (Some(&mu), Some(v)) => {
            let c = dot(v, u) / (norm(v) * un);
            let sign = c.signum();
            let d = v
                .iter()
                .zip(u)
                .map(|(a, b)| (sign * a / norm(v) - b / un).powi(2))
                .sum::<f64>()
                .sqrt();
            (Some(mu), c.abs(), d)
        }
        _ => (None, 0.0, f64::INFINITY),
    };
    let pass = mu0.is_some_and(|m| m.abs() < ops.kernel_tol)
        && r.morse_index == 0
        && r.kernel_dimension() == 1
        && distance < 1e-4;
    Ok(S2Report {
        mu0,
        overlap,
        distance,
        kernel_residual,
        morse: r.morse_index,
        kernel_dimension: r.kernel_dimension(),
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSpectrum {
    pub lambda: f64,
    #[serde(rename = "L1")]
    pub l1: S1Report,
    #[serde(rename = "L2")]
    pub l2: S2Report,
    pub kernel_tol: f64,
    pub pass_s1: bool,
    pub pass_s2: bool,
}

/// Both spectral checks at one branch point.
pub fn analyze<M: Nonlinearity + ?Sized>(
    wave: &StandingWave,
    model: &M,
    grid: &Grid,
    closure: Closure,
) -> Result<PointSpectrum> {
    let ops = assemble(wave, model, grid, closure);
    let l1 = check_s1(&ops)?;
    let l2 = check_s2(&ops, wave)?;
    Ok(PointSpectrum {
        lambda: wave.lambda,
        pass_s1: l1.pass,
        pass_s2: l2.pass,
        kernel_tol: ops.kernel_tol,
        l1,
        l2,
    })
}
