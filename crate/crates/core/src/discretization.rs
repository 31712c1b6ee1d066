//! Symmetric truncated grid on `[-R, R]` with second-order stencils and
//! trapezoid quadrature.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid with an odd number of nodes so that `x = 0` is a node.
///
/// Nodes are stored as `(j - c) h` with `c = (N - 1) / 2`, which makes the
/// grid exactly symmetric: `x[c + k] == -x[c - k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    radius: f64,
    points: usize,
    spacing: f64,
    #[serde(skip)]
    nodes: Vec<f64>,
}

pub const DEFAULT_RADIUS: f64 = 40.0;
pub const DEFAULT_POINTS: usize = 4001;

impl Default for Grid {
    fn default() -> Self {
        Self::new(DEFAULT_RADIUS, DEFAULT_POINTS).expect("default grid is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l2: f64,
    pub linf: f64,
    pub h1: f64,
}

impl Grid {
    pub fn new(radius: f64, points: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidGrid(format!("radius must be positive, got {radius}")));
        }
        if points < 3 || points % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "number of points must be odd and at least 3, got {points}"
            )));
        }
        let spacing = 2.0 * radius / (points - 1) as f64;
        let c = (points - 1) / 2;
        let nodes = (0..points).map(|j| (j as f64 - c as f64) * spacing).collect();
        Ok(Self {
            radius,
            points,
            spacing,
            nodes,
        })
    }

    /// Same radius, spacing halved.
    pub fn refined(&self) -> Self {
        Self::new(self.radius, 2 * self.points - 1).expect("refinement of a valid grid")
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Index of the node `x = 0`.
    pub fn center(&self) -> usize {
        (self.points - 1) / 2
    }

    pub fn sample(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| g(x)).collect()
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if n != self.points {
            return Err(Error::LengthMismatch {
                expected: self.points,
                got: n,
            });
        }
        Ok(())
    }

    /// 3-point second difference with zero-Dirichlet ghosts at both ends.
    ///
    /// Stationary operators assemble their own boundary rows; this is the bare stencil.
    pub fn second_derivative(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let inv = 1.0 / (self.spacing * self.spacing);
        (0..n)
            .map(|j| {
                let left = if j > 0 { u[j - 1] } else { 0.0 };
                let right = if j + 1 < n { u[j + 1] } else { 0.0 };
                (left - 2.0 * u[j] + right) * inv
            })
            .collect()
    }

    /// Central differences in the interior, one-sided second-order at the ends.
    pub fn derivative(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let h = self.spacing;
        (0..n)
            .map(|j| {
                if j == 0 {
                    (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
                } else if j == n - 1 {
                    (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h)
                } else {
                    (u[j + 1] - u[j - 1]) / (2.0 * h)
                }
            })
            .collect()
    }

    pub fn derivative_complex(&self, u: &[Complex64]) -> Vec<Complex64> {
        let n = u.len();
        let h = self.spacing;
        (0..n)
            .map(|j| {
                if j == 0 {
                    (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
                } else if j == n - 1 {
                    (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h)
                } else {
                    (u[j + 1] - u[j - 1]) / (2.0 * h)
                }
            })
            .collect()
    }

    /// Trapezoid weight of node `j`.
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.points {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    /// Trapezoid rule over the whole grid.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        g.iter().enumerate().map(|(j, v)| self.weight(j) * v).sum()
    }

    /// Trapezoid rule over the nodes `x >= 0`.
    pub fn half_line_integral(&self, g: &[f64]) -> f64 {
        let c = self.center();
        let h = self.spacing;
        let n = self.points;
        let mut acc = 0.5 * (g[c] + g[n - 1]);
        acc += g[c + 1..n - 1].iter().sum::<f64>();
        acc * h
    }

    /// `int_0^inf (u')^2` with forward differences on the cells of `x >= 0`.
    ///
    /// This is the summation-by-parts partner of the 3-point second difference,
    /// so energy-type identities hold on the grid without stencil error.
    pub fn half_line_gradient_energy(&self, u: &[f64]) -> f64 {
        let c = self.center();
        let h = self.spacing;
        u[c..]
            .windows(2)
            .map(|w| {
                let d = (w[1] - w[0]) / h;
                d * d
            })
            .sum::<f64>()
            * h
    }

    /// `L2 = sqrt(trapezoid(u^2))`, `Linf = max |u|`, `H1 = sqrt(L2^2 + L2(u')^2)`.
    pub fn norms(&self, u: &[f64]) -> Norms {
        let l2sq = self.integrate(&u.iter().map(|v| v * v).collect::<Vec<_>>());
        let du = self.derivative(u);
        let d2 = self.integrate(&du.iter().map(|v| v * v).collect::<Vec<_>>());
        Norms {
            l2: l2sq.sqrt(),
            linf: u.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            h1: (l2sq + d2).sqrt(),
        }
    }

    pub fn norms_complex(&self, u: &[Complex64]) -> Norms {
        let l2sq = self.integrate(&u.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>());
        let du = self.derivative_complex(u);
        let d2 = self.integrate(&du.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>());
        Norms {
            l2: l2sq.sqrt(),
            linf: u.iter().fold(0.0_f64, |m, v| m.max(v.norm())),
            h1: (l2sq + d2).sqrt(),
        }
    }

    pub fn l2_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter()
            .zip(v)
            .enumerate()
            .map(|(j, (a, b))| self.weight(j) * a * b)
            .sum()
    }

    /// Writes `x,value` rows.
    pub fn write_real_csv<W: Write>(&self, mut out: W, u: &[f64]) -> Result<()> {
        self.check_len(u.len())?;
        writeln!(out, "x,value")?;
        for (x, v) in self.nodes.iter().zip(u) {
            writeln!(out, "{x:.17e},{v:.17e}")?;
        }
        Ok(())
    }

    /// Writes `x,re,im` rows.
    pub fn write_complex_csv<W: Write>(&self, mut out: W, u: &[Complex64]) -> Result<()> {
        self.check_len(u.len())?;
        writeln!(out, "x,re,im")?;
        for (x, v) in self.nodes.iter().zip(u) {
            writeln!(out, "{x:.17e},{:.17e},{:.17e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Symmetrizes `u` about `x = 0` in place: `u(x) <- (u(x) + u(-x)) / 2`.
pub fn symmetrize(u: &mut [f64]) {
    let n = u.len();
    for j in 0..n / 2 {
        let avg = 0.5 * (u[j] + u[n - 1 - j]);
        u[j] = avg;
        u[n - 1 - j] = avg;
    }
}

/// Linear interpolation of `u` onto the [`Grid::refined`] nodes.
pub fn prolong(u: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * u.len() - 1);
    for w in u.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.extend(u.last());
    out
}

pub fn max_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Reads a two-column `x,value` CSV (comment lines starting with `#` are skipped).
pub fn read_real_csv(text: &str) -> std::result::Result<(Vec<f64>, Vec<f64>), String> {
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
            continue;
        }
        let mut it = line.split(',');
        let parse = |s: Option<&str>| -> std::result::Result<f64, String> {
            s.ok_or_else(|| format!("short row `{line}`"))?
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("{e} in `{line}`"))
        };
        xs.push(parse(it.next())?);
        vs.push(parse(it.next())?);
    }
    Ok((xs, vs))
}
