//! Tridiagonal kernels: LU with partial pivoting, Sturm-sequence bisection and
//! inverse iteration for symmetric tridiagonal eigenproblems.

use crate::error::{Error, Result};

/// General tridiagonal matrix. `lower[i]` is `A[i+1][i]`, `upper[i]` is `A[i][i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len() + 1, diag.len());
        assert_eq!(upper.len() + 1, diag.len());
        Self { lower, diag, upper }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.lower[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc += self.upper[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.upper.clone(), self.diag.clone(), self.lower.clone())
    }

    pub fn factor(&self) -> Result<TridiagonalLu> {
        TridiagonalLu::new(self)
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.factor()?.solve(rhs))
    }

    /// Smallest singular value by inverse iteration on `A^T A`.
    pub fn smallest_singular_value(&self, iterations: usize) -> Result<f64> {
        let lu = self.factor()?;
        let lut = self.transpose().factor()?;
        let n = self.len();
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i as f64) * 0.7).sin()).collect();
        normalize(&mut x);
        let mut sigma = f64::NAN;
        for _ in 0..iterations {
            let y = lu.solve(&lut.solve(&x));
            let ny = norm(&y);
            let next = 1.0 / ny.sqrt();
            x = y.iter().map(|v| v / ny).collect();
            if (next - sigma).abs() < 1e-12 * next {
                return Ok(next);
            }
            sigma = next;
        }
        Ok(sigma)
    }
}

/// LU factors of a tridiagonal matrix with row interchanges (LAPACK `gttrf` layout).
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn new(a: &Tridiagonal) -> Result<Self> {
        let n = a.len();
        let mut dl = a.lower.clone();
        let mut d = a.diag.clone();
        let mut du = a.upper.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    return Err(Error::Singular { row: i });
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            return Err(Error::Singular { row: n - 1 });
        }
        Ok(Self {
            dl,
            d,
            du,
            du2,
            swapped,
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        if n == 0 {
            return b;
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        b
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn normalize(v: &mut [f64]) {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc += self.off[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.matvec(v))
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn norm_inf(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    fn pivmin(&self) -> f64 {
        let m = self.off.iter().fold(1.0_f64, |m, e| m.max(e * e));
        f64::MIN_POSITIVE * m
    }

    /// Number of eigenvalues strictly below `mu` (Sturm sequence count).
    pub fn count_below(&self, mu: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.diag[0] - mu;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            q = self.diag[i] - mu - self.off[i - 1] * self.off[i - 1] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.len());
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + self.pivmin();
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    fn shifted(&self, mu: f64) -> Tridiagonal {
        Tridiagonal::new(
            self.off.clone(),
            self.diag.iter().map(|d| d - mu).collect(),
            self.off.clone(),
        )
    }

    /// Eigenvector from the twisted factorization of `A - mu I`.
    ///
    /// Components are built as products of pivot ratios, so exponentially small
    /// tails keep their relative accuracy (and sign).
    pub fn twisted_eigenvector(&self, mu: f64) -> Vec<f64> {
        let n = self.len();
        if n == 1 {
            return vec![1.0];
        }
        let pivmin = self.pivmin();
        let guard = |q: f64| if q.abs() < pivmin { -pivmin } else { q };
        let mut fwd = vec![0.0; n];
        let mut bwd = vec![0.0; n];
        fwd[0] = guard(self.diag[0] - mu);
        for i in 1..n {
            fwd[i] = guard(self.diag[i] - mu - self.off[i - 1] * self.off[i - 1] / fwd[i - 1]);
        }
        bwd[n - 1] = guard(self.diag[n - 1] - mu);
        for i in (0..n - 1).rev() {
            bwd[i] = guard(self.diag[i] - mu - self.off[i] * self.off[i] / bwd[i + 1]);
        }
        let k = (0..n)
            .min_by(|&i, &j| {
                let gi = (fwd[i] + bwd[i] - (self.diag[i] - mu)).abs();
                let gj = (fwd[j] + bwd[j] - (self.diag[j] - mu)).abs();
                gi.total_cmp(&gj)
            })
            .unwrap_or(0);
        let mut z = vec![0.0; n];
        z[k] = 1.0;
        for i in (0..k).rev() {
            z[i] = -self.off[i] * z[i + 1] / fwd[i];
        }
        for i in k + 1..n {
            z[i] = -self.off[i - 1] * z[i - 1] / bwd[i];
        }
        normalize(&mut z);
        z
    }

    /// Eigenvector for an accurately known eigenvalue `mu`, orthogonalized
    /// against `previous` (vectors of nearby eigenvalues).
    pub fn eigenvector(&self, mu: f64, previous: &[&[f64]], tol: f64) -> Result<(Vec<f64>, f64)> {
        let n = self.len();
        if previous.is_empty() {
            let z = self.twisted_eigenvector(mu);
            let r = self.residual(&z, mu);
            if r < tol && z.iter().all(|v| v.is_finite()) {
                return Ok((z, r));
            }
        }
        let scale = self.norm_inf().max(f64::MIN_POSITIVE);
        let mut shifts = Vec::new();
        let mut shift = mu;
        for attempt in 0..4 {
            // perturb an exact eigenvalue off the singular point
            let perturbed = shift + (attempt as f64 + 1.0) * 4.0 * f64::EPSILON * scale;
            shifts.push(perturbed);
            let lu = match self.shifted(perturbed).factor() {
                Ok(lu) => lu,
                Err(_) => {
                    shift += 16.0 * f64::EPSILON * scale;
                    continue;
                }
            };
            let mut x: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_75).fract())
                .collect();
            normalize(&mut x);
            for _ in 0..8 {
                for p in previous {
                    let c = dot(&x, p);
                    x.iter_mut().zip(p.iter()).for_each(|(a, b)| *a -= c * b);
                }
                let mut y = lu.solve(&x);
                if y.iter().any(|v| !v.is_finite()) {
                    break;
                }
                for p in previous {
                    let c = dot(&y, p);
                    y.iter_mut().zip(p.iter()).for_each(|(a, b)| *a -= c * b);
                }
                normalize(&mut y);
                x = y;
                let r = self.residual(&x, mu);
                if r < tol {
                    return Ok((x, r));
                }
            }
            shift = mu;
        }
        Err(Error::EigenNonConvergence { size: n, shifts })
    }

    /// `||A v - mu v|| / ||v||`.
    pub fn residual(&self, v: &[f64], mu: f64) -> f64 {
        let av = self.matvec(v);
        let r: f64 = av.iter().zip(v).map(|(a, x)| (a - mu * x).powi(2)).sum::<f64>().sqrt();
        r / norm(v)
    }

    /// The `count` smallest eigenpairs, vectors normalized in the Euclidean norm.
    pub fn lowest_eigenpairs(&self, count: usize, tol: f64) -> Result<Vec<EigenPair>> {
        let scale = self.norm_inf();
        let mut pairs: Vec<EigenPair> = Vec::with_capacity(count);
        for k in 0..count.min(self.len()) {
            let mu = self.eigenvalue(k);
            // orthogonalize against the cluster of close eigenvalues
            let cluster: Vec<&[f64]> = pairs
                .iter()
                .filter(|p| (p.value - mu).abs() < 1e-3 * scale)
                .map(|p| p.vector.as_slice())
                .collect();
            let (vector, residual) = self.eigenvector(mu, &cluster, tol)?;
            pairs.push(EigenPair {
                value: mu,
                vector,
                residual,
            });
        }
        Ok(pairs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}
