//! Principal eigenpair of the asymptotic linearization `u'' + f_inf u = lambda u`
//! and the discrete-spectrum report used by the stability checks.

use serde::{Deserialize, Serialize};

use crate::discretization::Grid;
use crate::error::{Error, Result};
use crate::linalg::SymTridiagonal;
use crate::model::Nonlinearity;

/// Absolute residual bound for every reported eigenpair.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-9;

/// Discrete eigenvalues of a self-adjoint operator below its essential threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Sorted ascending.
    pub discrete_eigenvalues: Vec<f64>,
    pub essential_threshold: f64,
    pub kernel_tol: f64,
    /// Count of eigenvalues `< -kernel_tol`.
    pub morse_index: usize,
    /// Indices into `discrete_eigenvalues` with `|mu| < kernel_tol`.
    pub kernel_candidates: Vec<usize>,
    /// `||A v - mu v|| / ||v||` per eigenpair.
    pub residuals: Vec<f64>,
    /// Euclidean-normalized eigenvectors.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
}

impl SpectrumReport {
    pub fn kernel_dimension(&self) -> usize {
        self.kernel_candidates.len()
    }

    pub fn lowest(&self) -> Option<f64> {
        self.discrete_eigenvalues.first().copied()
    }
}

/// All eigenpairs of the symmetric tridiagonal matrix strictly below `threshold`.
pub fn tridiag_spectrum(diag: &[f64], offdiag: &[f64], threshold: f64, kernel_tol: f64) -> Result<SpectrumReport> {
    let a = SymTridiagonal::new(diag.to_vec(), offdiag.to_vec());
    let count = a.count_below(threshold);
    let pairs = a.lowest_eigenpairs(count, EIGEN_RESIDUAL_TOL)?;
    let discrete_eigenvalues: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    let morse_index = discrete_eigenvalues.iter().filter(|&&m| m < -kernel_tol).count();
    let kernel_candidates = discrete_eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, m)| m.abs() < kernel_tol)
        .map(|(i, _)| i)
        .collect();
    Ok(SpectrumReport {
        discrete_eigenvalues,
        essential_threshold: threshold,
        kernel_tol,
        morse_index,
        kernel_candidates,
        residuals: pairs.iter().map(|p| p.residual).collect(),
        eigenvectors: pairs.into_iter().map(|p| p.vector).collect(),
    })
}

/// Symmetric matrix of `-v'' - potential v` on the interior nodes with Dirichlet walls.
pub fn schrodinger_matrix(grid: &Grid, potential: &[f64]) -> SymTridiagonal {
    let n = grid.len();
    let inv = 1.0 / (grid.spacing() * grid.spacing());
    let diag = (1..n - 1).map(|j| 2.0 * inv - potential[j]).collect();
    SymTridiagonal::new(diag, vec![-inv; n - 3])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalEigenpair {
    /// Richardson-extrapolated principal eigenvalue.
    pub lambda_inf: f64,
    /// Eigenvalue on the base grid before extrapolation.
    pub lambda_grid: f64,
    /// Eigenvalue on the refined grid (`h/2`).
    pub lambda_refined: f64,
    /// Positive eigenfunction on the base grid, `L2` norm one, zero at the walls.
    #[serde(skip)]
    pub phi_inf: Vec<f64>,
}

/// Largest eigenvalue of the discretized `u'' + f_inf u` with Dirichlet walls
/// at `+-R`, extrapolated from spacings `h` and `h/2`.
pub fn principal_eigenpair<M: Nonlinearity + ?Sized>(model: &M, grid: &Grid) -> Result<PrincipalEigenpair> {
    principal_eigenpair_of(grid, |x| model.f_inf(x))
}

/// [`principal_eigenpair`] for an arbitrary bounded potential profile.
pub fn principal_eigenpair_of(grid: &Grid, profile: impl Fn(f64) -> f64) -> Result<PrincipalEigenpair> {
    let top = |g: &Grid| -> Result<(f64, Vec<f64>)> {
        let a = schrodinger_matrix(g, &g.sample(&profile));
        let mu = a.eigenvalue(0);
        if -mu <= 0.0 {
            return Err(Error::NoPrincipalEigenvalue { top: -mu });
        }
        let (v, _) = a.eigenvector(mu, &[], EIGEN_RESIDUAL_TOL)?;
        Ok((-mu, v))
    };
    let (lambda_grid, v) = top(grid)?;
    let (lambda_refined, _) = top(&grid.refined())?;
    let lambda_inf = (4.0 * lambda_refined - lambda_grid) / 3.0;

    let mut phi = Vec::with_capacity(grid.len());
    phi.push(0.0);
    let sign = if v[v.len() / 2] < 0.0 { -1.0 } else { 1.0 };
    phi.extend(v.iter().map(|x| sign * x));
    phi.push(0.0);
    let l2 = grid.norms(&phi).l2;
    phi.iter_mut().for_each(|x| *x /= l2);

    Ok(PrincipalEigenpair {
        lambda_inf,
        lambda_grid,
        lambda_refined,
        phi_inf: phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Prototype, PrototypeParams};
    use approx::assert_relative_eq;

    #[test]
    fn free_operator_has_no_principal_eigenvalue() {
        let g = Grid::new(10.0, 201).unwrap();
        let err = principal_eigenpair_of(&g, |_| 0.0).unwrap_err();
        assert!(matches!(err, Error::NoPrincipalEigenvalue { .. }));

        // -v'' with threshold 0: nothing below
        let a = schrodinger_matrix(&g, &vec![0.0; g.len()]);
        let r = tridiag_spectrum(&a.diag, &a.off, 0.0, 1e-6).unwrap();
        assert!(r.discrete_eigenvalues.is_empty());
        assert_eq!(r.morse_index, 0);
    }

    #[test]
    fn diagonal_report() {
        let r = tridiag_spectrum(&[-1.0, 2.0], &[0.0], 10.0, 1e-6).unwrap();
        assert_eq!(r.discrete_eigenvalues.len(), 2);
        assert_relative_eq!(r.discrete_eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(r.discrete_eigenvalues[1], 2.0, epsilon = 1e-14);
        assert_eq!(r.morse_index, 1);
        assert!(r.kernel_candidates.is_empty());
        let r = tridiag_spectrum(&[-1.0, 1e-9, 2.0], &[0.0, 0.0], 1.0, 1e-6).unwrap();
        assert_eq!(r.kernel_candidates, vec![1]);
        assert_eq!(r.discrete_eigenvalues.len(), 2);
    }

    #[test]
    fn harmonic_oscillator_levels() {
        // -u'' + x^2 u: Hermite spectrum 1, 3, 5
        let g = Grid::new(15.0, 3001).unwrap();
        let a = schrodinger_matrix(&g, &g.sample(|x| -x * x));
        let r = tridiag_spectrum(&a.diag, &a.off, 6.0, 1e-6).unwrap();
        assert_eq!(r.discrete_eigenvalues.len(), 3);
        for (mu, exact) in r.discrete_eigenvalues.iter().zip([1.0, 3.0, 5.0]) {
            assert!((mu - exact).abs() < 1e-4, "{mu} vs {exact}");
        }
        for res in &r.residuals {
            assert!(*res < 1e-8);
        }
    }

    #[test]
    fn principal_eigenfunction_is_positive_and_normalized() {
        let m = Prototype::new(PrototypeParams::default()).unwrap();
        let g = Grid::default();
        let p = principal_eigenpair(&m, &g).unwrap();
        assert!(p.lambda_inf > 0.0 && p.lambda_inf < m.bound());
        let n = g.len();
        assert!(p.phi_inf[1..n - 1].iter().all(|&v| v > 0.0));
        assert_relative_eq!(g.norms(&p.phi_inf).l2, 1.0, epsilon = 1e-12);
        // eigen-equation residual of the discrete operator
        let a = schrodinger_matrix(&g, &g.sample(|x| m.f_inf(x)));
        let v = &p.phi_inf[1..n - 1];
        let r = a.residual(v, -p.lambda_grid);
        assert!(r < 1e-8, "residual {r}");
    }

    #[test]
    fn principal_eigenvalue_is_monotone_in_the_potential() {
        let m = Prototype::new(PrototypeParams::default()).unwrap();
        let g = Grid::new(40.0, 2001).unwrap();
        let base = principal_eigenpair(&m, &g).unwrap().lambda_inf;
        let raised = principal_eigenpair_of(&g, |x| 1.1 * m.f_inf(x)).unwrap().lambda_inf;
        assert!(raised > base);
    }

    #[test]
    fn principal_eigenvalue_is_cauchy_in_radius() {
        let m = Prototype::new(PrototypeParams::default()).unwrap();
        let a = principal_eigenpair(&m, &Grid::new(40.0, 4001).unwrap()).unwrap();
        let b = principal_eigenpair(&m, &Grid::new(80.0, 8001).unwrap()).unwrap();
        assert!((a.lambda_inf - b.lambda_inf).abs() < 1e-8);
    }
}
