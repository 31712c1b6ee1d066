//! Morse index and kernel of the two linearized operators at a few waves.

use satwave::curve::{reach, StepConfig};
use satwave::discretization::Grid;
use satwave::linearization::principal_eigenpair;
use satwave::model::{Prototype, PrototypeParams};
use satwave::spectral::analyze;
use satwave::stationary::{Closure, Stationary};

fn main() -> satwave::error::Result<()> {
    let model = Prototype::new(PrototypeParams::default())?;
    let grid = Grid::default();
    let lambda_inf = principal_eigenpair(&model, &grid)?.lambda_inf;
    let st = Stationary::new(&model, &grid, lambda_inf);
    for q in [0.2, 0.5, 0.8] {
        let w = reach(&st, q * lambda_inf, 1.0, &StepConfig::default())?;
        let r = analyze(&w, &model, &grid, Closure::Robin)?;
        println!(
            "lambda = {:.4}: L1 morse {} (lowest {:.4e}), L2 mu0 {:.2e} (tol {:.1e}), |1 - overlap| {:.1e}",
            r.lambda,
            r.l1.morse,
            r.l1.lowest.unwrap_or(f64::NAN),
            r.l2.mu0.unwrap_or(f64::NAN),
            r.kernel_tol,
            (1.0 - r.l2.overlap).abs()
        );
    }
    Ok(())
}
