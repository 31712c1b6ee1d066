//! The slope condition: d/dlambda of the mass, from the tangent and from a
//! finite difference.

use satwave::curve::{curve_point, reach, StepConfig};
use satwave::discretization::Grid;
use satwave::linearization::principal_eigenpair;
use satwave::model::{Prototype, PrototypeParams};
use satwave::stationary::Stationary;

fn main() -> satwave::error::Result<()> {
    let model = Prototype::new(PrototypeParams::default())?;
    let grid = Grid::default();
    let lambda_inf = principal_eigenpair(&model, &grid)?.lambda_inf;
    let st = Stationary::new(&model, &grid, lambda_inf);
    for q in [0.1, 0.4, 0.7] {
        let w = reach(&st, q * lambda_inf, 1.0, &StepConfig::default())?;
        let p = curve_point(&st, w, 1e-4)?;
        println!(
            "lambda = {:.4}: 2<u, xi> = {:.6}, FD = {:.6}, xi crosses zero at {:?}",
            p.lambda(),
            p.slope_xi,
            p.slope_direct,
            p.xi_zero
        );
    }
    Ok(())
}
