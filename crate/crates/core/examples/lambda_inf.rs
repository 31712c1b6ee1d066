//! Principal eigenvalue of the saturated problem, on two grids.

use satwave::discretization::Grid;
use satwave::linearization::principal_eigenpair;
use satwave::model::{Prototype, PrototypeParams};

fn main() -> satwave::error::Result<()> {
    let model = Prototype::new(PrototypeParams::default())?;
    for grid in [Grid::new(40.0, 2001)?, Grid::default()] {
        let p = principal_eigenpair(&model, &grid)?;
        println!(
            "R = {}, N = {}: grid {:.10}, refined {:.10}, extrapolated {:.12}",
            grid.radius(),
            grid.len(),
            p.lambda_grid,
            p.lambda_refined,
            p.lambda_inf
        );
    }
    Ok(())
}
