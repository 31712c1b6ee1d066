//! One standing wave at half the bifurcation frequency, with its identities
//! and decay rate.

use satwave::curve::{reach, StepConfig};
use satwave::discretization::Grid;
use satwave::linearization::principal_eigenpair;
use satwave::model::{Prototype, PrototypeParams};
use satwave::stationary::Stationary;

fn main() -> satwave::error::Result<()> {
    let model = Prototype::new(PrototypeParams::default())?;
    let grid = Grid::default();
    let lambda_inf = principal_eigenpair(&model, &grid)?.lambda_inf;
    let st = Stationary::new(&model, &grid, lambda_inf);
    let lambda = 0.5 * lambda_inf;
    let w = reach(&st, lambda, 1.0, &StepConfig::default())?;
    let ids = st.identities(&w);
    println!("lambda = {lambda:.6}: sup u = {:.6}, mass = {:.6}", w.sup(), w.mass);
    println!("max residual {:.2e}", w.residual_inf);
    println!(
        "u'/u at the wall {:.6} (expected about {:.6})",
        w.decay_ratio,
        -lambda.sqrt()
    );
    println!(
        "identity residuals: energy {:.2e}, pohozaev {:.2e}",
        ids.energy, ids.pohozaev
    );
    Ok(())
}
