//! Continuation of the branch across most of the frequency window.

use satwave::curve::{trace, StepConfig};
use satwave::discretization::Grid;
use satwave::linearization::principal_eigenpair;
use satwave::model::{Prototype, PrototypeParams};
use satwave::stationary::Stationary;

fn main() -> satwave::error::Result<()> {
    let model = Prototype::new(PrototypeParams::default())?;
    let grid = Grid::default();
    let lambda_inf = principal_eigenpair(&model, &grid)?.lambda_inf;
    let st = Stationary::new(&model, &grid, lambda_inf);
    let step = StepConfig {
        points: 12,
        ..Default::default()
    };
    let curve = trace(&st, (0.05 * lambda_inf, 0.9 * lambda_inf), 1.0, &step)?;
    println!("{:>10} {:>12} {:>12} {:>8}", "lambda", "mass", "sup u", "x0");
    for p in &curve.points {
        let x0 = p.xi_zero.map_or("-".to_string(), |x| format!("{x:.2}"));
        println!(
            "{:>10.5} {:>12.6} {:>12.6} {:>8}",
            p.lambda(),
            p.wave.mass,
            p.wave.sup(),
            x0
        );
    }
    println!("termination: {:?}", curve.termination);
    Ok(())
}
