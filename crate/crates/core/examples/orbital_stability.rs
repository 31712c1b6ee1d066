//! A perturbed standing wave stays close to its phase orbit.
//!
//! Shorter horizon than the full experiment to keep the example quick.

use satwave::curve::{reach, StepConfig};
use satwave::discretization::Grid;
use satwave::dynamics::{stability_experiment, ExperimentConfig, Parity};
use satwave::linearization::principal_eigenpair;
use satwave::model::{Prototype, PrototypeParams};
use satwave::stationary::Stationary;

fn main() -> satwave::error::Result<()> {
    let model = Prototype::new(PrototypeParams::default())?;
    let grid = Grid::default();
    let lambda_inf = principal_eigenpair(&model, &grid)?.lambda_inf;
    let st = Stationary::new(&model, &grid, lambda_inf);
    let w = reach(&st, 0.5 * lambda_inf, 1.0, &StepConfig::default())?;
    for parity in [Parity::Even, Parity::Odd] {
        let cfg = ExperimentConfig {
            parity,
            t_final: 10.0,
            ..Default::default()
        };
        let r = stability_experiment(&w, &model, &grid, &cfg)?;
        println!(
            "{parity:?}: max distance {:.3e} = {:.2} delta |u|_H1, final mass drift {:.1e}",
            r.max_distance(),
            r.max_distance() / (r.delta * r.wave_h1),
            r.mass_drift.last().unwrap()
        );
    }
    Ok(())
}
