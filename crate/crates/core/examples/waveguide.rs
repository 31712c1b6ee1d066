//! Guided TE modes: propagation constant window and beam power along the branch.

use satwave::curve::{trace, StepConfig};
use satwave::discretization::Grid;
use satwave::linearization::principal_eigenpair;
use satwave::model::{Prototype, PrototypeParams};
use satwave::stationary::Stationary;
use satwave::waveguide::{dispersion_curve, WaveguideParams};

fn main() -> satwave::error::Result<()> {
    let model = Prototype::new(PrototypeParams::default())?;
    let grid = Grid::default();
    let lambda_inf = principal_eigenpair(&model, &grid)?.lambda_inf;
    let st = Stationary::new(&model, &grid, lambda_inf);
    let step = StepConfig {
        points: 10,
        ..Default::default()
    };
    let curve = trace(&st, (0.05 * lambda_inf, 0.9 * lambda_inf), 1.0, &step)?;
    let samples: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.lambda(), p.wave.mass)).collect();
    let params = WaveguideParams {
        omega_over_c: 2.0,
        eps_l: 2.25,
    };
    let d = dispersion_curve(&samples, &params, lambda_inf)?;
    println!("guided window k in ({:.6}, {:.6})", d.k1, d.k3);
    d.write_csv(std::io::stdout().lock())?;
    Ok(())
}
