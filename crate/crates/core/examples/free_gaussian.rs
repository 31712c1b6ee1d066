//! The split-step integrator against the exact spreading of a free Gaussian.

use num_complex::Complex64;
use satwave::discretization::Grid;
use satwave::dynamics::{free_gaussian, KineticSymbol, SplitStep};
use satwave::model::Zero;

fn main() -> satwave::error::Result<()> {
    let grid = Grid::new(60.0, 6001)?;
    let psi: Vec<Complex64> = grid.nodes().iter().map(|&x| free_gaussian(x, 0.0, 1.0)).collect();
    for symbol in [KineticSymbol::Spectral, KineticSymbol::FiniteDifference] {
        let prop = SplitStep::new(&Zero, &grid, 1e-3, symbol)?;
        let mut s = prop.state(0.0, psi.clone());
        prop.advance(&mut s, 1000);
        let err = grid
            .nodes()
            .iter()
            .zip(&s.psi)
            .map(|(&x, p)| (p - free_gaussian(x, 1.0, 1.0)).norm())
            .fold(0.0, f64::max);
        println!("{symbol:?}: max error at t = 1: {err:.2e}");
    }
    Ok(())
}
