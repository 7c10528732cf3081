//! Potential relaxation on a random resistor network.
//!
//! Top row held at 1 V, bottom row grounded, columns wrap around. Each sweep
//! moves every interior node to the conductance-weighted mean of its
//! neighbours; X is the mean absolute change per sweep.

use kinex::{fit_auto, run_rrn_relaxation, FitForm, PotentialInit, ResistorLattice, RngStream};

fn main() -> kinex::error::Result<()> {
    let side = 30;
    for g in [(0.0, 1.0), (0.2, 1.0), (0.5, 1.0)] {
        let series = run_rrn_relaxation(side, g, PotentialInit::default(), 3000, 8, 5)?;
        let fit = fit_auto(&series, FitForm::PureDecay, 0.25)?;
        println!("g in {g:?}: tau = {:.1} sweeps (r2 {:.3})", fit.tau, fit.r_squared);
    }

    // the iteration converges to the Kirchhoff solution
    let mut lat = ResistorLattice::build(side, (0.0, 1.0), PotentialInit::default(), &mut RngStream::new(5, 0).rng())?;
    let exact = lat.dense_solution()?;
    let sweeps = lat.relax_to_convergence(1e-13, 10_000_000);
    let diff = exact.iter().zip(lat.interior()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("converged after {sweeps:?} sweeps, max |V - V_dense| = {diff:.2e}");
    Ok(())
}
