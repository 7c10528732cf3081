//! Fitting a series that did not come from a simulation.

use kinex::observer::RelaxationSeries;
use kinex::{fit_auto, fit_pure, fit_shifted, FitForm};

fn main() -> kinex::error::Result<()> {
    let series = RelaxationSeries::from_fn(200, |t| 0.02 + 0.3 * (-t / 12.0).exp());

    let auto = fit_auto(&series, FitForm::ShiftedApproach, 0.25)?;
    println!("auto: x0 {:.5}, tau {:.4}, window {:?}", auto.x0, auto.tau, auto.window);

    let exact = fit_shifted(&series, (1, 60), 0.02)?;
    println!("known x0: tau {:.6} (r2 {:.8})", exact.tau, exact.r_squared);

    match fit_pure(&series, (100, 200)) {
        Ok(f) => println!("pure fit on the plateau: tau {:.1}", f.tau),
        Err(e) => println!("pure fit on the plateau rejected: {e}"),
    }
    Ok(())
}
