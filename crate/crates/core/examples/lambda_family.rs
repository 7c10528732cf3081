//! Relaxation time against the saving-propensity window at fixed eps = 1/2.
//! Agents that save more take longer to settle.

use kinex::{fit_auto, run_relaxation, EpsilonMode, ExchangeRule, FitForm, ModelSpec};

fn main() -> kinex::error::Result<()> {
    println!("window        tau      r2");
    for (lo, hi) in [(0.0, 1.0), (0.5, 1.0), (0.7, 1.0)] {
        let rule = ExchangeRule::DistributedSaving { lambda_min: lo, lambda_max: hi };
        let spec = ModelSpec::new(rule, EpsilonMode::Fixed(0.5));
        let series = run_relaxation(&spec, 100, 200, 300, 1)?;
        let fit = fit_auto(&series, FitForm::PureDecay, 0.25)?;
        println!("[{lo}, {hi})    {:>7.2}  {:.4}", fit.tau, fit.r_squared);
    }
    Ok(())
}
