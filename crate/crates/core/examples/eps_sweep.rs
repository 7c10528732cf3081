//! Residual fluctuation X0 of the random-saving market for several fixed eps.

use kinex::observer::tail_stats;
use kinex::{run_relaxation, EpsilonMode, ExchangeRule, ModelSpec};

fn main() -> kinex::error::Result<()> {
    let rule = ExchangeRule::DistributedSaving { lambda_min: 0.0, lambda_max: 1.0 };
    for eps in [0.45, 0.48, 0.5, 0.52, 0.55] {
        let spec = ModelSpec::new(rule, EpsilonMode::Fixed(eps));
        let series = run_relaxation(&spec, 100, 200, 300, 3)?;
        let tail = tail_stats(&series, 0.25)?;
        println!("eps = {eps:.2}  X0 = {:.5} +- {:.5}", tail.mean, tail.std_err);
    }
    Ok(())
}
