//! Equilibrium wealth distributions.
//!
//! Pure gambling relaxes to a Boltzmann-Gibbs law, a uniform saving
//! propensity moves the mode away from zero, and distributed saving
//! makes high savers rich.

use kinex::dist::{histogram, lambda_binned_means, mode_bin, sample_equilibrium, semilog_fit, Sampling};
use kinex::{EpsilonMode, ExchangeRule, ModelSpec};

fn main() -> kinex::error::Result<()> {
    let sampling = Sampling { burn_in: 200, snapshots: 10, spacing: 10 };

    let gamble = sample_equilibrium(&ModelSpec::default(), 100, sampling, 100, 11)?;
    let hist = histogram(&gamble.wealth, 50)?;
    let fit = semilog_fit(&hist, 10)?;
    println!("pure gambling: ln P slope {:.3} (r2 {:.4})", fit.slope, fit.r_squared);

    let saving = ModelSpec::new(ExchangeRule::FixedSaving { lambda: 0.5 }, EpsilonMode::RandomUniform01);
    let hist = histogram(&sample_equilibrium(&saving, 100, sampling, 100, 11)?.wealth, 50)?;
    let m = mode_bin(&hist).unwrap();
    println!("lambda = 0.5: mode at w in [{:.3}, {:.3})", hist[m].lo, hist[m].hi);

    let window = (0.0, 1.0);
    let spread = ModelSpec::new(
        ExchangeRule::DistributedSaving { lambda_min: window.0, lambda_max: window.1 },
        EpsilonMode::RandomUniform01,
    );
    let s = sample_equilibrium(&spread, 100, sampling, 100, 11)?;
    for b in lambda_binned_means(&s.agent_lambda, &s.agent_mean_wealth, 5, window)? {
        println!("lambda in [{:.1}, {:.1}): <w> = {:.3} over {} agents", b.lo, b.hi, b.mean_wealth, b.agents);
    }
    Ok(())
}
