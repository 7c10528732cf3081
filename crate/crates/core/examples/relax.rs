//! Average relaxation X(t) and exponential fits.
//!
//! ```text
//! cargo run --release --example relax
//! ```

use kinex::{fit_auto, run_relaxation, EpsilonMode, ExchangeRule, FitForm, ModelSpec};

fn main() -> kinex::error::Result<()> {
    let specs = [
        ("pure gambling", ModelSpec::default()),
        (
            "distributed saving",
            ModelSpec::new(
                ExchangeRule::DistributedSaving { lambda_min: 0.0, lambda_max: 1.0 },
                EpsilonMode::RandomUniform01,
            ),
        ),
    ];
    for (name, spec) in specs {
        let series = run_relaxation(&spec, 100, 200, 500, 7)?;
        let head: Vec<String> = series.x_mean.iter().take(6).map(|x| format!("{x:.4}")).collect();
        println!("{name}: X(1..6) = {}", head.join(" "));
        // the gambling market settles within a handful of steps, too few to fit
        match fit_auto(&series, FitForm::ShiftedApproach, 0.25) {
            Ok(f) => println!(
                "  X(t) ~ {:.4} {:+.4} exp(-t / {:.3})  window {:?}, r2 {:.4}",
                f.x0, f.amplitude, f.tau, f.window, f.r_squared
            ),
            Err(e) => println!("  no fit: {e}"),
        }
    }
    Ok(())
}
