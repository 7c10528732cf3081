//! Running a configured batch experiment from code, as the `kinex` binary does.
//!
//! ```text
//! cargo run --release --example experiment -- examples/configs/lambda_family.toml
//! ```

use std::path::PathBuf;

use kinex::experiment::{run_experiment, ExperimentConfig};

fn main() -> kinex::error::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/relax.toml")));
    let cfg = ExperimentConfig::load(&path)?;
    let kind = cfg.experiment.expect("example configs name their experiment");
    let out = std::env::temp_dir().join(format!("kinex-{}", kind.name()));
    let report = run_experiment(kind, &cfg, &out)?;
    for note in &report.notes {
        println!("{note}");
    }
    for f in &report.outputs {
        println!("{} {}", f.digest, out.join(&f.file).display());
    }
    Ok(())
}
