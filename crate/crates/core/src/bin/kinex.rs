use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kinex::experiment::{run_experiment, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "kinex", version, about = "Kinetic exchange and resistor network relaxation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Exit with status 2 when a built-in check fails.
    #[arg(long)]
    strict: bool,
    /// Output directory (overrides `output_dir`, default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `master_seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, env = "KINEX_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Average relaxation X(t) for one model, with exponential fits.
    Relax(Common),
    /// Equilibrium wealth histogram (and lambda-binned means).
    Dist(Common),
    /// Equilibrium X0 for a list of fixed epsilons.
    EpsSweep(Common),
    /// Relaxation time per saving-propensity window.
    LambdaFamily(Common),
    /// Resistor-network potential relaxation per conductance window.
    Rrn(Common),
    /// Fit an existing series CSV.
    Fit(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Relax(a) => (ExperimentKind::Relax, a),
        Command::Dist(a) => (ExperimentKind::Dist, a),
        Command::EpsSweep(a) => (ExperimentKind::EpsSweep, a),
        Command::LambdaFamily(a) => (ExperimentKind::LambdaFamily, a),
        Command::Rrn(a) => (ExperimentKind::Rrn, a),
        Command::Fit(a) => (ExperimentKind::Fit, a),
    };

    let mut cfg = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("kinex: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    let out = args
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("kinex: cannot start thread pool: {e}");
            return ExitCode::from(1);
        }
    };

    match pool.install(|| run_experiment(kind, &cfg, &out)) {
        Ok(report) => {
            for note in &report.notes {
                println!("{note}");
            }
            for f in &report.outputs {
                println!("wrote {} ({})", out.join(&f.file).display(), f.digest);
            }
            if args.strict && !report.check_failures.is_empty() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("kinex: {e}");
            ExitCode::from(1)
        }
    }
}
