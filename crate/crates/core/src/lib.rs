//! Relaxation laboratory for kinetic wealth-exchange models.
//!
//! Agents trade pairwise under a zero-sum rule (pure gambling, fixed saving,
//! per-agent saving, or a general linear map). The relaxation of the whole
//! economy is tracked through `X(t)`, the mean absolute per-agent wealth
//! change over one time step of N interactions, averaged over many initial
//! configurations. Exponential decay laws are extracted from `X(t)` by
//! semi-log regression and compared with a random resistor network relaxed
//! by Kirchhoff sweeps and with the decay rate of a linearised continuum
//! model.
//!
//! Each independent configuration owns a seeded random stream, so every
//! result is reproducible and independent of the thread count.

pub mod dist;
pub mod error;
pub mod exchange;
pub mod experiment;
pub mod expfit;
pub mod io;
pub mod observer;
pub mod ode;
pub mod rng;
pub mod rrn;

pub use error::{Error, Result};
pub use exchange::{
    exchange_distributed_saving, exchange_fixed_saving, exchange_general, exchange_pure_gambling, init_ensemble,
    run_time_step, AgentEnsemble, EpsilonMode, ExchangeRule, InitialWealth, ModelSpec, Pairing,
};
pub use expfit::{auto_window, fit_auto, fit_pure, fit_shifted, ExpFitResult, FitForm};
pub use observer::{compute_x, equilibrium_window_mean, run_relaxation, RelaxationSeries};
pub use rng::RngStream;
pub use rrn::{run_rrn_relaxation, PotentialInit, ResistorLattice};
