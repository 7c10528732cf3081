//! The relaxation observable `X(t)` and configuration-averaged series.
//!
//! `X(t) = (1/N) Σ_i |w_i(t) − w_i(t−1)|` where `t` counts time steps of N
//! interactions each and the wealth snapshots are taken at step boundaries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exchange::{init_ensemble, run_time_step, ModelSpec};
use crate::rng::RngStream;

/// Default share of trailing samples used to estimate the plateau `X₀`.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;

/// What produced a series; echoed into CSV headers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesSource {
    Exchange { spec: ModelSpec, n_agents: usize },
    Resistor { side: usize, g_window: (f64, f64) },
    /// Built directly from values (tests, externally loaded data).
    External,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelaxationSeries {
    pub t: Vec<u64>,
    pub x_mean: Vec<f64>,
    pub n_configs: usize,
    pub master_seed: u64,
    pub source: SeriesSource,
}

impl RelaxationSeries {
    /// Wraps raw samples. `t` must be strictly increasing and match `x` in length.
    pub fn from_values(t: Vec<u64>, x_mean: Vec<f64>) -> Result<Self> {
        if t.len() != x_mean.len() {
            return Err(Error::ShapeError {
                expected: t.len(),
                actual: x_mean.len(),
            });
        }
        if t.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "time labels must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            t,
            x_mean,
            n_configs: 1,
            master_seed: 0,
            source: SeriesSource::External,
        })
    }

    /// Samples at `t = 1, 2, …, len` with values `f(t)`.
    pub fn from_fn(len: u64, f: impl Fn(f64) -> f64) -> Self {
        let t: Vec<u64> = (1..=len).collect();
        let x = t.iter().map(|&t| f(t as f64)).collect();
        Self::from_values(t, x).expect("generated labels are increasing")
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Number of trailing samples covered by `tail_fraction`.
    pub fn tail_len(&self, tail_fraction: f64) -> usize {
        ((self.len() as f64 * tail_fraction).round() as usize).clamp(1, self.len().max(1))
    }

    pub fn tail(&self, tail_fraction: f64) -> &[f64] {
        &self.x_mean[self.len() - self.tail_len(tail_fraction)..]
    }
}

/// `(1/N) Σ |curr_i − prev_i|`.
pub fn compute_x(prev: &[f64], curr: &[f64]) -> Result<f64> {
    if prev.len() != curr.len() {
        return Err(Error::ShapeError {
            expected: prev.len(),
            actual: curr.len(),
        });
    }
    if prev.is_empty() {
        return Err(Error::InsufficientData("X needs at least one agent".into()));
    }
    let sum: f64 = prev.iter().zip(curr).map(|(p, c)| (c - p).abs()).sum();
    Ok(sum / prev.len() as f64)
}

/// `X(1..=t_max)` for one initial configuration drawn from `stream`.
pub fn relaxation_trajectory(spec: &ModelSpec, n: usize, t_max: usize, stream: RngStream) -> Result<Vec<f64>> {
    let mut rng = stream.rng();
    let mut ens = init_ensemble(spec, n, &mut rng)?;
    Ok((0..t_max)
        .map(|_| run_time_step(&mut ens, spec, &mut rng) / n as f64)
        .collect())
}

/// Averages `X(t)` over `n_configs` configurations, configuration `c` using
/// stream `c` of `master_seed`.
///
/// Configurations run on the current rayon pool; the per-configuration
/// trajectories are summed in configuration order, so the result is
/// bit-identical for any thread count.
pub fn run_relaxation(
    spec: &ModelSpec,
    n: usize,
    t_max: usize,
    n_configs: usize,
    master_seed: u64,
) -> Result<RelaxationSeries> {
    spec.validate_for(n)?;
    if t_max < 2 {
        return Err(Error::InvalidParameter(format!("t_max = {t_max} must be at least 2")));
    }
    if n_configs == 0 {
        return Err(Error::InvalidParameter("n_configs must be positive".into()));
    }
    let trajectories: Vec<Vec<f64>> = (0..n_configs as u64)
        .into_par_iter()
        .map(|c| relaxation_trajectory(spec, n, t_max, RngStream::new(master_seed, c)))
        .collect::<Result<_>>()?;

    let x_mean = ordered_mean(&trajectories, t_max);
    Ok(RelaxationSeries {
        t: (1..=t_max as u64).collect(),
        x_mean,
        n_configs,
        master_seed,
        source: SeriesSource::Exchange {
            spec: *spec,
            n_agents: n,
        },
    })
}

/// Column mean of equally long rows, accumulated in row order.
pub(crate) fn ordered_mean(rows: &[Vec<f64>], len: usize) -> Vec<f64> {
    let mut acc = vec![0.0; len];
    for row in rows {
        for (a, x) in acc.iter_mut().zip(row) {
            *a += x;
        }
    }
    let k = rows.len() as f64;
    acc.iter_mut().for_each(|a| *a /= k);
    acc
}

fn check_tail(series: &RelaxationSeries, tail_fraction: f64) -> Result<()> {
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "tail fraction {tail_fraction} outside (0, 0.5]"
        )));
    }
    if series.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "series has {} samples, need at least 10",
            series.len()
        )));
    }
    Ok(())
}

/// Plateau estimate `X₀`: mean of the trailing `tail_fraction` of samples.
pub fn equilibrium_window_mean(series: &RelaxationSeries, tail_fraction: f64) -> Result<f64> {
    Ok(tail_stats(series, tail_fraction)?.mean)
}

/// Summary of the trailing window of a series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator; 0 for a single sample).
    pub std_dev: f64,
    /// `std_dev / sqrt(count)`.
    pub std_err: f64,
}

pub fn tail_stats(series: &RelaxationSeries, tail_fraction: f64) -> Result<TailStats> {
    check_tail(series, tail_fraction)?;
    let tail = series.tail(tail_fraction);
    let count = tail.len();
    let mean = tail.iter().sum::<f64>() / count as f64;
    let std_dev = if count > 1 {
        (tail.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(TailStats {
        count,
        mean,
        std_dev,
        std_err: std_dev / (count as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::{EpsilonMode, ExchangeRule, InitialWealth};
    use approx::assert_relative_eq;

    #[test]
    fn compute_x_examples() {
        assert_eq!(compute_x(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert_relative_eq!(compute_x(&[1.0, 1.0], &[0.6, 1.4]).unwrap(), 0.4, epsilon = 1e-15);
        assert_eq!(compute_x(&[2.0, 0.0, 1.0, 1.0], &[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.5);
        assert!(matches!(
            compute_x(&[1.0], &[1.0, 2.0]),
            Err(Error::ShapeError { expected: 1, actual: 2 })
        ));
    }

    #[test]
    fn window_mean_examples() {
        let c = RelaxationSeries::from_fn(40, |_| 0.37);
        for frac in [0.05, 0.25, 0.5] {
            assert_relative_eq!(equilibrium_window_mean(&c, frac).unwrap(), 0.37, epsilon = 1e-15);
        }

        // tail mean over t ∈ [151, 200] is 0.5 − 0.3·Σe^{−t/10}/50 ≈ 0.5 − 1.8e-8
        let s = RelaxationSeries::from_fn(200, |t| 0.5 - 0.3 * (-t / 10.0).exp());
        assert!((equilibrium_window_mean(&s, 0.25).unwrap() - 0.5).abs() < 1e-4);

        let ramp = RelaxationSeries::from_fn(100, |t| t);
        assert_eq!(equilibrium_window_mean(&ramp, 0.1).unwrap(), 95.5);
    }

    #[test]
    fn window_mean_errors() {
        let short = RelaxationSeries::from_fn(9, |t| t);
        assert!(matches!(
            equilibrium_window_mean(&short, 0.25),
            Err(Error::InsufficientData(_))
        ));
        let s = RelaxationSeries::from_fn(20, |t| t);
        assert!(equilibrium_window_mean(&s, 0.0).is_err());
        assert!(equilibrium_window_mean(&s, 0.6).is_err());
    }

    #[test]
    fn identity_dynamics_never_move() {
        let spec = ModelSpec::new(
            ExchangeRule::General { eps1_window: (1.0, 1.0), eps2_window: (0.0, 0.0) },
            EpsilonMode::RandomUniform01,
        )
        .with_init(InitialWealth::UniformRandom { total: 30.0 });
        let s = run_relaxation(&spec, 30, 20, 4, 1).unwrap();
        assert!(s.x_mean.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn near_total_saving_freezes() {
        let spec = ModelSpec::new(ExchangeRule::FixedSaving { lambda: 0.999 }, EpsilonMode::RandomUniform01);
        let s = run_relaxation(&spec, 50, 30, 8, 2).unwrap();
        // each interaction moves at most (1 − λ)·(w_i + w_j)
        assert!(s.x_mean.iter().all(|&x| x < 0.01), "{:?}", &s.x_mean[..5]);
    }

    #[test]
    fn deterministic_for_seed() {
        let spec = ModelSpec::new(
            ExchangeRule::DistributedSaving { lambda_min: 0.0, lambda_max: 1.0 },
            EpsilonMode::Fixed(0.5),
        );
        let a = run_relaxation(&spec, 40, 25, 6, 77).unwrap();
        let b = run_relaxation(&spec, 40, 25, 6, 77).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.t, (1..=25).collect::<Vec<_>>());
        let c = run_relaxation(&spec, 40, 25, 6, 78).unwrap();
        assert_ne!(a.x_mean, c.x_mean);
    }

    #[test]
    fn rejects_bad_arguments() {
        let spec = ModelSpec::default();
        assert!(run_relaxation(&spec, 1, 10, 1, 0).is_err());
        assert!(run_relaxation(&spec, 10, 1, 1, 0).is_err());
        assert!(run_relaxation(&spec, 10, 10, 0, 0).is_err());
    }
}
