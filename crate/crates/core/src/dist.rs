//! Equilibrium wealth statistics: pooled histograms and wealth by saving
//! propensity.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exchange::{advance, init_ensemble, ModelSpec};
use crate::expfit::{linear_fit, LinearFit};
use crate::rng::RngStream;

pub const DEFAULT_BINS: usize = 50;

/// Bins with fewer counts are left out of semi-log fits.
pub const DEFAULT_MIN_BIN_COUNT: u64 = 10;

/// When to look at the ensemble after the initial transient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    /// Time steps discarded before the first snapshot.
    pub burn_in: usize,
    pub snapshots: usize,
    /// Time steps between consecutive snapshots.
    pub spacing: usize,
}

impl Sampling {
    pub fn single(burn_in: usize) -> Self {
        Self {
            burn_in,
            snapshots: 1,
            spacing: 1,
        }
    }
}

/// Snapshots pooled over configurations, in configuration order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EquilibriumSample {
    /// Every agent's wealth at every snapshot.
    pub wealth: Vec<f64>,
    /// One entry per agent per configuration.
    pub agent_lambda: Vec<f64>,
    /// Wealth of the matching agent averaged over its snapshots.
    pub agent_mean_wealth: Vec<f64>,
}

impl EquilibriumSample {
    pub fn mean_wealth(&self) -> f64 {
        self.wealth.iter().sum::<f64>() / self.wealth.len() as f64
    }
}

fn sample_one(spec: &ModelSpec, n: usize, sampling: Sampling, stream: RngStream) -> Result<EquilibriumSample> {
    let mut rng = stream.rng();
    let mut ens = init_ensemble(spec, n, &mut rng)?;
    for _ in 0..sampling.burn_in {
        advance(&mut ens, spec, &mut rng);
    }
    let mut wealth = Vec::with_capacity(n * sampling.snapshots);
    let mut sums = vec![0.0; n];
    for s in 0..sampling.snapshots {
        if s > 0 {
            for _ in 0..sampling.spacing {
                advance(&mut ens, spec, &mut rng);
            }
        }
        wealth.extend_from_slice(&ens.wealth);
        sums.iter_mut().zip(&ens.wealth).for_each(|(a, w)| *a += w);
    }
    let k = sampling.snapshots as f64;
    Ok(EquilibriumSample {
        wealth,
        agent_lambda: ens.saving,
        agent_mean_wealth: sums.into_iter().map(|s| s / k).collect(),
    })
}

pub fn sample_equilibrium(
    spec: &ModelSpec,
    n: usize,
    sampling: Sampling,
    n_configs: usize,
    master_seed: u64,
) -> Result<EquilibriumSample> {
    spec.validate_for(n)?;
    if sampling.snapshots == 0 || n_configs == 0 {
        return Err(Error::InvalidParameter(
            "need at least one snapshot and one configuration".into(),
        ));
    }
    let parts: Vec<EquilibriumSample> = (0..n_configs as u64)
        .into_par_iter()
        .map(|c| sample_one(spec, n, sampling, RngStream::new(master_seed, c)))
        .collect::<Result<_>>()?;
    let mut out = EquilibriumSample::default();
    for p in parts {
        out.wealth.extend(p.wealth);
        out.agent_lambda.extend(p.agent_lambda);
        out.agent_mean_wealth.extend(p.agent_mean_wealth);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    /// `count / (total · width)`, a probability density estimate.
    pub density: f64,
}

impl HistogramBin {
    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Equal-width histogram over `[0, max(values)]`; the top edge is inclusive.
pub fn histogram(values: &[f64], bins: usize) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
    }
    if values.is_empty() {
        return Err(Error::InsufficientData("no values to histogram".into()));
    }
    if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "histogram range starts at 0, got value {v}"
        )));
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    let width = if max > 0.0 { max / bins as f64 } else { 1.0 };
    let mut counts = vec![0u64; bins];
    for &v in values {
        counts[((v / width) as usize).min(bins - 1)] += 1;
    }
    let total = values.len() as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            lo: k as f64 * width,
            hi: (k + 1) as f64 * width,
            count,
            density: count as f64 / (total * width),
        })
        .collect())
}

/// Regression of `ln density` on bin centre over bins holding at least
/// `min_count` samples. An exponential law `p(w) ∝ e^{−w/⟨w⟩}` gives slope
/// `−1/⟨w⟩`.
pub fn semilog_fit(hist: &[HistogramBin], min_count: u64) -> Result<LinearFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = hist
        .iter()
        .filter(|b| b.count >= min_count.max(1))
        .map(|b| (b.center(), b.density.ln()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} bins hold at least {min_count} samples",
            xs.len()
        )));
    }
    linear_fit(&xs, &ys)
}

/// Index of the most populated bin (the first one on ties).
pub fn mode_bin(hist: &[HistogramBin]) -> Option<usize> {
    hist.iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.count.cmp(&b.count).then(j.cmp(i)))
        .map(|(i, _)| i)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaBin {
    pub lo: f64,
    pub hi: f64,
    pub agents: usize,
    pub mean_wealth: f64,
}

/// Mean of `wealth` over agents grouped into `bins` equal-width bins of
/// `lambda` across `window`.
pub fn lambda_binned_means(lambda: &[f64], wealth: &[f64], bins: usize, window: (f64, f64)) -> Result<Vec<LambdaBin>> {
    if lambda.len() != wealth.len() {
        return Err(Error::ShapeError {
            expected: lambda.len(),
            actual: wealth.len(),
        });
    }
    let (lo, hi) = window;
    if bins == 0 || !(hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "cannot split ({lo}, {hi}) into {bins} bins"
        )));
    }
    let width = (hi - lo) / bins as f64;
    let mut sums = vec![(0usize, 0.0f64); bins];
    for (&l, &w) in lambda.iter().zip(wealth) {
        if l < lo || l > hi {
            continue;
        }
        let k = (((l - lo) / width) as usize).min(bins - 1);
        sums[k].0 += 1;
        sums[k].1 += w;
    }
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(k, (agents, total))| LambdaBin {
            lo: lo + k as f64 * width,
            hi: lo + (k + 1) as f64 * width,
            agents,
            mean_wealth: if agents > 0 { total / agents as f64 } else { f64::NAN },
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::{EpsilonMode, ExchangeRule};
    use approx::assert_relative_eq;

    #[test]
    fn histogram_counts_and_density() {
        let v = [0.0, 0.5, 1.0, 1.5, 2.0, 2.0];
        let h = histogram(&v, 4).unwrap();
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![1, 1, 1, 3]);
        let area: f64 = h.iter().map(|b| b.density * (b.hi - b.lo)).sum();
        assert_relative_eq!(area, 1.0, epsilon = 1e-12);
        assert_eq!(h[3].hi, 2.0);
        assert!(histogram(&[], 4).is_err());
        assert!(histogram(&[1.0, -0.5], 4).is_err());
    }

    #[test]
    fn semilog_slope_of_exact_exponential() {
        // bin masses of an exponential with mean 2: the log of the bin
        // average differs from the log of the centre value by a constant
        let width = 0.25;
        let hist: Vec<HistogramBin> = (0..40)
            .map(|k| {
                let (lo, hi) = (k as f64 * width, (k + 1) as f64 * width);
                let mass = (-lo / 2.0).exp() - (-hi / 2.0).exp();
                HistogramBin { lo, hi, count: 1000, density: mass / width }
            })
            .collect();
        let fit = semilog_fit(&hist, 1).unwrap();
        assert_relative_eq!(fit.slope, -0.5, epsilon = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lambda_bins() {
        let lam = [0.05, 0.15, 0.55, 0.95, 0.99];
        let w = [1.0, 3.0, 2.0, 4.0, 6.0];
        let bins = lambda_binned_means(&lam, &w, 2, (0.0, 1.0)).unwrap();
        assert_eq!(bins[0].agents, 2);
        assert_eq!(bins[0].mean_wealth, 2.0);
        assert_eq!(bins[1].agents, 3);
        assert_eq!(bins[1].mean_wealth, 4.0);
    }

    #[test]
    fn pooled_sample_has_expected_shape() {
        let spec = ModelSpec::new(
            ExchangeRule::DistributedSaving { lambda_min: 0.0, lambda_max: 1.0 },
            EpsilonMode::RandomUniform01,
        );
        let s = sample_equilibrium(&spec, 20, Sampling { burn_in: 5, snapshots: 3, spacing: 2 }, 4, 9).unwrap();
        assert_eq!(s.wealth.len(), 20 * 3 * 4);
        assert_eq!(s.agent_lambda.len(), 80);
        assert_eq!(s.agent_mean_wealth.len(), 80);
        assert_relative_eq!(s.mean_wealth(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.agent_mean_wealth.iter().sum::<f64>(), 80.0, max_relative = 1e-12);
    }

    #[test]
    fn mode_of_flat_prefers_first() {
        let h = histogram(&[0.1, 0.9], 2).unwrap();
        assert_eq!(mode_bin(&h), Some(0));
    }
}
