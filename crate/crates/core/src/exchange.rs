//! Pairwise wealth-exchange rules and the N-interaction time step.
//!
//! The saving rules compute the share of agent `i` and hand agent `j` the
//! remainder of the pair total, so a single interaction never creates or
//! destroys wealth beyond one rounding of the pair sum.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which exchange rule drives the economy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ExchangeRule {
    /// The pair total is split at a random fraction.
    PureGambling,
    /// Every agent withholds the same fraction `lambda` of its wealth.
    FixedSaving { lambda: f64 },
    /// Each agent draws its own saving propensity once, uniformly in
    /// `[lambda_min, lambda_max)`, and keeps it for the whole run.
    DistributedSaving { lambda_min: f64, lambda_max: f64 },
    /// Linear map `w_i' = eps1 w_i + eps2 w_j` with both coefficients drawn
    /// uniformly from their windows each interaction. Wealth may go negative.
    General {
        eps1_window: (f64, f64),
        eps2_window: (f64, f64),
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum EpsilonMode {
    /// Fresh `ε ~ U[0,1)` for every interaction.
    RandomUniform01,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pairing {
    /// Any two distinct agents may meet.
    MeanField,
    /// Agents sit on a periodic `side × side` square lattice and only meet
    /// their four nearest neighbours.
    Lattice2D { side: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialWealth {
    /// Every agent starts with one money unit.
    EqualUnit,
    /// Uniform random shares, rescaled so the total is exactly `total`.
    UniformRandom { total: f64 },
    /// Agent 0 holds `total`, everyone else holds nothing.
    DeltaAtOneAgent { total: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub rule: ExchangeRule,
    pub epsilon: EpsilonMode,
    pub pairing: Pairing,
    pub init: InitialWealth,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            rule: ExchangeRule::PureGambling,
            epsilon: EpsilonMode::RandomUniform01,
            pairing: Pairing::MeanField,
            init: InitialWealth::EqualUnit,
        }
    }
}

fn check_saving(lambda: f64, what: &str) -> Result<()> {
    if (0.0..1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} = {lambda} outside [0, 1)"
        )))
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eps) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("epsilon = {eps} outside [0, 1]")))
    }
}

fn check_nonneg(w: f64, what: &str) -> Result<()> {
    if w >= 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} = {w} is not a finite non-negative wealth"
        )))
    }
}

impl ModelSpec {
    pub fn new(rule: ExchangeRule, epsilon: EpsilonMode) -> Self {
        Self {
            rule,
            epsilon,
            ..Self::default()
        }
    }

    pub fn with_pairing(mut self, pairing: Pairing) -> Self {
        self.pairing = pairing;
        self
    }

    pub fn with_init(mut self, init: InitialWealth) -> Self {
        self.init = init;
        self
    }

    /// Checks the parameter ranges that do not depend on the ensemble size.
    ///
    /// A saving window is half-open, `[lambda_min, lambda_max)`, so
    /// `lambda_max = 1` is accepted: every drawn propensity is still below 1.
    pub fn validate(&self) -> Result<()> {
        match self.rule {
            ExchangeRule::PureGambling => {}
            ExchangeRule::FixedSaving { lambda } => check_saving(lambda, "lambda")?,
            ExchangeRule::DistributedSaving {
                lambda_min,
                lambda_max,
            } => {
                check_saving(lambda_min, "lambda_min")?;
                if !(lambda_max > lambda_min && lambda_max <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "lambda window ({lambda_min}, {lambda_max}) must satisfy \
                         lambda_min < lambda_max <= 1"
                    )));
                }
            }
            ExchangeRule::General {
                eps1_window,
                eps2_window,
            } => {
                for (name, (lo, hi)) in [("eps1", eps1_window), ("eps2", eps2_window)] {
                    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                        return Err(Error::InvalidParameter(format!(
                            "{name} window ({lo}, {hi}) must be finite with lo <= hi"
                        )));
                    }
                }
            }
        }
        if let EpsilonMode::Fixed(eps) = self.epsilon {
            check_epsilon(eps)?;
        }
        match self.init {
            InitialWealth::EqualUnit => {}
            InitialWealth::UniformRandom { total } | InitialWealth::DeltaAtOneAgent { total } => {
                if !(total > 0.0 && total.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "initial total wealth {total} must be positive"
                    )));
                }
            }
        }
        if let Pairing::Lattice2D { side } = self.pairing {
            if side < 2 {
                return Err(Error::InvalidParameter(format!(
                    "lattice side {side} must be at least 2"
                )));
            }
        }
        Ok(())
    }

    /// Checks the spec against a concrete ensemble size.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::InvalidSize(n));
        }
        self.validate()?;
        if let Pairing::Lattice2D { side } = self.pairing {
            if side.checked_mul(side) != Some(n) {
                return Err(Error::TopologyMismatch { side, n });
            }
        }
        Ok(())
    }
}

/// The simulated economy: one wealth and one saving propensity per agent.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentEnsemble {
    pub wealth: Vec<f64>,
    pub saving: Vec<f64>,
}

impl AgentEnsemble {
    pub fn n_agents(&self) -> usize {
        self.wealth.len()
    }

    pub fn total_wealth(&self) -> f64 {
        self.wealth.iter().sum()
    }

    pub fn min_wealth(&self) -> f64 {
        self.wealth.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Uniform draw in `[lo, hi)`, never returning `hi` itself.
fn uniform_below<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let x = lo + (hi - lo) * rng.random::<f64>();
    if x < hi { x } else { hi.next_down().max(lo) }
}

pub fn init_ensemble<R: Rng + ?Sized>(spec: &ModelSpec, n: usize, rng: &mut R) -> Result<AgentEnsemble> {
    spec.validate_for(n)?;

    let wealth = match spec.init {
        InitialWealth::EqualUnit => vec![1.0; n],
        InitialWealth::UniformRandom { total } => {
            let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let sum: f64 = raw.iter().sum();
            // sum > 0 unless every draw is exactly zero
            let scale = if sum > 0.0 { total / sum } else { 0.0 };
            if scale == 0.0 {
                vec![total / n as f64; n]
            } else {
                raw.into_iter().map(|u| u * scale).collect()
            }
        }
        InitialWealth::DeltaAtOneAgent { total } => {
            let mut w = vec![0.0; n];
            w[0] = total;
            w
        }
    };

    let saving = match spec.rule {
        ExchangeRule::PureGambling | ExchangeRule::General { .. } => vec![0.0; n],
        ExchangeRule::FixedSaving { lambda } => vec![lambda; n],
        ExchangeRule::DistributedSaving {
            lambda_min,
            lambda_max,
        } => (0..n)
            .map(|_| uniform_below(rng, lambda_min, lambda_max))
            .collect(),
    };

    Ok(AgentEnsemble { wealth, saving })
}

// Unchecked kernels shared by the public rules and the simulation loop.

#[inline]
fn split(total: f64, share_i: f64) -> (f64, f64) {
    (share_i, total - share_i)
}

#[inline]
fn pure_gambling_kernel(w_i: f64, w_j: f64, eps: f64) -> (f64, f64) {
    let total = w_i + w_j;
    split(total, (eps * total).min(total))
}

#[inline]
fn distributed_saving_kernel(w_i: f64, w_j: f64, lam_i: f64, lam_j: f64, eps: f64) -> (f64, f64) {
    let total = w_i + w_j;
    let share = lam_i * w_i + eps * ((1.0 - lam_i) * w_i + (1.0 - lam_j) * w_j);
    split(total, share.min(total))
}

/// Applied as a transfer `w_i + Δ`, `w_j − Δ` so the identity map
/// (`ε₁ = 1`, `ε₂ = 0`) leaves both wealths bit-for-bit unchanged.
#[inline]
fn general_kernel(w_i: f64, w_j: f64, eps1: f64, eps2: f64) -> (f64, f64) {
    let delta = (eps1 - 1.0) * w_i + eps2 * w_j;
    (w_i + delta, w_j - delta)
}

/// `w_i' = ε (w_i + w_j)`, `w_j'` the rest.
pub fn exchange_pure_gambling(w_i: f64, w_j: f64, eps: f64) -> Result<(f64, f64)> {
    check_nonneg(w_i, "w_i")?;
    check_nonneg(w_j, "w_j")?;
    check_epsilon(eps)?;
    Ok(pure_gambling_kernel(w_i, w_j, eps))
}

/// `w_i' = λ w_i + ε (1 − λ)(w_i + w_j)`, `w_j'` the rest.
pub fn exchange_fixed_saving(w_i: f64, w_j: f64, lambda: f64, eps: f64) -> Result<(f64, f64)> {
    check_nonneg(w_i, "w_i")?;
    check_nonneg(w_j, "w_j")?;
    check_saving(lambda, "lambda")?;
    check_epsilon(eps)?;
    Ok(distributed_saving_kernel(w_i, w_j, lambda, lambda, eps))
}

/// `w_i' = λ_i w_i + ε [(1 − λ_i) w_i + (1 − λ_j) w_j]`, `w_j'` the rest.
pub fn exchange_distributed_saving(
    w_i: f64,
    w_j: f64,
    lam_i: f64,
    lam_j: f64,
    eps: f64,
) -> Result<(f64, f64)> {
    check_nonneg(w_i, "w_i")?;
    check_nonneg(w_j, "w_j")?;
    check_saving(lam_i, "lambda_i")?;
    check_saving(lam_j, "lambda_j")?;
    check_epsilon(eps)?;
    Ok(distributed_saving_kernel(w_i, w_j, lam_i, lam_j, eps))
}

/// `w_i' = ε₁ w_i + ε₂ w_j`, `w_j' = (1 − ε₁) w_i + (1 − ε₂) w_j`.
///
/// No range checks: the coefficients may be negative and so may the result.
pub fn exchange_general(w_i: f64, w_j: f64, eps1: f64, eps2: f64) -> (f64, f64) {
    general_kernel(w_i, w_j, eps1, eps2)
}

/// Picks the interaction partner pair for one interaction.
#[inline]
fn draw_pair<R: Rng + ?Sized>(pairing: Pairing, n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let j = match pairing {
        Pairing::MeanField => {
            let j = rng.random_range(0..n - 1);
            if j >= i { j + 1 } else { j }
        }
        Pairing::Lattice2D { side } => {
            let (r, c) = (i / side, i % side);
            match rng.random_range(0..4u8) {
                0 => ((r + side - 1) % side) * side + c,
                1 => ((r + 1) % side) * side + c,
                2 => r * side + (c + side - 1) % side,
                _ => r * side + (c + 1) % side,
            }
        }
    };
    (i, j)
}

/// One pair interaction in place.
#[inline]
pub(crate) fn interact<R: Rng + ?Sized>(ens: &mut AgentEnsemble, spec: &ModelSpec, rng: &mut R) {
    let n = ens.wealth.len();
    let (i, j) = draw_pair(spec.pairing, n, rng);
    let (w_i, w_j) = (ens.wealth[i], ens.wealth[j]);
    let (a, b) = match spec.rule {
        ExchangeRule::General {
            eps1_window,
            eps2_window,
        } => {
            let e1 = eps1_window.0 + (eps1_window.1 - eps1_window.0) * rng.random::<f64>();
            let e2 = eps2_window.0 + (eps2_window.1 - eps2_window.0) * rng.random::<f64>();
            general_kernel(w_i, w_j, e1, e2)
        }
        rule => {
            let eps = match spec.epsilon {
                EpsilonMode::RandomUniform01 => rng.random::<f64>(),
                EpsilonMode::Fixed(e) => e,
            };
            match rule {
                ExchangeRule::PureGambling => pure_gambling_kernel(w_i, w_j, eps),
                _ => distributed_saving_kernel(w_i, w_j, ens.saving[i], ens.saving[j], eps),
            }
        }
    };
    ens.wealth[i] = a;
    ens.wealth[j] = b;
}

/// Advances the ensemble by one time step (N interactions) and returns
/// `Σ |w_i(after) − w_i(before)|` over the whole step.
pub fn run_time_step<R: Rng + ?Sized>(ens: &mut AgentEnsemble, spec: &ModelSpec, rng: &mut R) -> f64 {
    let before = ens.wealth.clone();
    advance(ens, spec, rng);
    before
        .iter()
        .zip(&ens.wealth)
        .map(|(b, a)| (a - b).abs())
        .sum()
}

/// One time step without the snapshot bookkeeping.
pub(crate) fn advance<R: Rng + ?Sized>(ens: &mut AgentEnsemble, spec: &ModelSpec, rng: &mut R) {
    for _ in 0..ens.wealth.len() {
        interact(ens, spec, rng);
    }
}
