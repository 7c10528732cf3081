//! Decay-rate predictions from the general linear exchange model.
//!
//! Writing an interaction as `w_i' = ε₁ w_i + ε₂ w_j` and treating the
//! per-interaction change as a derivative over unit time gives
//! `w'' + (1 + ε₂ − ε₁) w' = 0`, whose solutions are `w(t) = a + b·e^{−k t}`
//! with `k = 1 + ε₂ − ε₁`.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneralParams {
    pub eps1: f64,
    pub eps2: f64,
}

/// `w(t) = a + b·e^{−k t}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeSolution {
    pub a: f64,
    pub b: f64,
    pub k: f64,
}

impl OdeSolution {
    pub fn eval(&self, t: f64) -> f64 {
        predict(self.a, self.b, self.k, t)
    }
}

/// Coefficients of the random-saving rule seen as a general linear exchange:
/// `ε₁ = λ_i + ε(1 − λ_i)`, `ε₂ = ε(1 − λ_j)`.
pub fn map_random_saving(lam_i: f64, lam_j: f64, eps: f64) -> Result<GeneralParams> {
    for (name, lam) in [("lambda_i", lam_i), ("lambda_j", lam_j)] {
        if !(0.0..1.0).contains(&lam) {
            return Err(Error::InvalidParameter(format!("{name} = {lam} outside [0, 1)")));
        }
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("epsilon = {eps} outside [0, 1]")));
    }
    Ok(GeneralParams {
        eps1: lam_i + eps * (1.0 - lam_i),
        eps2: eps * (1.0 - lam_j),
    })
}

/// `k = 1 + ε₂ − ε₁`.
pub fn decay_rate(p: GeneralParams) -> f64 {
    1.0 + p.eps2 - p.eps1
}

/// Rate of the exact two-agent recursion.
///
/// With total wealth `W` fixed, one interaction maps the deviation from the
/// fixed point by the factor `ε₁ − ε₂ = 1 − k`, so for `0 < k < 1` the
/// discrete trajectory is `a + b·e^{−k' t}` with `k' = −ln(1 − k)`. The
/// continuum rate `k` is its first-order approximation. `None` when
/// `1 − k <= 0` (the recursion oscillates or stops in one step).
pub fn discrete_decay_rate(p: GeneralParams) -> Option<f64> {
    let factor = 1.0 - decay_rate(p);
    (factor > 0.0).then(|| -factor.ln())
}

/// `a + b·e^{−k t}`.
pub fn predict(a: f64, b: f64, k: f64, t: f64) -> f64 {
    a + b * (-k * t).exp()
}

/// `(a, b)` such that `predict(a, b, k, ·)` passes through `(t0, w0)` and
/// `(t0 + 1, w1)`. `None` for `k = 0`.
pub fn fit_two_points(w0: f64, w1: f64, k: f64, t0: f64) -> Option<OdeSolution> {
    let e0 = (-k * t0).exp();
    let e1 = (-k * (t0 + 1.0)).exp();
    let denom = e0 - e1;
    if denom == 0.0 || !denom.is_finite() {
        return None;
    }
    let b = (w0 - w1) / denom;
    Some(OdeSolution { a: w0 - b * e0, b, k })
}

fn check_window(window: (f64, f64)) -> Result<()> {
    let (lo, hi) = window;
    if !(lo >= 0.0 && hi <= 1.0 && lo <= hi) {
        return Err(Error::InvalidParameter(format!(
            "saving window ({lo}, {hi}) must lie in [0, 1)"
        )));
    }
    Ok(())
}

/// Whether `k = 1 − (λ_i + λ_j)/2` is positive for every pair drawn from the
/// half-open window `[lo, hi)`.
///
/// The infimum of `k` over the window is `1 − hi`, approached but not
/// attained, so the answer is true for every window inside `[0, 1]`. The
/// sampled counterpart is [`sample_half_rates`].
pub fn k_positive_for_half(window: (f64, f64)) -> Result<bool> {
    check_window(window)?;
    let (lo, hi) = window;
    if lo == hi {
        // degenerate window: both propensities equal lo
        return Ok(1.0 - lo > 0.0);
    }
    Ok(1.0 - hi >= 0.0)
}

/// Range of `k` seen over sampled pairs at `ε = ½`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateSample {
    pub samples: usize,
    pub min_k: f64,
    pub max_k: f64,
    pub non_positive: usize,
}

/// Draws `samples` pairs `(λ_i, λ_j)` uniformly from `[lo, hi)` and
/// evaluates `k` through the general-model mapping at `ε = ½`.
pub fn sample_half_rates<R: Rng + ?Sized>(window: (f64, f64), samples: usize, rng: &mut R) -> Result<RateSample> {
    check_window(window)?;
    let (lo, hi) = window;
    let mut draw = || {
        let x = lo + (hi - lo) * rng.random::<f64>();
        if x < hi || lo == hi { x } else { hi.next_down() }
    };
    let mut out = RateSample {
        samples,
        min_k: f64::INFINITY,
        max_k: f64::NEG_INFINITY,
        non_positive: 0,
    };
    for _ in 0..samples {
        let (li, lj) = (draw(), draw());
        let k = decay_rate(map_random_saving(li, lj, 0.5)?);
        out.min_k = out.min_k.min(k);
        out.max_k = out.max_k.max(k);
        if k <= 0.0 {
            out.non_positive += 1;
        }
    }
    Ok(out)
}
