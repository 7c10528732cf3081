//! Exponential relaxation fits by linear regression in semi-log space.
//!
//! Two forms are supported:
//!
//! * shifted approach `X(t) = X₀ − A·exp(−t/τ)`, regressing `ln|X₀ − X|`;
//! * pure decay `X(t) = A·exp(−t/τ)`, regressing `ln X`.
//!
//! All points carry equal weight and `τ = −1/slope`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observer::{tail_stats, RelaxationSeries, DEFAULT_TAIL_FRACTION};

/// Minimum number of samples a fit window must contain.
pub const MIN_FIT_POINTS: usize = 8;

/// Samples whose distance from the plateau must exceed this many tail
/// standard deviations to belong to the automatic window.
pub const WINDOW_SIGMAS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitForm {
    ShiftedApproach,
    PureDecay,
}

impl FitForm {
    pub fn as_str(self) -> &'static str {
        match self {
            FitForm::ShiftedApproach => "shifted",
            FitForm::PureDecay => "pure",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpFitResult {
    pub x0: f64,
    /// `A` in `X₀ − A·e^{−t/τ}` (negative when approaching from above) or
    /// in `A·e^{−t/τ}`.
    pub amplitude: f64,
    pub tau: f64,
    /// Standard error of `τ` propagated from the regression slope.
    pub tau_std_err: f64,
    /// Inclusive `(t_lo, t_hi)` time labels.
    pub window: (u64, u64),
    pub n_points: usize,
    pub r_squared: f64,
    pub form: FitForm,
}

impl ExpFitResult {
    pub fn eval(&self, t: f64) -> f64 {
        let decay = self.amplitude * (-t / self.tau).exp();
        match self.form {
            FitForm::ShiftedApproach => self.x0 - decay,
            FitForm::PureDecay => decay,
        }
    }
}

/// Ordinary least squares `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_std_err: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeError {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("{n} points cannot define a line")));
    }
    let nf = n as f64;
    let x_bar = xs.iter().sum::<f64>() / nf;
    let y_bar = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - x_bar, y - y_bar);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all abscissae are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let slope_std_err = if n > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        slope_std_err,
    })
}

/// Indices of the samples with `t_lo <= t <= t_hi`.
fn window_indices(series: &RelaxationSeries, window: (u64, u64)) -> Result<std::ops::Range<usize>> {
    let (lo, hi) = window;
    let (first, last) = match (series.t.first(), series.t.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(Error::InsufficientData("empty series".into())),
    };
    if lo >= hi || lo < first || hi > last {
        return Err(Error::InvalidParameter(format!(
            "window ({lo}, {hi}) not inside series span ({first}, {last})"
        )));
    }
    let start = series.t.partition_point(|&t| t < lo);
    let end = series.t.partition_point(|&t| t <= hi);
    if end - start < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "window ({lo}, {hi}) holds {} points, need {MIN_FIT_POINTS}",
            end - start
        )));
    }
    Ok(start..end)
}

fn finish(
    ts: &[u64],
    ys: &[f64],
    x0: f64,
    amplitude_sign: f64,
    form: FitForm,
) -> Result<ExpFitResult> {
    let xs: Vec<f64> = ts.iter().map(|&t| t as f64).collect();
    let line = linear_fit(&xs, ys)?;
    if line.slope >= 0.0 || !line.slope.is_finite() {
        return Err(Error::NotDecaying { slope: line.slope });
    }
    Ok(ExpFitResult {
        x0,
        amplitude: amplitude_sign * line.intercept.exp(),
        tau: -1.0 / line.slope,
        tau_std_err: line.slope_std_err / (line.slope * line.slope),
        window: (ts[0], ts[ts.len() - 1]),
        n_points: ts.len(),
        r_squared: line.r_squared,
        form,
    })
}

/// Fits `X(t) = X₀ − A·exp(−t/τ)` with `X₀` given.
///
/// The series must stay strictly on one side of `x0` over the window.
pub fn fit_shifted(series: &RelaxationSeries, window: (u64, u64), x0: f64) -> Result<ExpFitResult> {
    let idx = window_indices(series, window)?;
    let ts = &series.t[idx.clone()];
    let xs = &series.x_mean[idx];

    let side = (x0 - xs[0]).signum();
    let mut ys = Vec::with_capacity(xs.len());
    for (&t, &x) in ts.iter().zip(xs) {
        let d = x0 - x;
        if d == 0.0 || d.signum() != side || d.is_nan() {
            return Err(Error::WindowContainsCrossing { t });
        }
        ys.push(d.abs().ln());
    }
    finish(ts, &ys, x0, side, FitForm::ShiftedApproach)
}

/// Fits `X(t) = A·exp(−t/τ)`.
pub fn fit_pure(series: &RelaxationSeries, window: (u64, u64)) -> Result<ExpFitResult> {
    let idx = window_indices(series, window)?;
    let ts = &series.t[idx.clone()];
    let xs = &series.x_mean[idx];
    let mut ys = Vec::with_capacity(xs.len());
    for (&t, &x) in ts.iter().zip(xs) {
        if !(x > 0.0) {
            return Err(Error::LogDomainError { t, value: x });
        }
        ys.push(x.ln());
    }
    finish(ts, &ys, 0.0, 1.0, FitForm::PureDecay)
}

/// Longest initial window, starting at the second sample, over which the
/// series stays more than three tail standard deviations away from `x0`.
pub fn auto_window(series: &RelaxationSeries, x0: f64) -> Result<(u64, u64)> {
    if series.len() < 20 {
        return Err(Error::InsufficientData(format!(
            "automatic windowing needs 20 samples, got {}",
            series.len()
        )));
    }
    let sigma = tail_stats(series, DEFAULT_TAIL_FRACTION)?.std_dev;
    let threshold = WINDOW_SIGMAS * sigma;
    let run = series.x_mean[1..]
        .iter()
        .take_while(|&&x| (x - x0).abs() > threshold)
        .count();
    if run < MIN_FIT_POINTS {
        return Err(Error::NoDecayWindow {
            min_points: MIN_FIT_POINTS,
        });
    }
    Ok((series.t[1], series.t[run]))
}

/// Below this distance from the plateau everywhere, a series counts as flat.
pub const FLAT_TOLERANCE: f64 = 1e-12;

/// Plateau estimate, automatic window and fit in one call.
///
/// A series that never leaves the plateau by more than [`FLAT_TOLERANCE`]
/// is reported as [`Error::NotDecaying`].
pub fn fit_auto(series: &RelaxationSeries, form: FitForm, tail_fraction: f64) -> Result<ExpFitResult> {
    let x0 = tail_stats(series, tail_fraction)?.mean;
    if series.x_mean.iter().all(|x| (x - x0).abs() <= FLAT_TOLERANCE) {
        return Err(Error::NotDecaying { slope: 0.0 });
    }
    let window = auto_window(series, x0)?;
    match form {
        FitForm::ShiftedApproach => fit_shifted(series, window, x0),
        FitForm::PureDecay => fit_pure(series, window),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shifted(len: u64, x0: f64, a: f64, tau: f64) -> RelaxationSeries {
        RelaxationSeries::from_fn(len, |t| x0 - a * (-t / tau).exp())
    }

    /// Box–Muller normal draws, test-only.
    fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    #[test]
    fn linear_fit_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = linear_fit(&xs, &ys).unwrap();
        assert_relative_eq!(f.slope, 2.0, epsilon = 1e-14);
        assert_relative_eq!(f.intercept, 1.0, epsilon = 1e-14);
        assert_relative_eq!(f.r_squared, 1.0);
        assert!(f.slope_std_err < 1e-14);
    }

    #[test]
    fn shifted_exact_recovery() {
        let s = shifted(60, 0.5, 0.3, 10.0);
        let fit = fit_shifted(&s, (1, 60), 0.5).unwrap();
        assert_relative_eq!(fit.tau, 10.0, max_relative = 1e-9);
        assert_relative_eq!(fit.amplitude, 0.3, max_relative = 1e-9);
        assert!(fit.r_squared > 0.999999);
        assert_eq!(fit.window, (1, 60));
        assert_eq!(fit.n_points, 60);
    }

    #[test]
    fn shifted_from_above_has_negative_amplitude() {
        let s = shifted(60, 0.5, -0.3, 10.0);
        let fit = fit_shifted(&s, (2, 50), 0.5).unwrap();
        assert_relative_eq!(fit.amplitude, -0.3, max_relative = 1e-9);
        assert_relative_eq!(fit.eval(7.0), s.x_mean[6], max_relative = 1e-9);
    }

    #[test]
    fn shifted_noisy_recovery() {
        // 0.3·e^{−t/10} falls to the 1e-3 noise level near t = 57, so the
        // window stops at 40 where the signal is still ~6e-3.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t: Vec<u64> = (1..=60).collect();
        let x = t
            .iter()
            .map(|&t| 0.5 - 0.3 * (-(t as f64) / 10.0).exp() + rng.random_range(-1e-3..1e-3))
            .collect();
        let s = RelaxationSeries::from_values(t, x).unwrap();
        let fit = fit_shifted(&s, (1, 40), 0.5).unwrap();
        assert!((fit.tau - 10.0).abs() < 0.5, "tau = {}", fit.tau);
    }

    #[test]
    fn constant_is_not_decaying() {
        let s = RelaxationSeries::from_fn(30, |_| 0.2);
        assert!(matches!(fit_shifted(&s, (1, 30), 0.4), Err(Error::NotDecaying { .. })));
        assert!(matches!(fit_pure(&s, (1, 30)), Err(Error::NotDecaying { .. })));
    }

    #[test]
    fn crossing_is_rejected() {
        let s = RelaxationSeries::from_fn(30, |t| 1.0 - 0.1 * t);
        assert!(matches!(
            fit_shifted(&s, (1, 30), 0.5),
            Err(Error::WindowContainsCrossing { t: 5 })
        ));
    }

    #[test]
    fn pure_exact_recovery() {
        let s = RelaxationSeries::from_fn(100, |t| 2.0 * (-t / 25.0).exp());
        let fit = fit_pure(&s, (1, 100)).unwrap();
        assert_relative_eq!(fit.tau, 25.0, max_relative = 1e-9);
        assert_relative_eq!(fit.amplitude, 2.0, max_relative = 1e-9);
        assert_eq!(fit.x0, 0.0);
        assert_eq!(fit.form, FitForm::PureDecay);
    }

    #[test]
    fn pure_log_domain() {
        let s = RelaxationSeries::from_fn(20, |t| 1.0 - 0.1 * t);
        assert!(matches!(fit_pure(&s, (1, 20)), Err(Error::LogDomainError { t: 10, .. })));
    }

    #[test]
    fn two_regime_windowing() {
        let s = RelaxationSeries::from_fn(150, |t| (2.0 * (-t / 12.0).exp()).max(0.05));
        // 2e^{−t/12} meets the floor at t = 12·ln 40 ≈ 44.3
        let decay = fit_pure(&s, (1, 44)).unwrap();
        assert_relative_eq!(decay.tau, 12.0, max_relative = 1e-9);
        let full = fit_pure(&s, (1, 150)).unwrap();
        assert!(full.r_squared < decay.r_squared);
        assert!(full.r_squared < 0.9);
    }

    #[test]
    fn window_errors() {
        let s = RelaxationSeries::from_fn(30, |t| (-t / 5.0).exp());
        assert!(matches!(fit_pure(&s, (1, 5)), Err(Error::InsufficientData(_))));
        assert!(matches!(fit_pure(&s, (0, 20)), Err(Error::InvalidParameter(_))));
        assert!(matches!(fit_pure(&s, (10, 31)), Err(Error::InvalidParameter(_))));
        assert!(matches!(fit_pure(&s, (10, 10)), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn auto_window_noisy_crossing() {
        // 0.3·e^{−t/10} = 3σ at t = 10·ln(0.3 / 3e-4) ≈ 69.1
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let t: Vec<u64> = (1..=200).collect();
        let x = t
            .iter()
            .map(|&t| 0.5 - 0.3 * (-(t as f64) / 10.0).exp() + 1e-4 * gaussian(&mut rng))
            .collect();
        let s = RelaxationSeries::from_values(t, x).unwrap();
        let (lo, hi) = auto_window(&s, 0.5).unwrap();
        assert_eq!(lo, 2);
        assert!((60..=75).contains(&hi), "window end {hi}");
    }

    #[test]
    fn auto_window_noiseless_matches_scan() {
        let s = shifted(200, 0.5, 0.3, 10.0);
        let (lo, hi) = auto_window(&s, 0.5).unwrap();

        // independent scan: tail sd of the last 50 samples, then the first
        // index after the start that fails the 3σ test
        let tail = &s.x_mean[150..];
        let m = tail.iter().sum::<f64>() / 50.0;
        let sd = (tail.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 49.0).sqrt();
        let mut end = 1;
        while end + 1 < s.len() && (s.x_mean[end + 1] - 0.5).abs() > 3.0 * sd {
            end += 1;
        }
        assert_eq!((lo, hi), (2, s.t[end]));
    }

    #[test]
    fn auto_window_rejects_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t: Vec<u64> = (1..=200).collect();
        let x: Vec<f64> = t.iter().map(|_| 0.4 + 1e-3 * gaussian(&mut rng)).collect();
        let s = RelaxationSeries::from_values(t, x).unwrap();
        let x0 = tail_stats(&s, 0.25).unwrap().mean;
        assert!(matches!(auto_window(&s, x0), Err(Error::NoDecayWindow { .. })));

        let flat = RelaxationSeries::from_fn(50, |_| 1.0);
        assert!(matches!(auto_window(&flat, 1.0), Err(Error::NoDecayWindow { .. })));
        let short = RelaxationSeries::from_fn(19, |t| (-t).exp());
        assert!(matches!(auto_window(&short, 0.0), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn fit_auto_flat_and_decaying() {
        let flat = RelaxationSeries::from_fn(50, |_| 1e-14);
        assert!(matches!(fit_auto(&flat, FitForm::PureDecay, 0.25), Err(Error::NotDecaying { .. })));
        let s = shifted(200, 0.5, 0.3, 10.0);
        let fit = fit_auto(&s, FitForm::ShiftedApproach, 0.25).unwrap();
        assert_eq!(fit.window.0, 2);
        // the estimated plateau sits ~2e-8 below 0.5, which bends the last
        // points of the window slightly
        assert_relative_eq!(fit.tau, 10.0, max_relative = 1e-2);
    }

    proptest! {
        #[test]
        fn noiseless_recovery(x0 in 0.1f64..2.0, a in 0.05f64..1.0, tau in 2.0f64..100.0) {
            let a = a * x0;
            let len = (3.0 * tau).ceil().max(20.0) as u64;
            let s = shifted(len, x0, a, tau);
            let fit = fit_shifted(&s, (2, len), x0).unwrap();
            prop_assert!((fit.tau - tau).abs() / tau < 1e-6);
        }

        #[test]
        fn shift_equivalence(x0 in 0.5f64..2.0, a in 0.1f64..0.4, tau in 2.0f64..50.0) {
            let s = shifted(60, x0, a, tau);
            let flipped = RelaxationSeries::from_values(
                s.t.clone(),
                s.x_mean.iter().map(|x| x0 - x).collect(),
            ).unwrap();
            let sh = fit_shifted(&s, (2, 60), x0).unwrap();
            let pu = fit_pure(&flipped, (2, 60)).unwrap();
            prop_assert_eq!(sh.tau, pu.tau);
            prop_assert_eq!(sh.amplitude, pu.amplitude);
        }

        #[test]
        fn time_relabeling_scales_tau(tau in 2.0f64..100.0, noise_seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
            let t: Vec<u64> = (1..=80).collect();
            let x: Vec<f64> = t.iter()
                .map(|&t| (-(t as f64) / tau).exp() * (1.0 + 0.01 * rng.random::<f64>()))
                .collect();
            let s = RelaxationSeries::from_values(t.clone(), x.clone()).unwrap();
            let s2 = RelaxationSeries::from_values(t.iter().map(|t| 2 * t).collect(), x).unwrap();
            let f1 = fit_pure(&s, (1, 80)).unwrap();
            let f2 = fit_pure(&s2, (2, 160)).unwrap();
            prop_assert_eq!(f2.tau, 2.0 * f1.tau);
        }
    }
}
