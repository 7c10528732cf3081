//! Batch experiments driven by a TOML config.
//!
//! Each experiment writes its CSV outputs plus a `manifest.json` into the
//! output directory. CSV payloads depend only on the config and seed; the
//! manifest additionally records timestamps and the thread count.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dist::{self, Sampling};
use crate::error::{Error, Result};
use crate::exchange::{EpsilonMode, ExchangeRule, InitialWealth, ModelSpec, Pairing};
use crate::expfit::{fit_auto, FitForm};
use crate::io::{self, fmt_f64, CsvDoc, FIT_COLUMNS};
use crate::observer::{run_relaxation, tail_stats, RelaxationSeries};
use crate::rng::RngStream;
use crate::rrn::{run_rrn_relaxation, PotentialInit, ResistorLattice};

pub const DEFAULT_LAMBDA_WINDOWS: [(f64, f64); 3] = [(0.0, 1.0), (0.5, 1.0), (0.7, 1.0)];
pub const DEFAULT_EPS_VALUES: [f64; 5] = [0.45, 0.48, 0.5, 0.52, 0.55];
pub const DEFAULT_G_WINDOWS: [(f64, f64); 3] = [(0.0, 1.0), (0.2, 1.0), (0.5, 1.0)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Relax,
    Dist,
    EpsSweep,
    LambdaFamily,
    Rrn,
    Fit,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Relax => "relax",
            ExperimentKind::Dist => "dist",
            ExperimentKind::EpsSweep => "eps-sweep",
            ExperimentKind::LambdaFamily => "lambda-family",
            ExperimentKind::Rrn => "rrn",
            ExperimentKind::Fit => "fit",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    #[default]
    PureGambling,
    FixedSaving,
    DistributedSaving,
    General,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitName {
    #[default]
    EqualUnit,
    UniformRandom,
    Delta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Word {
    Random,
    Ramp,
}

/// A number or a keyword (`"random"` for ε, `"ramp"` for potentials).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberOr {
    Value(f64),
    Word(Word),
}

/// Flat, file-facing form of [`ModelSpec`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub rule: RuleName,
    pub lambda: Option<f64>,
    pub lambda_window: Option<(f64, f64)>,
    /// A fixed ε in [0, 1] or `"random"` for a fresh draw per interaction.
    pub epsilon: Option<NumberOr>,
    pub eps1_window: Option<(f64, f64)>,
    pub eps2_window: Option<(f64, f64)>,
    /// Square-lattice pairing with this side; mean-field when absent.
    pub lattice_side: Option<usize>,
    #[serde(default)]
    pub init: InitName,
    pub init_total: Option<f64>,
}

impl ModelConfig {
    /// Builds the spec, using `default_eps` when no ε is configured.
    pub fn to_spec(&self, default_eps: EpsilonMode) -> Result<ModelSpec> {
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| Error::Config(format!("model.{key} is required for rule {:?}", self.rule)))
        };
        let need_window = |v: Option<(f64, f64)>, key: &str| {
            v.ok_or_else(|| Error::Config(format!("model.{key} is required for rule {:?}", self.rule)))
        };
        let rule = match self.rule {
            RuleName::PureGambling => ExchangeRule::PureGambling,
            RuleName::FixedSaving => ExchangeRule::FixedSaving {
                lambda: need(self.lambda, "lambda")?,
            },
            RuleName::DistributedSaving => {
                let (lambda_min, lambda_max) = need_window(self.lambda_window, "lambda_window")?;
                ExchangeRule::DistributedSaving {
                    lambda_min,
                    lambda_max,
                }
            }
            RuleName::General => ExchangeRule::General {
                eps1_window: need_window(self.eps1_window, "eps1_window")?,
                eps2_window: need_window(self.eps2_window, "eps2_window")?,
            },
        };
        let epsilon = match self.epsilon {
            None => default_eps,
            Some(NumberOr::Value(e)) => EpsilonMode::Fixed(e),
            Some(NumberOr::Word(Word::Random)) => EpsilonMode::RandomUniform01,
            Some(NumberOr::Word(w)) => return Err(Error::Config(format!("model.epsilon cannot be {w:?}"))),
        };
        let pairing = match self.lattice_side {
            Some(side) => Pairing::Lattice2D { side },
            None => Pairing::MeanField,
        };
        let init = match self.init {
            InitName::EqualUnit => InitialWealth::EqualUnit,
            InitName::UniformRandom => InitialWealth::UniformRandom {
                total: need(self.init_total, "init_total")?,
            },
            InitName::Delta => InitialWealth::DeltaAtOneAgent {
                total: need(self.init_total, "init_total")?,
            },
        };
        let spec = ModelSpec {
            rule,
            epsilon,
            pairing,
            init,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub eps: Option<Vec<f64>>,
    pub lambda_windows: Option<Vec<(f64, f64)>>,
    pub g_windows: Option<Vec<(f64, f64)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistConfig {
    pub bins: usize,
    /// Steps discarded before pooling; derived from a relaxation fit when absent.
    pub burn_in: Option<usize>,
    pub snapshots: usize,
    pub spacing: usize,
    pub lambda_bins: usize,
    pub min_bin_count: u64,
}

impl Default for DistConfig {
    fn default() -> Self {
        Self {
            bins: dist::DEFAULT_BINS,
            burn_in: None,
            snapshots: 10,
            spacing: 10,
            lambda_bins: 5,
            min_bin_count: dist::DEFAULT_MIN_BIN_COUNT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RrnConfig {
    pub side: usize,
    pub realizations: usize,
    /// Sweeps per realization; falls back to the top-level `t_max`.
    pub t_max: Option<usize>,
    /// Initial interior potential, or `"ramp"`.
    pub init_potential: NumberOr,
    /// Compare each window's first realization against a dense solve.
    pub dense_check: bool,
}

impl Default for RrnConfig {
    fn default() -> Self {
        Self {
            side: 100,
            realizations: 20,
            t_max: None,
            init_potential: NumberOr::Value(0.5),
            dense_check: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Series CSV to fit (`t,x_mean` columns).
    pub input: Option<PathBuf>,
}

fn default_n_agents() -> usize {
    100
}
fn default_t_max() -> usize {
    200
}
fn default_n_configs() -> usize {
    10_000
}
fn default_seed() -> u64 {
    1
}
fn default_tail() -> f64 {
    crate::observer::DEFAULT_TAIL_FRACTION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; must match the subcommand when present.
    pub experiment: Option<ExperimentKind>,
    #[serde(default = "default_n_agents")]
    pub n_agents: usize,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
    #[serde(default = "default_n_configs")]
    pub n_configs: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_tail")]
    pub tail_fraction: f64,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub dist: DistConfig,
    #[serde(default)]
    pub rrn: RrnConfig,
    #[serde(default)]
    pub fit: FitConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config takes every default")
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// What an experiment produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub experiment: String,
    /// `(file name, 64-bit digest)` in write order.
    pub outputs: Vec<OutputFile>,
    pub notes: Vec<String>,
    /// Assertion failures; turned into a nonzero exit under `--strict`.
    pub check_failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub digest: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    experiment: &'a str,
    started: String,
    finished: String,
    threads: usize,
    config: &'a ExperimentConfig,
    outputs: &'a [OutputFile],
    notes: &'a [String],
    check_failures: &'a [String],
}

struct Writer<'a> {
    dir: &'a Path,
    report: RunReport,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, doc: &CsvDoc) -> Result<()> {
        let digest = doc.write(&self.dir.join(name))?;
        self.report.outputs.push(OutputFile {
            file: name.to_string(),
            digest,
        });
        Ok(())
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.report.notes.push(msg.into());
    }

    fn fail(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        self.report.notes.push(format!("CHECK FAILED: {msg}"));
        self.report.check_failures.push(msg);
    }
}

fn window_label(w: (f64, f64)) -> String {
    format!("{}_{}", w.0, w.1)
}

fn list_or_default<T: Clone>(list: &Option<Vec<T>>, default: &[T], key: &str) -> Result<Vec<T>> {
    match list {
        None => Ok(default.to_vec()),
        Some(v) if v.is_empty() => Err(Error::Config(format!("sweep.{key} must not be empty"))),
        Some(v) => Ok(v.clone()),
    }
}

/// Runs `kind` with `cfg`, writing every output into `out_dir`.
pub fn run_experiment(kind: ExperimentKind, cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    if let Some(declared) = cfg.experiment {
        if declared != kind {
            return Err(Error::Config(format!(
                "config declares experiment `{}` but `{}` was requested",
                declared.name(),
                kind.name()
            )));
        }
    }
    let started = chrono::Utc::now().to_rfc3339();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut w = Writer {
        dir: out_dir,
        report: RunReport {
            experiment: kind.name().into(),
            ..RunReport::default()
        },
    };
    match kind {
        ExperimentKind::Relax => cmd_relax(cfg, &mut w)?,
        ExperimentKind::Dist => cmd_dist(cfg, &mut w)?,
        ExperimentKind::EpsSweep => cmd_eps_sweep(cfg, &mut w)?,
        ExperimentKind::LambdaFamily => cmd_lambda_family(cfg, &mut w)?,
        ExperimentKind::Rrn => cmd_rrn(cfg, &mut w)?,
        ExperimentKind::Fit => cmd_fit(cfg, &mut w)?,
    }
    let report = w.report;
    let manifest = Manifest {
        tool: "kinex",
        version: env!("CARGO_PKG_VERSION"),
        experiment: kind.name(),
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        threads: rayon::current_num_threads(),
        config: cfg,
        outputs: &report.outputs,
        notes: &report.notes,
        check_failures: &report.check_failures,
    };
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(report)
}

fn fit_doc(series: &RelaxationSeries, fits: &[(FitForm, &Result<crate::expfit::ExpFitResult>)]) -> CsvDoc {
    let mut doc = CsvDoc::new(FIT_COLUMNS);
    doc.comment("kinex", "exponential fits");
    doc.comment("spec_hash", io::hash_of(&series.source));
    doc.comment("seed", series.master_seed);
    doc.comment("units", "t in time steps; tau in time steps; x0 and amplitude in series units");
    for (form, fit) in fits {
        doc.row(io::fit_row(*form, fit));
    }
    doc
}

fn relaxation(cfg: &ExperimentConfig, spec: &ModelSpec) -> Result<RelaxationSeries> {
    run_relaxation(spec, cfg.n_agents, cfg.t_max, cfg.n_configs, cfg.master_seed)
}

fn cmd_relax(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let spec = cfg.model.to_spec(EpsilonMode::RandomUniform01)?;
    let series = relaxation(cfg, &spec)?;
    w.write("series_relax.csv", &io::series_doc(&series))?;

    let mut fits = vec![(FitForm::ShiftedApproach, fit_auto(&series, FitForm::ShiftedApproach, cfg.tail_fraction))];
    if spec.epsilon == EpsilonMode::Fixed(0.5) {
        fits.push((FitForm::PureDecay, fit_auto(&series, FitForm::PureDecay, cfg.tail_fraction)));
    }
    for (form, fit) in &fits {
        match fit {
            Ok(f) => w.note(format!(
                "{} fit: tau = {:.4} over [{}, {}], r2 = {:.5}",
                form.as_str(),
                f.tau,
                f.window.0,
                f.window.1,
                f.r_squared
            )),
            Err(e) => w.note(format!("{} fit failed: {e}", form.as_str())),
        }
    }
    let refs: Vec<_> = fits.iter().map(|(f, r)| (*f, r)).collect();
    w.write("fit_relax.csv", &fit_doc(&series, &refs))
}

fn tau_table_header(param: &str) -> Vec<String> {
    [
        &format!("{param}_lo"),
        &format!("{param}_hi"),
        "window_mean",
        "t_lo",
        "t_hi",
        "tau",
        "tau_std_err",
        "r_squared",
        "status",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn tau_row(window: (f64, f64), fit: &Result<crate::expfit::ExpFitResult>) -> Vec<String> {
    let mut row = vec![fmt_f64(window.0), fmt_f64(window.1), fmt_f64(0.5 * (window.0 + window.1))];
    match fit {
        Ok(f) => row.extend([
            f.window.0.to_string(),
            f.window.1.to_string(),
            fmt_f64(f.tau),
            fmt_f64(f.tau_std_err),
            fmt_f64(f.r_squared),
            "ok".to_string(),
        ]),
        Err(e) => {
            row.extend(std::iter::repeat_n(String::new(), 5));
            row.push(e.tag().to_string());
        }
    }
    row
}

/// Sorts windows by their mean, keeping the given order on ties.
fn sorted_by_mean(mut windows: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    windows.sort_by(|a, b| (a.0 + a.1).total_cmp(&(b.0 + b.1)));
    windows
}

fn cmd_lambda_family(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let windows = sorted_by_mean(list_or_default(
        &cfg.sweep.lambda_windows,
        &DEFAULT_LAMBDA_WINDOWS,
        "lambda_windows",
    )?);
    let mut model = cfg.model.clone();
    model.rule = RuleName::DistributedSaving;
    model.lambda_window.get_or_insert(windows[0]);
    let base = model.to_spec(EpsilonMode::Fixed(0.5))?;

    let mut table = CsvDoc::new(tau_table_header("lambda"));
    table.comment("kinex", "relaxation time per saving window (pure fit over automatic window)");
    table.comment("seed", cfg.master_seed);
    table.comment("n", cfg.n_agents);
    table.comment("n_configs", cfg.n_configs);
    table.comment("units", "tau in time steps");
    let mut taus = Vec::new();
    for &(lo, hi) in &windows {
        let spec = ModelSpec {
            rule: ExchangeRule::DistributedSaving {
                lambda_min: lo,
                lambda_max: hi,
            },
            ..base
        };
        let series = relaxation(cfg, &spec)?;
        let label = window_label((lo, hi));
        w.write(&format!("series_lambda_{label}.csv"), &io::series_doc(&series))?;
        let fit = fit_auto(&series, FitForm::PureDecay, cfg.tail_fraction);
        w.write(&format!("fit_lambda_{label}.csv"), &fit_doc(&series, &[(FitForm::PureDecay, &fit)]))?;
        table.row(tau_row((lo, hi), &fit));
        taus.push(fit.ok().map(|f| f.tau));
    }
    w.write("tau_table.csv", &table)?;

    if taus.len() > 1 {
        let increasing = taus.windows(2).all(|p| matches!(p, [Some(a), Some(b)] if a < b));
        if increasing {
            w.note("tau strictly increases with the mean of the saving window");
        } else {
            w.fail(format!("tau is not strictly increasing with window mean: {taus:?}"));
        }
    }
    Ok(())
}

fn cmd_eps_sweep(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let eps_values = list_or_default(&cfg.sweep.eps, &DEFAULT_EPS_VALUES, "eps")?;
    let base = cfg.model.to_spec(EpsilonMode::Fixed(0.5))?;
    if !matches!(base.rule, ExchangeRule::DistributedSaving { .. }) {
        return Err(Error::Config("eps-sweep needs model.rule = \"distributed_saving\"".into()));
    }
    let mut rows = Vec::new();
    for &eps in &eps_values {
        let spec = ModelSpec {
            epsilon: EpsilonMode::Fixed(eps),
            ..base
        };
        spec.validate()?;
        let series = relaxation(cfg, &spec)?;
        w.write(&format!("series_eps_{eps}.csv"), &io::series_doc(&series))?;
        let tail = tail_stats(&series, cfg.tail_fraction)?;
        rows.push((eps, tail));
    }
    let argmin = rows
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.mean.total_cmp(&b.1 .1.mean))
        .map(|(i, _)| i)
        .expect("non-empty sweep");

    let mut doc = CsvDoc::new(["eps", "x0", "x0_std_err", "argmin"]);
    doc.comment("kinex", "equilibrium X0 (trailing-window mean) per epsilon");
    doc.comment("seed", cfg.master_seed);
    doc.comment("n", cfg.n_agents);
    doc.comment("n_configs", cfg.n_configs);
    doc.comment("tail_fraction", cfg.tail_fraction);
    doc.comment("units", "x0 in money units");
    for (i, (eps, tail)) in rows.iter().enumerate() {
        doc.row([
            fmt_f64(*eps),
            fmt_f64(tail.mean),
            fmt_f64(tail.std_err),
            (i == argmin).to_string(),
        ]);
    }
    w.write("x0_table.csv", &doc)?;
    w.note(format!("X0 is smallest at eps = {}", rows[argmin].0));
    Ok(())
}

fn cmd_dist(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let spec = cfg.model.to_spec(EpsilonMode::RandomUniform01)?;
    let d = &cfg.dist;
    let burn_in = match d.burn_in {
        Some(b) => b,
        None => {
            let series = relaxation(cfg, &spec)?;
            match fit_auto(&series, FitForm::ShiftedApproach, cfg.tail_fraction) {
                Ok(f) => {
                    let b = ((5.0 * f.tau).ceil() as usize).max(50);
                    w.note(format!("burn-in {b} steps from relaxation fit tau = {:.3}", f.tau));
                    b
                }
                Err(e) => {
                    let b = cfg.t_max.max(50);
                    w.note(format!("relaxation fit failed ({e}); burn-in set to {b} steps"));
                    b
                }
            }
        }
    };
    let sampling = Sampling {
        burn_in,
        snapshots: d.snapshots,
        spacing: d.spacing,
    };
    let sample = dist::sample_equilibrium(&spec, cfg.n_agents, sampling, cfg.n_configs, cfg.master_seed)?;
    let hist = dist::histogram(&sample.wealth, d.bins)?;
    let mean = sample.mean_wealth();

    let mut doc = CsvDoc::new(["bin_lo", "bin_hi", "count", "density"]);
    doc.comment("kinex", "pooled equilibrium wealth histogram");
    doc.comment("spec_hash", io::hash_of(&spec));
    doc.comment("seed", cfg.master_seed);
    doc.comment("n", cfg.n_agents);
    doc.comment("n_configs", cfg.n_configs);
    doc.comment("burn_in", burn_in);
    doc.comment("snapshots", format!("{} every {} steps", d.snapshots, d.spacing));
    doc.comment("mean_wealth", fmt_f64(mean));
    doc.comment("units", "wealth in money units; density per money unit");
    for b in &hist {
        doc.row([fmt_f64(b.lo), fmt_f64(b.hi), b.count.to_string(), fmt_f64(b.density)]);
    }
    w.write("hist_dist.csv", &doc)?;

    match dist::semilog_fit(&hist, d.min_bin_count) {
        Ok(f) => w.note(format!(
            "semi-log slope {:.5} (-1/<w> = {:.5}), r2 = {:.5}",
            f.slope,
            -1.0 / mean,
            f.r_squared
        )),
        Err(e) => w.note(format!("semi-log fit unavailable: {e}")),
    }
    if let Some(m) = dist::mode_bin(&hist) {
        w.note(format!("mode bin [{:.4}, {:.4})", hist[m].lo, hist[m].hi));
    }

    if let ExchangeRule::DistributedSaving {
        lambda_min,
        lambda_max,
    } = spec.rule
    {
        let bins = dist::lambda_binned_means(
            &sample.agent_lambda,
            &sample.agent_mean_wealth,
            d.lambda_bins,
            (lambda_min, lambda_max),
        )?;
        let mut doc = CsvDoc::new(["lambda_lo", "lambda_hi", "agents", "mean_wealth"]);
        doc.comment("kinex", "time-averaged equilibrium wealth by saving propensity");
        doc.comment("seed", cfg.master_seed);
        doc.comment("units", "wealth in money units");
        for b in &bins {
            doc.row([fmt_f64(b.lo), fmt_f64(b.hi), b.agents.to_string(), fmt_f64(b.mean_wealth)]);
        }
        w.write("lambda_bins.csv", &doc)?;
        let monotone = bins.windows(2).all(|p| p[0].mean_wealth <= p[1].mean_wealth);
        if monotone {
            w.note("mean wealth is non-decreasing in lambda");
        } else {
            w.note("mean wealth is NOT monotone in lambda");
        }
    }
    Ok(())
}

fn potential_init(setting: NumberOr) -> Result<PotentialInit> {
    match setting {
        NumberOr::Value(v) if (0.0..=1.0).contains(&v) => Ok(PotentialInit::Uniform(v)),
        NumberOr::Value(v) => Err(Error::Config(format!("rrn.init_potential {v} outside [0, 1]"))),
        NumberOr::Word(Word::Ramp) => Ok(PotentialInit::Ramp),
        NumberOr::Word(w) => Err(Error::Config(format!("rrn.init_potential cannot be {w:?}"))),
    }
}

/// Largest difference between Jacobi-converged and dense-solved potentials.
pub const DENSE_CHECK_TOLERANCE: f64 = 1e-8;

fn cmd_rrn(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let windows = list_or_default(&cfg.sweep.g_windows, &DEFAULT_G_WINDOWS, "g_windows")?;
    let r = &cfg.rrn;
    let init = potential_init(r.init_potential)?;
    let t_max = r.t_max.unwrap_or(cfg.t_max);

    let mut table = CsvDoc::new(tau_table_header("g"));
    table.comment("kinex", "relaxation time per conductance window (pure fit over automatic window)");
    table.comment("seed", cfg.master_seed);
    table.comment("L", r.side);
    table.comment("n_configs", r.realizations);
    table.comment("units", "tau in sweeps");
    let mut dense = CsvDoc::new(["g_lo", "g_hi", "sweeps", "max_abs_diff", "max_residual"]);
    dense.comment("kinex", "Jacobi fixed point vs dense Kirchhoff solve (realization 0)");
    dense.comment("seed", cfg.master_seed);
    dense.comment("L", r.side);

    for &g in &windows {
        let series = run_rrn_relaxation(r.side, g, init, t_max, r.realizations, cfg.master_seed)?;
        let label = window_label(g);
        w.write(&format!("series_rrn_{label}.csv"), &io::series_doc(&series))?;
        let fit = fit_auto(&series, FitForm::PureDecay, cfg.tail_fraction);
        w.write(&format!("fit_rrn_{label}.csv"), &fit_doc(&series, &[(FitForm::PureDecay, &fit)]))?;
        table.row(tau_row(g, &fit));

        if r.dense_check {
            let mut lat = ResistorLattice::build(r.side, g, init, &mut RngStream::new(cfg.master_seed, 0).rng())?;
            let exact = lat.dense_solution()?;
            let sweeps = lat.relax_to_convergence(1e-13, 50_000_000);
            let diff = exact
                .iter()
                .zip(lat.interior())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let residual = lat.max_residual();
            dense.row([
                fmt_f64(g.0),
                fmt_f64(g.1),
                sweeps.map_or_else(|| "not converged".into(), |s| s.to_string()),
                fmt_f64(diff),
                fmt_f64(residual),
            ]);
            if diff < DENSE_CHECK_TOLERANCE {
                w.note(format!("window {label}: dense check max diff {diff:.3e}, residual {residual:.3e}"));
            } else {
                w.fail(format!("window {label}: dense check max diff {diff:.3e} exceeds {DENSE_CHECK_TOLERANCE:e}"));
            }
        }
    }
    w.write("tau_table.csv", &table)?;
    if r.dense_check {
        w.write("rrn_dense_check.csv", &dense)?;
    }
    Ok(())
}

fn cmd_fit(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let input = cfg
        .fit
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("fit.input must name a series CSV".into()))?;
    let series = io::read_series(input)?;
    let fits = [FitForm::ShiftedApproach, FitForm::PureDecay].map(|f| (f, fit_auto(&series, f, cfg.tail_fraction)));
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
    let refs: Vec<_> = fits.iter().map(|(f, r)| (*f, r)).collect();
    let mut doc = fit_doc(&series, &refs);
    doc.comment("input", input.display());
    w.write(&format!("fit_{stem}.csv"), &doc)
}
