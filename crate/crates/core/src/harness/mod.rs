//! Monte Carlo comparison of filter variants on shared simulated scenarios.
//!
//! Every trial draws one scenario from a seed derived from the master seed
//! and the trial index. All variants run on that same scenario and share the
//! same filter-side random streams, so the only difference between two
//! variants is their roughening configuration.

mod config;
pub mod output;

use rayon::prelude::*;

pub use config::{apply_config_text, Preset};

use crate::error::{Error, Result};
use crate::filter::{FilterConfig, PhdFilter};
use crate::metrics::{gain_ratio, ospa_positions, ospa_states, OspaParams};
use crate::rng::{mix64, trial_seed};
use crate::roughening::{Mode, RougheningConfig};
use crate::scenario::{simulate, ScenarioConfig};

/// Default roughening-strength grid for sweeps.
pub const DEFAULT_SWEEP: [f64; 7] = [0.0, 0.1, 0.2, 0.4, 0.8, 1.6, 2.5];

/// A named filter configuration under comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub name: String,
    pub roughening: RougheningConfig,
}

impl Variant {
    pub fn new(name: impl Into<String>, roughening: RougheningConfig) -> Self {
        Self { name: name.into(), roughening }
    }

    pub fn basic() -> Self {
        Self::new("basic", RougheningConfig::none())
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub filter: FilterConfig,
    pub variants: Vec<Variant>,
    pub trials: usize,
    pub master_seed: u64,
    pub ospa: OspaParams,
    /// OSPA over the full state instead of position only.
    pub full_state_ospa: bool,
    pub sweep: Vec<f64>,
    /// Run trials on the rayon pool.
    pub parallel: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.filter.validate()?;
        self.ospa.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::InvalidConfig("at least one variant is required".into()));
        }
        if !self.variants.iter().any(|v| v.roughening.mode == Mode::None) {
            return Err(Error::InvalidConfig("variants must include a basic (mode = none) arm".into()));
        }
        for (i, v) in self.variants.iter().enumerate() {
            v.roughening.validate()?;
            if self.variants[..i].iter().any(|o| o.name == v.name) {
                return Err(Error::InvalidConfig(format!("duplicate variant name `{}`", v.name)));
            }
            if v.name.is_empty() || v.name.contains(char::is_whitespace) {
                return Err(Error::InvalidConfig(format!("invalid variant name `{}`", v.name)));
            }
        }
        if self.sweep.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(Error::InvalidConfig("sweep values must be finite and >= 0".into()));
        }
        Ok(())
    }

    fn basic_index(&self) -> usize {
        self.variants.iter().position(|v| v.roughening.mode == Mode::None).unwrap_or(0)
    }
}

/// Per-step record of one variant in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantTrace {
    pub est_n: Vec<usize>,
    pub ospa: Vec<f64>,
    /// Step at which the posterior mass collapsed to zero, if any.
    pub collapsed_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub scan_fingerprint: u64,
    pub true_n: Vec<usize>,
    /// Same order as `RunConfig::variants`.
    pub variants: Vec<VariantTrace>,
}

/// Runs every variant on one simulated scenario.
pub fn run_trial(config: &RunConfig, trial_index: usize) -> Result<TrialResult> {
    let seed = trial_seed(config.master_seed, trial_index as u64);
    let scenario = simulate(&config.scenario, seed)?;
    let fingerprint = scenario.scans.fingerprint();
    let filter_seed = mix64(seed ^ 0xF11E_5EED);
    let steps = config.scenario.steps;
    let true_n = scenario.truth.steps.iter().map(Vec::len).collect();

    let mut traces = Vec::with_capacity(config.variants.len());
    for variant in &config.variants {
        let mut filter =
            PhdFilter::new(config.scenario.models.clone(), config.filter, variant.roughening, filter_seed)?;
        let mut est_n = Vec::with_capacity(steps);
        let mut ospa = Vec::with_capacity(steps);
        let mut collapsed_at = None;
        for (k, scan) in scenario.scans.scans.iter().enumerate() {
            if collapsed_at.is_some() {
                est_n.push(0);
                ospa.push(config.ospa.cutoff);
                continue;
            }
            let out = filter.step(scan)?;
            if out.track_loss {
                log::warn!("trial {trial_index}, variant {}: track loss at step {}", variant.name, k + 1);
                collapsed_at = Some(k + 1);
                est_n.push(0);
                ospa.push(config.ospa.cutoff);
                continue;
            }
            let truth = scenario.truth.states_at(k + 1);
            let d = if config.full_state_ospa {
                ospa_states(&out.estimate.states, &truth, &config.ospa)?
            } else {
                ospa_positions(&out.estimate.states, &truth, &config.ospa)?
            };
            est_n.push(out.estimate.cardinality);
            ospa.push(d);
        }
        traces.push(VariantTrace { est_n, ospa, collapsed_at });
    }
    Ok(TrialResult { trial: trial_index, seed, scan_fingerprint: fingerprint, true_n, variants: traces })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantSummary {
    pub name: String,
    pub mode: Mode,
    pub mean_true_n: Vec<f64>,
    pub mean_est_n: Vec<f64>,
    pub mean_ospa: Vec<f64>,
    /// Mean OSPA over all steps and trials.
    pub overall_ospa: f64,
    /// Against the basic arm; `None` for the basic arm itself.
    pub gain_ratio: Option<f64>,
    pub collapses: usize,
}

impl VariantSummary {
    /// Mean OSPA over the 1-based inclusive step window.
    pub fn window_ospa(&self, first: usize, last: usize) -> f64 {
        let slice = &self.mean_ospa[first - 1..last];
        slice.iter().sum::<f64>() / slice.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub trials: usize,
    pub steps: usize,
    pub variants: Vec<VariantSummary>,
}

impl RunSummary {
    pub fn variant(&self, name: &str) -> Option<&VariantSummary> {
        self.variants.iter().find(|v| v.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub trials: Vec<TrialResult>,
    pub summary: RunSummary,
}

/// Aggregates trial results in trial order.
pub fn summarize(config: &RunConfig, trials: &[TrialResult]) -> Result<RunSummary> {
    let steps = config.scenario.steps;
    let n = trials.len() as f64;
    let mut variants: Vec<VariantSummary> = config
        .variants
        .iter()
        .enumerate()
        .map(|(v, variant)| {
            let mut true_n = vec![0.0; steps];
            let mut est_n = vec![0.0; steps];
            let mut ospa = vec![0.0; steps];
            let mut total = 0.0;
            let mut collapses = 0;
            for t in trials {
                let trace = &t.variants[v];
                for k in 0..steps {
                    true_n[k] += t.true_n[k] as f64;
                    est_n[k] += trace.est_n[k] as f64;
                    ospa[k] += trace.ospa[k];
                    total += trace.ospa[k];
                }
                collapses += usize::from(trace.collapsed_at.is_some());
            }
            let div = |xs: Vec<f64>| xs.into_iter().map(|x| x / n).collect::<Vec<f64>>();
            VariantSummary {
                name: variant.name.clone(),
                mode: variant.roughening.mode,
                mean_true_n: div(true_n),
                mean_est_n: div(est_n),
                mean_ospa: div(ospa),
                overall_ospa: total / (n * steps as f64),
                gain_ratio: None,
                collapses,
            }
        })
        .collect();
    let basic = config.basic_index();
    let basic_ospa = variants[basic].overall_ospa;
    for (i, v) in variants.iter_mut().enumerate() {
        if i != basic {
            v.gain_ratio = Some(gain_ratio(basic_ospa, v.overall_ospa)?);
        }
    }
    Ok(RunSummary { trials: trials.len(), steps, variants })
}

/// Runs all trials and aggregates them.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let trials: Vec<TrialResult> = if config.parallel {
        (0..config.trials).into_par_iter().map(|i| run_trial(config, i)).collect::<Result<_>>()?
    } else {
        (0..config.trials).map(|i| run_trial(config, i)).collect::<Result<_>>()?
    };
    let summary = summarize(config, &trials)?;
    Ok(RunReport { trials, summary })
}

/// Gain ratios of both roughening modes at one strength.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub delta: f64,
    pub separate: VariantSummary,
    pub direct: VariantSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub basic: VariantSummary,
    pub points: Vec<SweepPoint>,
}

/// Sweep variant name for a mode and strength.
pub fn sweep_variant_name(mode: Mode, delta: f64) -> String {
    let tag = match mode {
        Mode::Separate => "separate",
        Mode::Direct => "direct",
        Mode::None => "basic",
    };
    format!("{tag}@{delta}")
}

/// Repeats the comparison for every strength in `config.sweep` (or the
/// default grid), for both roughening modes.
///
/// All strengths run inside one paired run, so every point shares the same
/// scenarios and the same basic arm. Proposal knobs (selective,
/// overlapped-only, cap) are taken from the first separate or direct variant
/// of `config`, if any.
pub fn sweep(config: &RunConfig) -> Result<SweepReport> {
    let deltas: Vec<f64> = if config.sweep.is_empty() { DEFAULT_SWEEP.to_vec() } else { config.sweep.clone() };
    let template = |mode: Mode| {
        config
            .variants
            .iter()
            .find(|v| v.roughening.mode == mode)
            .map(|v| v.roughening)
            .unwrap_or_else(|| RougheningConfig::velocity(mode, 0.0))
    };
    let mut variants = vec![Variant::basic()];
    for &delta in &deltas {
        for mode in [Mode::Separate, Mode::Direct] {
            let rough = RougheningConfig { jitter_std: [0.0, delta, 0.0, delta], gordon: None, ..template(mode) };
            variants.push(Variant::new(sweep_variant_name(mode, delta), rough));
        }
    }
    let swept = RunConfig { variants, ..config.clone() };
    let report = run(&swept)?;
    let mut by_name = report.summary.variants.into_iter();
    let basic = by_name.next().expect("basic arm");
    let rest: Vec<VariantSummary> = by_name.collect();
    let points = deltas
        .iter()
        .zip(rest.chunks(2))
        .map(|(&delta, pair)| SweepPoint { delta, separate: pair[0].clone(), direct: pair[1].clone() })
        .collect();
    Ok(SweepReport { basic, points })
}
