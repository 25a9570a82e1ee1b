//! Run configuration presets and the key/value config file.
//!
//! The config file is TOML. Tables and dotted keys are flattened to dotted
//! names, so `[filter]\nparticles_per_target = 200` and
//! `filter.particles_per_target = 200` are the same setting. Unknown keys are
//! rejected.
//!
//! ```toml
//! run.preset = "paper-np200"
//! run.trials = 100
//! run.master_seed = 7
//! run.sweep = [0.0, 0.2, 0.4]
//! filter.particles_per_target = 200
//! clutter.rate = 10
//! roughening.variants = ["basic", "separate", "direct"]
//! roughening.separate.jitter_std = [0.0, 0.4, 0.0, 0.4]
//! roughening.direct.delta = 0.4
//! ```

use std::collections::BTreeMap;
use std::str::FromStr;

use toml::Value;

use super::{RunConfig, Variant, DEFAULT_SWEEP};
use crate::error::{Error, Result};
use crate::filter::FilterConfig;
use crate::metrics::OspaParams;
use crate::models::{Region, StateVector};
use crate::resampling::Scheme;
use crate::roughening::{GordonConfig, GordonExponent, Mode, RougheningConfig, DEFAULT_UNIQUE_FRACTION};
use crate::scenario::{ScenarioConfig, TargetSpec};

/// Master seed of the built-in presets.
pub const PRESET_SEED: u64 = 20_130_415;

/// Four-target benchmark presets differing in the particle budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    PaperNp200,
    PaperNp1000,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-np200" => Ok(Preset::PaperNp200),
            "paper-np1000" => Ok(Preset::PaperNp1000),
            other => Err(Error::InvalidConfig(format!("unknown preset `{other}`"))),
        }
    }
}

impl Preset {
    pub fn particles_per_target(self) -> usize {
        match self {
            Preset::PaperNp200 => 200,
            Preset::PaperNp1000 => 1000,
        }
    }

    /// Basic, separate and direct arms with velocity jitter 0.4 over 100
    /// trials of the four-target scenario.
    pub fn config(self) -> RunConfig {
        RunConfig {
            scenario: ScenarioConfig::paper(),
            filter: FilterConfig::new(self.particles_per_target()),
            variants: vec![
                Variant::basic(),
                Variant::new("separate", RougheningConfig::velocity(Mode::Separate, 0.4)),
                Variant::new("direct", RougheningConfig::velocity(Mode::Direct, 0.4)),
            ],
            trials: 100,
            master_seed: PRESET_SEED,
            ospa: OspaParams::default(),
            full_state_ospa: false,
            sweep: DEFAULT_SWEEP.to_vec(),
            parallel: true,
        }
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

fn bad(key: &str, what: &str) -> Error {
    Error::InvalidConfig(format!("`{key}`: expected {what}"))
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(bad(key, "a number")),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(bad(key, "a non-negative integer")),
    }
}

fn as_bool(key: &str, v: &Value) -> Result<bool> {
    v.as_bool().ok_or_else(|| bad(key, "a boolean"))
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| bad(key, "a string"))
}

fn as_f64_vec(key: &str, v: &Value) -> Result<Vec<f64>> {
    v.as_array().ok_or_else(|| bad(key, "an array of numbers"))?.iter().map(|x| as_f64(key, x)).collect()
}

fn as_usize_vec(key: &str, v: &Value) -> Result<Vec<usize>> {
    v.as_array().ok_or_else(|| bad(key, "an array of integers"))?.iter().map(|x| as_usize(key, x)).collect()
}

fn as_array<const N: usize>(key: &str, v: &Value) -> Result<[f64; N]> {
    let xs = as_f64_vec(key, v)?;
    xs.try_into().map_err(|_| bad(key, &format!("exactly {N} numbers")))
}

fn as_bool4(key: &str, v: &Value) -> Result<[bool; 4]> {
    let arr = v.as_array().ok_or_else(|| bad(key, "an array of 4 booleans"))?;
    let xs: Vec<bool> = arr.iter().map(|x| as_bool(key, x)).collect::<Result<_>>()?;
    xs.try_into().map_err(|_| bad(key, "exactly 4 booleans"))
}

/// Applies a config document on top of `base` (or on top of the preset named
/// by `run.preset`, when present).
pub fn apply_config_text(base: RunConfig, text: &str) -> Result<RunConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::InvalidConfig(e.to_string()))?;
    let mut keys = BTreeMap::new();
    flatten("", &table, &mut keys);

    let mut cfg = match keys.remove("run.preset") {
        Some(v) => Preset::from_str(as_str("run.preset", &v)?)?.config(),
        None => base,
    };

    // Variant declarations come first so per-variant keys can find them.
    if let Some(v) = keys.remove("roughening.variants") {
        let names = v.as_array().ok_or_else(|| bad("roughening.variants", "an array of names"))?;
        let mut variants = Vec::new();
        for n in names {
            let name = as_str("roughening.variants", n)?.to_string();
            let rough = cfg
                .variants
                .iter()
                .find(|v| v.name == name)
                .map(|v| v.roughening)
                .unwrap_or_else(|| default_for_name(&name));
            variants.push(Variant::new(name, rough));
        }
        cfg.variants = variants;
    }

    let mut births: Option<Vec<usize>> = None;
    let mut deaths: Option<Vec<usize>> = None;
    let mut initial: Option<Vec<Option<StateVector>>> = None;
    let mut min_particles_set = false;

    for (key, v) in &keys {
        let k = key.as_str();
        let models = &mut cfg.scenario.models;
        match k {
            "run.trials" => cfg.trials = as_usize(k, v)?,
            "run.master_seed" => {
                cfg.master_seed = match v {
                    Value::Integer(i) => *i as u64,
                    _ => return Err(bad(k, "an integer")),
                }
            }
            "run.sweep" => cfg.sweep = as_f64_vec(k, v)?,
            "run.parallel" => cfg.parallel = as_bool(k, v)?,
            "scenario.steps" => cfg.scenario.steps = as_usize(k, v)?,
            "scenario.births" => births = Some(as_usize_vec(k, v)?),
            "scenario.deaths" => deaths = Some(as_usize_vec(k, v)?),
            "scenario.initial_states" => {
                let rows = v.as_array().ok_or_else(|| bad(k, "an array of 4-vectors"))?;
                initial = Some(
                    rows.iter()
                        .map(|r| match r {
                            Value::Array(a) if a.is_empty() => Ok(None),
                            other => as_array::<4>(k, other).map(|s| Some(StateVector(s))),
                        })
                        .collect::<Result<_>>()?,
                );
            }
            "motion.dt" => models.motion.dt = as_f64(k, v)?,
            "motion.sigma_v1" => models.motion.sigma_v1 = as_f64(k, v)?,
            "motion.sigma_v2" => models.motion.sigma_v2 = as_f64(k, v)?,
            "measurement.sigma_w1" => models.measurement.sigma_w1 = as_f64(k, v)?,
            "measurement.sigma_w2" => models.measurement.sigma_w2 = as_f64(k, v)?,
            "birth.mass" => models.birth.mass = as_f64(k, v)?,
            "birth.mean" => models.birth.mean = StateVector(as_array::<4>(k, v)?),
            "birth.cov_diag" => models.birth.cov_diag = as_array::<4>(k, v)?,
            "clutter.rate" => models.clutter.rate = as_f64(k, v)?,
            "clutter.region" => {
                let [a, b, c, d] = as_array::<4>(k, v)?;
                models.clutter.region = Region::new(a, b, c, d);
            }
            "detection.p_survive" => models.detection.p_survive = as_f64(k, v)?,
            "detection.p_detect" => models.detection.p_detect = as_f64(k, v)?,
            "filter.particles_per_target" => cfg.filter.particles_per_target = as_usize(k, v)?,
            "filter.birth_particles" => cfg.filter.birth_particles = Some(as_usize(k, v)?),
            "filter.min_particles" | "resample.min_particles" => {
                cfg.filter.min_particles = as_usize(k, v)?;
                min_particles_set = true;
            }
            "resample.scheme" => cfg.filter.resample_scheme = Scheme::from_str(as_str(k, v)?)?,
            "ospa.cutoff" => cfg.ospa.cutoff = as_f64(k, v)?,
            "ospa.order" => cfg.ospa.order = as_f64(k, v)?,
            "ospa.full_state" => cfg.full_state_ospa = as_bool(k, v)?,
            _ if k.starts_with("roughening.") => apply_variant_key(&mut cfg, k, v)?,
            _ => return Err(Error::InvalidConfig(format!("unknown key `{k}`"))),
        }
    }
    if keys.contains_key("filter.particles_per_target") && !min_particles_set {
        cfg.filter.min_particles = cfg.filter.particles_per_target.div_ceil(2);
    }

    if births.is_some() || deaths.is_some() || initial.is_some() {
        let births = births.unwrap_or_else(|| cfg.scenario.targets.iter().map(|t| t.birth_step).collect());
        let deaths = deaths.unwrap_or_else(|| cfg.scenario.targets.iter().map(|t| t.death_step).collect());
        if births.len() != deaths.len() {
            return Err(Error::InvalidConfig("scenario.births and scenario.deaths differ in length".into()));
        }
        let initial = initial.unwrap_or_else(|| vec![None; births.len()]);
        if initial.len() != births.len() {
            return Err(Error::InvalidConfig("scenario.initial_states length mismatch".into()));
        }
        cfg.scenario.targets = births
            .into_iter()
            .zip(deaths)
            .zip(initial)
            .map(|((b, d), s)| TargetSpec { birth_step: b, death_step: d, initial: s })
            .collect();
    }

    cfg.validate()?;
    Ok(cfg)
}

fn default_for_name(name: &str) -> RougheningConfig {
    match name {
        "separate" => RougheningConfig::velocity(Mode::Separate, 0.4),
        "direct" => RougheningConfig::velocity(Mode::Direct, 0.4),
        _ => RougheningConfig::none(),
    }
}

fn apply_variant_key(cfg: &mut RunConfig, key: &str, v: &Value) -> Result<()> {
    let rest = &key["roughening.".len()..];
    let (name, field) =
        rest.rsplit_once('.').ok_or_else(|| Error::InvalidConfig(format!("unknown key `{key}`")))?;
    let variant = cfg
        .variants
        .iter_mut()
        .find(|x| x.name == name)
        .ok_or_else(|| Error::InvalidConfig(format!("`{key}`: no variant named `{name}`")))?;
    let r = &mut variant.roughening;
    match field {
        "mode" => r.mode = Mode::from_str(as_str(key, v)?)?,
        "jitter_std" => r.jitter_std = as_array::<4>(key, v)?,
        "delta" => {
            let d = as_f64(key, v)?;
            r.jitter_std = [0.0, d, 0.0, d];
        }
        "gordon_k" => {
            let k = as_f64(key, v)?;
            r.gordon = Some(GordonConfig { k, ..r.gordon.unwrap_or(GordonConfig::velocity_only(k)) });
            r.jitter_std = [0.0; 4];
        }
        "gordon_dims" => {
            let dims = as_bool4(key, v)?;
            let g = r.gordon.get_or_insert(GordonConfig::velocity_only(0.0));
            g.dims = dims;
        }
        "gordon_exponent" => {
            let e = match as_str(key, v)? {
                "shrinking" => GordonExponent::Shrinking,
                "growing" => GordonExponent::Growing,
                _ => return Err(bad(key, "`shrinking` or `growing`")),
            };
            r.gordon.get_or_insert(GordonConfig::velocity_only(0.0)).exponent = e;
        }
        "selective" => {
            r.selective = match v {
                Value::Boolean(true) => Some(DEFAULT_UNIQUE_FRACTION),
                Value::Boolean(false) => None,
                other => Some(as_f64(key, other)?),
            }
        }
        "overlapped_only" => r.overlapped_only = as_bool(key, v)?,
        "cap_to_measurement" => r.cap_to_measurement = as_bool(key, v)?,
        _ => return Err(Error::InvalidConfig(format!("unknown key `{key}`"))),
    }
    Ok(())
}
