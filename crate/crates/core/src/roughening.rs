//! Roughening: restoring particle diversity after resampling.
//!
//! Two strategies are provided. *Separate* roughening adds an independent
//! zero-mean Gaussian jitter to resampled particles, which convolves the
//! intensity with the jitter kernel and leaves the total mass untouched.
//! *Direct* roughening folds the same jitter into the process noise of the
//! next propagation, so the noise std on each axis becomes
//! `sqrt(sigma_v^2 + delta_r^2)`.
//!
//! Both strategies can be restricted to some recursions (`selective`), to
//! particles sharing an ancestor (`overlapped_only`), to some state
//! dimensions (zero entries of `jitter_std`), and capped so the jitter
//! projected onto position never exceeds the smallest sensor noise std
//! (`cap_to_measurement`).

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::models::{MeasurementModel, MotionModel};
use crate::particle::ParticleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    None,
    Separate,
    Direct,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "basic" => Ok(Mode::None),
            "separate" => Ok(Mode::Separate),
            "direct" => Ok(Mode::Direct),
            other => Err(Error::InvalidConfig(format!("unknown roughening mode `{other}`"))),
        }
    }
}

/// Exponent convention of the Gordon jitter formula `K E N^(±1/d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GordonExponent {
    /// `N^(-1/d)`: jitter shrinks as the particle count grows.
    #[default]
    Shrinking,
    /// `N^(+1/d)`, kept for fidelity experiments.
    Growing,
}

/// Per-step jitter from the spread of the current particle cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GordonConfig {
    pub k: f64,
    /// Dimensions that receive jitter.
    pub dims: [bool; 4],
    pub exponent: GordonExponent,
}

impl GordonConfig {
    pub fn velocity_only(k: f64) -> Self {
        Self { k, dims: [false, true, false, true], exponent: GordonExponent::Shrinking }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RougheningConfig {
    pub mode: Mode,
    /// Jitter std per state dimension `[px, vx, py, vy]`.
    pub jitter_std: [f64; 4],
    pub gordon: Option<GordonConfig>,
    /// Roughen only when the unique-ancestor fraction falls below this value.
    pub selective: Option<f64>,
    /// Roughen only particles whose ancestor was copied more than once.
    pub overlapped_only: bool,
    pub cap_to_measurement: bool,
}

/// Default selective threshold on the unique-ancestor fraction.
pub const DEFAULT_UNIQUE_FRACTION: f64 = 0.5;

impl Default for RougheningConfig {
    fn default() -> Self {
        Self::none()
    }
}

impl RougheningConfig {
    pub fn none() -> Self {
        Self {
            mode: Mode::None,
            jitter_std: [0.0; 4],
            gordon: None,
            selective: None,
            overlapped_only: false,
            cap_to_measurement: true,
        }
    }

    /// Velocity-only jitter with std `delta` in the given mode.
    pub fn velocity(mode: Mode, delta: f64) -> Self {
        Self { mode, jitter_std: [0.0, delta, 0.0, delta], ..Self::none() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.jitter_std.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::InvalidConfig("roughening jitter stds must be finite and >= 0".into()));
        }
        if let Some(g) = &self.gordon {
            if !(g.k >= 0.0 && g.k.is_finite()) {
                return Err(Error::InvalidConfig("gordon K must be >= 0".into()));
            }
            if self.jitter_std.iter().any(|s| *s > 0.0) {
                return Err(Error::InvalidConfig("fixed jitter_std and gordon are mutually exclusive".into()));
            }
        }
        if let Some(u) = self.selective {
            if !(u > 0.0 && u <= 1.0) {
                return Err(Error::InvalidConfig("selective threshold must lie in (0, 1]".into()));
            }
        }
        Ok(())
    }
}

/// `K * E * N^(-1/d)` per dimension.
pub fn gordon_std(k: f64, spread: &[f64], n: usize, d: usize) -> Vec<f64> {
    gordon_std_with(k, spread, n, d, GordonExponent::Shrinking)
}

pub fn gordon_std_with(k: f64, spread: &[f64], n: usize, d: usize, exponent: GordonExponent) -> Vec<f64> {
    let n = n.max(1) as f64;
    let d = d.max(1) as f64;
    let factor = match exponent {
        GordonExponent::Shrinking => n.powf(-1.0 / d),
        GordonExponent::Growing => n.powf(1.0 / d),
    };
    spread.iter().map(|e| k * e * factor).collect()
}

/// `max - min` of each state component over the set.
pub fn state_spread(set: &ParticleSet) -> [f64; 4] {
    let mut lo = [f64::INFINITY; 4];
    let mut hi = [f64::NEG_INFINITY; 4];
    for p in &set.particles {
        for i in 0..4 {
            lo[i] = lo[i].min(p.state.0[i]);
            hi[i] = hi[i].max(p.state.0[i]);
        }
    }
    std::array::from_fn(|i| if set.is_empty() { 0.0 } else { hi[i] - lo[i] })
}

/// Fraction of distinct ancestor indices among the particles.
pub fn unique_ancestor_fraction(ancestors: &[usize]) -> f64 {
    if ancestors.is_empty() {
        return 1.0;
    }
    let mut sorted = ancestors.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.len() as f64 / ancestors.len() as f64
}

/// Marks particles whose ancestor index is shared with another particle.
pub fn overlapped_mask(ancestors: &[usize]) -> Vec<bool> {
    let max = ancestors.iter().copied().max().map_or(0, |m| m + 1);
    let mut counts = vec![0u32; max];
    for &a in ancestors {
        counts[a] += 1;
    }
    ancestors.iter().map(|&a| counts[a] > 1).collect()
}

/// Jitter std actually applied this step, after the Gordon rule and the
/// sensor-noise cap.
pub fn effective_jitter(
    config: &RougheningConfig,
    set: &ParticleSet,
    motion: &MotionModel,
    meas: &MeasurementModel,
) -> [f64; 4] {
    let mut delta = match &config.gordon {
        Some(g) => {
            let spread = state_spread(set);
            let s = gordon_std_with(g.k, &spread, set.len(), 4, g.exponent);
            std::array::from_fn(|i| if g.dims[i] { s[i] } else { 0.0 })
        }
        None => config.jitter_std,
    };
    if config.cap_to_measurement {
        let bound = meas.min_sigma();
        for (i, d) in delta.iter_mut().enumerate() {
            // Velocity jitter reaches position through one step of length dt.
            let limit = if i % 2 == 1 { bound / motion.dt } else { bound };
            *d = d.min(limit);
        }
    }
    delta
}

/// Which particles of `set` get roughened this step; `None` skips the step.
pub fn roughening_targets(config: &RougheningConfig, set: &ParticleSet) -> Option<Vec<bool>> {
    let ancestors = set.ancestors.as_deref();
    if let Some(threshold) = config.selective {
        match ancestors {
            Some(a) if unique_ancestor_fraction(a) < threshold => {}
            _ => return None,
        }
    }
    if config.overlapped_only {
        return ancestors.map(overlapped_mask);
    }
    Some(vec![true; set.len()])
}

/// Adds Gaussian jitter to the resampled particles of `set`.
///
/// Draws nothing when the effective jitter is zero, so a zero-strength
/// configuration leaves both the particles and the jitter stream untouched.
pub fn separate_roughen<R: Rng + ?Sized>(
    set: &ParticleSet,
    config: &RougheningConfig,
    motion: &MotionModel,
    meas: &MeasurementModel,
    rng: &mut R,
) -> ParticleSet {
    let mut out = set.clone();
    if config.mode != Mode::Separate {
        log::warn!("separate_roughen called with mode {:?}; leaving particles unchanged", config.mode);
        return out;
    }
    let delta = effective_jitter(config, set, motion, meas);
    if delta.iter().all(|d| *d == 0.0) {
        return out;
    }
    let Some(mask) = roughening_targets(config, set) else {
        return out;
    };
    for (p, targeted) in out.particles.iter_mut().zip(mask) {
        if !targeted {
            continue;
        }
        for (x, d) in p.state.0.iter_mut().zip(delta) {
            if d > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                *x += d * z;
            }
        }
    }
    out
}

/// How the process noise std of one axis is inflated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseInflation {
    /// Multiply the model std.
    Multiplier(f64),
    /// Replace the model std; used when the model std is zero.
    Absolute(f64),
}

impl NoiseInflation {
    pub fn apply(&self, sigma: f64) -> f64 {
        match *self {
            NoiseInflation::Multiplier(m) => sigma * m,
            NoiseInflation::Absolute(s) => s,
        }
    }
}

fn inflation(sigma: f64, delta: f64) -> NoiseInflation {
    if delta == 0.0 {
        NoiseInflation::Multiplier(1.0)
    } else if sigma == 0.0 {
        NoiseInflation::Absolute(delta)
    } else {
        NoiseInflation::Multiplier((1.0 + (delta / sigma).powi(2)).sqrt())
    }
}

/// Per-axis noise inflation for direct roughening with a fixed
/// (non-Gordon) jitter. Only the velocity entries of `jitter_std` are used.
pub fn direct_roughen_scale(
    config: &RougheningConfig,
    motion: &MotionModel,
    meas: &MeasurementModel,
) -> [NoiseInflation; 2] {
    let delta = effective_jitter(config, &ParticleSet::default(), motion, meas);
    [inflation(motion.sigma_v1, delta[1]), inflation(motion.sigma_v2, delta[3])]
}

/// Propagation noise plan for one predict step.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DirectPlan {
    /// Stds for targeted particles.
    pub inflated: [f64; 2],
    /// Targeted particles; `None` means all.
    pub mask: Option<Vec<bool>>,
}

/// Plans direct roughening for the propagation of `prev`; `None` when the
/// step propagates with the plain model noise.
pub(crate) fn direct_plan(
    config: &RougheningConfig,
    prev: &ParticleSet,
    motion: &MotionModel,
    meas: &MeasurementModel,
) -> Option<DirectPlan> {
    if config.mode != Mode::Direct {
        return None;
    }
    let delta = effective_jitter(config, prev, motion, meas);
    if delta[1] == 0.0 && delta[3] == 0.0 {
        return None;
    }
    let mask = roughening_targets(config, prev)?;
    let sigma = motion.sigmas();
    let inflated = [inflation(sigma[0], delta[1]).apply(sigma[0]), inflation(sigma[1], delta[3]).apply(sigma[1])];
    let mask = if mask.iter().all(|m| *m) { None } else { Some(mask) };
    Some(DirectPlan { inflated, mask })
}
