//! Ground truth and measurement simulation.
//!
//! Targets follow scripted birth and death steps; their states evolve under
//! the motion model with process noise. Each scan contains the detected
//! targets' noisy positions plus Poisson clutter, in random order.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::models::{clutter_sample, measure, propagate, Measurement, Models, StateVector};
use crate::rng::{stream, Stream, StreamRng};

/// Lifetime of one simulated target. Steps are 1-based and inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSpec {
    pub birth_step: usize,
    pub death_step: usize,
    /// Fixed initial state; drawn from the birth density when `None`.
    pub initial: Option<StateVector>,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub steps: usize,
    pub targets: Vec<TargetSpec>,
    pub models: Models,
}

impl ScenarioConfig {
    /// Forty scans, four targets born at steps 1, 1, 8, 15 and dying at
    /// 40, 28, 40, 40, initial states drawn per trial from the birth density.
    pub fn paper() -> Self {
        let targets = [(1, 40), (1, 28), (8, 40), (15, 40)]
            .into_iter()
            .map(|(b, d)| TargetSpec { birth_step: b, death_step: d, initial: None })
            .collect();
        Self { steps: 40, targets, models: Models::paper() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidConfig("scenario.steps must be >= 1".into()));
        }
        for (i, t) in self.targets.iter().enumerate() {
            if !(1 <= t.birth_step && t.birth_step <= t.death_step && t.death_step <= self.steps) {
                return Err(Error::InvalidConfig(format!(
                    "target {i}: need 1 <= birth ({}) <= death ({}) <= steps ({})",
                    t.birth_step, t.death_step, self.steps
                )));
            }
        }
        self.models.validate()
    }
}

/// Alive targets per step; `steps[k - 1]` holds step `k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub steps: Vec<Vec<(usize, StateVector)>>,
}

impl GroundTruth {
    pub fn at(&self, step: usize) -> &[(usize, StateVector)] {
        &self.steps[step - 1]
    }

    pub fn states_at(&self, step: usize) -> Vec<StateVector> {
        self.at(step).iter().map(|(_, s)| *s).collect()
    }

    /// Columns `step id px vx py vy`.
    pub fn to_columns(&self) -> String {
        let mut out = String::from("step\tid\tpx\tvx\tpy\tvy\n");
        for (k, alive) in self.steps.iter().enumerate() {
            for (id, s) in alive {
                let [px, vx, py, vy] = s.0;
                let _ = writeln!(out, "{}\t{id}\t{px}\t{vx}\t{py}\t{vy}", k + 1);
            }
        }
        out
    }
}

/// Unlabelled measurements per step; `scans[k - 1]` holds step `k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanData {
    pub scans: Vec<Vec<Measurement>>,
}

impl ScanData {
    /// Columns `step zx zy`.
    pub fn to_columns(&self) -> String {
        let mut out = String::from("step\tzx\tzy\n");
        for (k, scan) in self.scans.iter().enumerate() {
            for z in scan {
                let _ = writeln!(out, "{}\t{}\t{}", k + 1, z.zx, z.zy);
            }
        }
        out
    }

    /// Hash of the exact bit patterns of every measurement.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for scan in &self.scans {
            scan.len().hash(&mut h);
            for z in scan {
                z.zx.to_bits().hash(&mut h);
                z.zy.to_bits().hash(&mut h);
            }
        }
        h.finish()
    }
}

/// Draws target trajectories.
pub fn generate_truth<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<GroundTruth> {
    config.validate()?;
    let models = &config.models;
    let mut steps = vec![Vec::new(); config.steps];
    for (id, spec) in config.targets.iter().enumerate() {
        let mut state = match spec.initial {
            Some(s) => s,
            None => models.birth.sample(rng),
        };
        steps[spec.birth_step - 1].push((id, state));
        for k in spec.birth_step + 1..=spec.death_step {
            state = propagate(&state, &models.motion, [1.0, 1.0], rng)?;
            steps[k - 1].push((id, state));
        }
    }
    Ok(GroundTruth { steps })
}

/// Random streams used for scan generation.
#[derive(Debug, Clone)]
pub struct ScanStreams {
    pub detection: StreamRng,
    pub noise: StreamRng,
    pub clutter: StreamRng,
    pub order: StreamRng,
}

impl ScanStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            detection: stream(seed, Stream::Detection),
            noise: stream(seed, Stream::MeasurementNoise),
            clutter: stream(seed, Stream::Clutter),
            order: stream(seed, Stream::ScanOrder),
        }
    }
}

/// One scan: detections of the alive targets plus clutter, shuffled.
pub fn generate_scan(alive: &[(usize, StateVector)], models: &Models, streams: &mut ScanStreams) -> Vec<Measurement> {
    let mut scan: Vec<Measurement> = Vec::with_capacity(alive.len() + models.clutter.rate.ceil() as usize);
    for (_, x) in alive {
        // One detection coin per target, whatever the outcome.
        if streams.detection.random::<f64>() < models.detection.p_detect {
            scan.push(measure(x, &models.measurement, &mut streams.noise));
        }
    }
    scan.extend(clutter_sample(&models.clutter, &mut streams.clutter));
    scan.shuffle(&mut streams.order);
    scan
}

/// A realized scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub truth: GroundTruth,
    pub scans: ScanData,
}

/// Simulates truth and scans from a single seed.
pub fn simulate(config: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    let truth = generate_truth(config, &mut stream(seed, Stream::Truth))?;
    let mut streams = ScanStreams::new(seed);
    let scans = truth.steps.iter().map(|alive| generate_scan(alive, &config.models, &mut streams)).collect();
    Ok(Scenario { truth, scans: ScanData { scans } })
}
