//! Sequential Monte Carlo PHD recursion.
//!
//! [`predict`] propagates surviving particles through the proposal and
//! appends birth particles; [`update`] reweights every particle by the
//! missed-detection term plus one normalized likelihood term per
//! measurement. [`PhdFilter`] chains these with cardinality rounding, state
//! extraction, resampling and roughening into one scan-by-scan tracker.

use rand::Rng;

use crate::cluster::weighted_kmeans;
use crate::error::{Error, Result};
use crate::models::{
    birth_sample, clutter_intensity, likelihood, propagate_with_std, transition_density, Measurement, Models,
    StateVector,
};
use crate::particle::{sequential_sum, settle_mass, Particle, ParticleSet, WEIGHT_FLOOR};
use crate::resampling::{resample, round_half_up, ResampleConfig, Scheme};
use crate::rng::FilterStreams;
use crate::roughening::{direct_plan, separate_roughen, Mode, RougheningConfig};

/// Importance density for surviving particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Proposal {
    /// Sample from the transition density itself.
    #[default]
    Bootstrap,
}

/// Importance density for birth particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BirthProposal {
    /// Sample from the normalized birth intensity.
    #[default]
    BirthDensity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    /// Particles per expected target, `N_p`.
    pub particles_per_target: usize,
    /// Birth particles per step; `None` uses `round(birth mass * N_p)`.
    pub birth_particles: Option<usize>,
    /// Lower bound on the resampled particle count.
    pub min_particles: usize,
    pub resample_scheme: Scheme,
    pub proposal: Proposal,
    pub birth_proposal: BirthProposal,
}

impl FilterConfig {
    pub fn new(particles_per_target: usize) -> Self {
        Self {
            particles_per_target,
            birth_particles: None,
            min_particles: particles_per_target.div_ceil(2),
            resample_scheme: Scheme::Systematic,
            proposal: Proposal::Bootstrap,
            birth_proposal: BirthProposal::BirthDensity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.particles_per_target == 0 {
            return Err(Error::InvalidConfig("filter.particles_per_target must be >= 1".into()));
        }
        if self.min_particles == 0 {
            return Err(Error::InvalidConfig("filter.min_particles must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of birth particles for a birth intensity of total `mass`.
    pub fn birth_count(&self, mass: f64) -> usize {
        if !(mass > 0.0) {
            return 0;
        }
        self.birth_particles
            .unwrap_or_else(|| round_half_up(mass * self.particles_per_target as f64))
            .max(1)
    }

    pub fn resample_config(&self) -> ResampleConfig {
        ResampleConfig {
            scheme: self.resample_scheme,
            particles_per_target: self.particles_per_target,
            min_particles: self.min_particles,
        }
    }
}

/// Extracted multi-target estimate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Estimate {
    pub cardinality: usize,
    pub states: Vec<StateVector>,
}

fn floor_weight(w: f64) -> f64 {
    if w < WEIGHT_FLOOR {
        0.0
    } else {
        w
    }
}

/// PHD prediction.
///
/// Survivors are propagated with the model noise (inflated under direct
/// roughening) and reweighted by `p_S` plus any spawn contribution; birth
/// particles are appended with weight `mass / J`. Without a spawn kernel the
/// survivor block's mass is exactly `p_S` times the input mass and the birth
/// block's mass is exactly the birth mass.
pub fn predict(
    prev: &ParticleSet,
    models: &Models,
    config: &FilterConfig,
    roughening: &RougheningConfig,
    streams: &mut FilterStreams,
) -> Result<ParticleSet> {
    for p in &prev.particles {
        if !p.weight.is_finite() {
            return Err(Error::NonFinite("particle weight"));
        }
    }
    let motion = &models.motion;
    let p_s = models.detection.p_survive;
    let plan = direct_plan(roughening, prev, motion, &models.measurement);
    let base_std = motion.sigmas();

    let mut particles = Vec::with_capacity(prev.len() + config.birth_count(models.birth.mass));
    for (i, p) in prev.particles.iter().enumerate() {
        let std = match &plan {
            Some(plan) if plan.mask.as_ref().is_none_or(|m| m[i]) => plan.inflated,
            _ => base_std,
        };
        let state = propagate_with_std(&p.state, motion, std, &mut streams.propagation)?;
        let factor = match &models.birth.spawn {
            None => p_s,
            Some(kernel) => {
                let f = transition_density(&state, &p.state, motion).unwrap_or(0.0);
                if f > 0.0 {
                    p_s + kernel.intensity(&state, &p.state) / f
                } else {
                    p_s
                }
            }
        };
        particles.push(Particle::new(state, floor_weight(p.weight * factor)));
    }
    let survivor_count = particles.len();
    if models.birth.spawn.is_none() && survivor_count > 0 {
        let target = p_s * prev.total_mass();
        let mut w: Vec<f64> = particles.iter().map(|p| p.weight).collect();
        settle_mass(&mut w, target);
        for (p, wi) in particles.iter_mut().zip(w) {
            p.weight = wi;
        }
    }

    let births = config.birth_count(models.birth.mass);
    if births > 0 {
        let mut w = vec![models.birth.mass / births as f64; births];
        settle_mass(&mut w, models.birth.mass);
        for wi in w {
            let state = birth_sample(&models.birth, &mut streams.birth);
            particles.push(Particle::new(state, wi));
        }
    }

    Ok(ParticleSet { particles, step: prev.step + 1, survivor_count, ancestors: None })
}

/// Per-measurement normalizer `C(z) = sum_j p_D g(z | x_j) w_j`.
pub fn measurement_normalizers(pred: &ParticleSet, measurements: &[Measurement], models: &Models) -> Vec<f64> {
    let p_d = models.detection.p_detect;
    measurements
        .iter()
        .map(|z| sequential_sum(pred.particles.iter().map(|p| p_d * likelihood(z, &p.state, &models.measurement) * p.weight)))
        .collect()
}

/// PHD update. States are untouched; each weight becomes
/// `[1 - p_D + sum_z p_D g(z|x) / (kappa(z) + C(z))] w`.
pub fn update(pred: &ParticleSet, measurements: &[Measurement], models: &Models) -> Result<ParticleSet> {
    for p in &pred.particles {
        if !p.weight.is_finite() {
            return Err(Error::NonFinite("particle weight"));
        }
    }
    if measurements.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite("measurement"));
    }
    let p_d = models.detection.p_detect;
    let n = pred.len();
    let m = measurements.len();

    // Row-major [particle][measurement] detection likelihoods.
    let mut lik = vec![0.0; n * m];
    for (i, p) in pred.particles.iter().enumerate() {
        for (j, z) in measurements.iter().enumerate() {
            lik[i * m + j] = p_d * likelihood(z, &p.state, &models.measurement);
        }
    }
    let mut denom = vec![0.0; m];
    for j in 0..m {
        let c = sequential_sum((0..n).map(|i| lik[i * m + j] * pred.particles[i].weight));
        denom[j] = clutter_intensity(&measurements[j], &models.clutter) + c;
    }

    let mut out = pred.clone();
    for (i, p) in out.particles.iter_mut().enumerate() {
        let mut factor = 1.0 - p_d;
        for j in 0..m {
            if denom[j] > 0.0 {
                factor += lik[i * m + j] / denom[j];
            }
        }
        p.weight = floor_weight(factor * p.weight);
    }
    Ok(out)
}

/// Rounded total mass, ties upward.
pub fn estimate_cardinality(set: &ParticleSet) -> usize {
    round_half_up(set.total_mass())
}

/// Clusters the particle cloud into `n` weighted centroids.
pub fn extract_states<R: Rng + ?Sized>(set: &ParticleSet, n: usize, rng: &mut R) -> Estimate {
    if n == 0 || set.is_empty() {
        return Estimate::default();
    }
    let points: Vec<[f64; 4]> = set.particles.iter().map(|p| p.state.0).collect();
    let weights: Vec<f64> = set.particles.iter().map(|p| p.weight).collect();
    let states: Vec<StateVector> = weighted_kmeans(&points, &weights, n, rng).into_iter().map(StateVector).collect();
    Estimate { cardinality: states.len(), states }
}

/// Output of one filter scan.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub step: usize,
    pub estimate: Estimate,
    /// Posterior mass before resampling.
    pub mass: f64,
    /// Particles carried into the next scan.
    pub particles: usize,
    /// The posterior mass was zero and resampling was skipped.
    pub track_loss: bool,
}

/// A particle PHD filter with optional roughening.
#[derive(Debug, Clone)]
pub struct PhdFilter {
    pub models: Models,
    pub config: FilterConfig,
    pub roughening: RougheningConfig,
    streams: FilterStreams,
    posterior: ParticleSet,
}

impl PhdFilter {
    pub fn new(models: Models, config: FilterConfig, roughening: RougheningConfig, seed: u64) -> Result<Self> {
        models.validate()?;
        config.validate()?;
        roughening.validate()?;
        Ok(Self { models, config, roughening, streams: FilterStreams::new(seed), posterior: ParticleSet::empty(0) })
    }

    /// Resampled (and roughened) particles carried into the next scan.
    pub fn particles(&self) -> &ParticleSet {
        &self.posterior
    }

    pub fn step(&mut self, measurements: &[Measurement]) -> Result<StepOutput> {
        let predicted = predict(&self.posterior, &self.models, &self.config, &self.roughening, &mut self.streams)?;
        let updated = update(&predicted, measurements, &self.models)?;
        let mass = updated.total_mass();
        let n = estimate_cardinality(&updated);
        let estimate = extract_states(&updated, n, &mut self.streams.extraction);

        let track_loss = !(mass > 0.0);
        if track_loss {
            log::warn!("step {}: posterior mass is zero, resampling skipped", updated.step);
            self.posterior = ParticleSet::empty(updated.step);
        } else {
            let mut next = resample(&updated, &self.config.resample_config(), &mut self.streams.resample)?;
            if self.roughening.mode == Mode::Separate {
                next = separate_roughen(
                    &next,
                    &self.roughening,
                    &self.models.motion,
                    &self.models.measurement,
                    &mut self.streams.jitter,
                );
            }
            self.posterior = next;
        }
        Ok(StepOutput { step: updated.step, estimate, mass, particles: self.posterior.len(), track_loss })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Region;

    fn single(weight: f64) -> ParticleSet {
        ParticleSet {
            particles: vec![Particle::new(StateVector::new(0.0, 1.0, 0.0, 1.0), weight)],
            step: 0,
            survivor_count: 1,
            ancestors: None,
        }
    }

    fn no_births() -> Models {
        let mut m = Models::paper();
        m.birth.mass = 0.0;
        m
    }

    #[test]
    fn predict_survivor_weight_is_ps_times_w() {
        let out =
            predict(&single(0.04), &no_births(), &FilterConfig::new(200), &RougheningConfig::none(), &mut FilterStreams::new(1))
                .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.particles[0].weight, 0.95 * 0.04);
        assert!((out.particles[0].weight - 0.038).abs() < 1e-15);
        assert_eq!(out.step, 1);
    }

    #[test]
    fn predict_births() {
        let cfg = FilterConfig { birth_particles: Some(40), ..FilterConfig::new(200) };
        let out = predict(&ParticleSet::empty(0), &Models::paper(), &cfg, &RougheningConfig::none(), &mut FilterStreams::new(1))
            .unwrap();
        assert_eq!(out.len(), 40);
        assert_eq!(out.survivor_count, 0);
        assert_eq!(out.birth_mass(), 0.2);
        assert!(out.particles.iter().all(|p| (p.weight - 0.005).abs() < 1e-15));
        assert_eq!(FilterConfig::new(200).birth_count(0.2), 40);
        assert_eq!(FilterConfig::new(1000).birth_count(0.2), 200);
    }

    #[test]
    fn predict_with_zero_survival_and_no_births_is_massless() {
        let mut m = no_births();
        m.detection.p_survive = 0.0;
        let out = predict(&single(0.5), &m, &FilterConfig::new(10), &RougheningConfig::none(), &mut FilterStreams::new(1)).unwrap();
        assert_eq!(out.total_mass(), 0.0);
        let empty =
            predict(&ParticleSet::empty(0), &m, &FilterConfig::new(10), &RougheningConfig::none(), &mut FilterStreams::new(1)).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn update_examples() {
        let set = single(1.0);
        let mut m = Models::paper();

        m.detection.p_detect = 0.0;
        let z = [Measurement::new(0.0, 0.0)];
        assert_eq!(update(&set, &z, &m).unwrap().particles[0].weight, 1.0);

        m.detection.p_detect = 0.95;
        let missed = update(&set, &[], &m).unwrap();
        assert!((missed.particles[0].weight - 0.05).abs() < 1e-15);

        // One particle, one measurement with g = 0.1 and kappa = 2.5e-4.
        let sigma = (1.0 / (0.1 * 2.0 * std::f64::consts::PI)).sqrt();
        m.measurement.sigma_w1 = sigma;
        m.measurement.sigma_w2 = sigma;
        let z = [Measurement::new(set.particles[0].state.px(), set.particles[0].state.py())];
        let out = update(&set, &z, &m).unwrap();
        let expected = 0.05 + 0.095 / (0.095 + 2.5e-4);
        assert!((out.particles[0].weight - expected).abs() < 1e-12);
        assert!((out.particles[0].weight - 1.047_37).abs() < 1e-5);
        assert_eq!(out.particles[0].state, set.particles[0].state);
    }

    #[test]
    fn update_with_zero_denominator_ignores_measurement() {
        let mut m = Models::paper();
        m.clutter.rate = 0.0;
        m.clutter.region = Region::new(-1.0, 1.0, -1.0, 1.0);
        let far = [Measurement::new(1e6, 1e6)];
        let out = update(&single(1.0), &far, &m).unwrap();
        assert!((out.particles[0].weight - 0.05).abs() < 1e-15);
    }

    #[test]
    fn huge_clutter_discounts_measurements() {
        let mut m = Models::paper();
        m.clutter.rate = 1e12 * m.clutter.region.area();
        let set = single(2.0);
        let z = [Measurement::new(0.0, 0.0)];
        let out = update(&set, &z, &m).unwrap();
        assert!((out.total_mass() - 0.05 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn cardinality_rounds_half_up() {
        assert_eq!(estimate_cardinality(&single(3.6)), 4);
        assert_eq!(estimate_cardinality(&single(0.4)), 0);
        assert_eq!(estimate_cardinality(&single(2.5)), 3);
    }

    #[test]
    fn extract_zero_targets_is_empty() {
        let mut rng = FilterStreams::new(1).extraction;
        assert_eq!(extract_states(&single(1.0), 0, &mut rng), Estimate::default());
        let est = extract_states(&single(1.0), 1, &mut rng);
        assert_eq!(est.states, vec![single(1.0).particles[0].state]);
    }

    #[test]
    fn filter_tracks_single_target() {
        let m = Models::paper();
        let mut filter = PhdFilter::new(m.clone(), FilterConfig::new(200), RougheningConfig::none(), 7).unwrap();
        let mut truth = m.birth.mean;
        let mut last = None;
        for _ in 0..15 {
            truth = m.motion.transition(&truth);
            let out = filter.step(&[Measurement::new(truth.px(), truth.py())]).unwrap();
            last = Some(out);
        }
        let out = last.unwrap();
        assert_eq!(out.estimate.cardinality, 1);
        let s = out.estimate.states[0];
        assert!((s.px() - truth.px()).hypot(s.py() - truth.py()) < 5.0);
    }
}
