//! Mass-preserving resampling with a particle budget of `N_p` per expected
//! target and a hard floor.

use rand::Rng;

use crate::error::{Error, Result};
use crate::particle::{settle_mass, Particle, ParticleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Systematic,
    Multinomial,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "systematic" => Ok(Scheme::Systematic),
            "multinomial" => Ok(Scheme::Multinomial),
            other => Err(Error::InvalidConfig(format!("unknown resampling scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResampleConfig {
    pub scheme: Scheme,
    pub particles_per_target: usize,
    pub min_particles: usize,
}

impl ResampleConfig {
    /// Systematic scheme with the floor at `ceil(N_p / 2)`.
    pub fn new(particles_per_target: usize) -> Self {
        Self {
            scheme: Scheme::Systematic,
            particles_per_target,
            min_particles: particles_per_target.div_ceil(2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.particles_per_target == 0 || self.min_particles == 0 {
            return Err(Error::InvalidParameter(
                "particles_per_target and min_particles must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Rounds a non-negative value to the nearest integer, ties upward.
pub fn round_half_up(x: f64) -> usize {
    if x.is_nan() || x <= 0.0 {
        0
    } else {
        (x + 0.5).floor() as usize
    }
}

/// Particle budget for an intensity of total mass `mass`:
/// `max(round(mass) * N_p, min_particles)`.
pub fn target_count(mass: f64, config: &ResampleConfig) -> usize {
    (round_half_up(mass) * config.particles_per_target).max(config.min_particles)
}

/// Resamples `set` to [`target_count`] equally weighted particles.
///
/// The in-order sum of the output weights equals the input mass exactly.
/// `ancestors` on the result records the source index of every copy.
pub fn resample<R: Rng + ?Sized>(set: &ParticleSet, config: &ResampleConfig, rng: &mut R) -> Result<ParticleSet> {
    let mass = set.total_mass();
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::ZeroMass);
    }
    let count = target_count(mass, config);
    let ancestors = match config.scheme {
        Scheme::Systematic => systematic_indices(set, mass, count, rng),
        Scheme::Multinomial => multinomial_indices(set, mass, count, rng),
    };

    let mut weights = vec![mass / count as f64; count];
    settle_mass(&mut weights, mass);
    let particles = ancestors
        .iter()
        .zip(weights)
        .map(|(&a, w)| Particle::new(set.particles[a].state, w))
        .collect();

    Ok(ParticleSet { particles, step: set.step, survivor_count: count, ancestors: Some(ancestors) })
}

/// Cumulative weights scaled so the last entry is exactly `count`.
fn scaled_cumulative(set: &ParticleSet, mass: f64, count: usize) -> Vec<f64> {
    let scale = count as f64 / mass;
    let mut acc = 0.0;
    let mut cum: Vec<f64> = set
        .particles
        .iter()
        .map(|p| {
            acc += p.weight * scale;
            acc
        })
        .collect();
    if let Some(last) = cum.last_mut() {
        *last = count as f64;
    }
    cum
}

fn systematic_indices<R: Rng + ?Sized>(set: &ParticleSet, mass: f64, count: usize, rng: &mut R) -> Vec<usize> {
    let cum = scaled_cumulative(set, mass, count);
    let offset: f64 = rng.random();
    let last = cum.len() - 1;
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    for k in 0..count {
        let u = offset + k as f64;
        while i < last && cum[i] <= u {
            i += 1;
        }
        out.push(i);
    }
    out
}

fn multinomial_indices<R: Rng + ?Sized>(set: &ParticleSet, mass: f64, count: usize, rng: &mut R) -> Vec<usize> {
    let cum = scaled_cumulative(set, mass, count);
    let last = cum.len() - 1;
    (0..count)
        .map(|_| {
            let u = rng.random::<f64>() * count as f64;
            cum.partition_point(|&c| c <= u).min(last)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::StateVector;
    use crate::rng::{stream, Stream};
    use proptest::prelude::*;

    fn set_from_weights(ws: &[f64]) -> ParticleSet {
        ParticleSet {
            particles: ws
                .iter()
                .enumerate()
                .map(|(i, &w)| Particle::new(StateVector::new(i as f64, 0.0, 0.0, 0.0), w))
                .collect(),
            step: 1,
            survivor_count: ws.len(),
            ancestors: None,
        }
    }

    #[test]
    fn target_count_examples() {
        let cfg = ResampleConfig::new(200);
        assert_eq!(cfg.min_particles, 100);
        assert_eq!(target_count(3.2, &cfg), 600);
        assert_eq!(target_count(0.3, &cfg), 100);
        assert_eq!(target_count(0.0, &cfg), 100);
        assert_eq!(target_count(2.5, &cfg), 600);
    }

    #[test]
    fn systematic_uniform_weights_copy_each_once() {
        let set = set_from_weights(&[0.5; 4]);
        let cfg = ResampleConfig { scheme: Scheme::Systematic, particles_per_target: 2, min_particles: 1 };
        let mut rng = stream(2, Stream::Resample);
        for _ in 0..100 {
            let out = resample(&set, &cfg, &mut rng).unwrap();
            assert_eq!(out.ancestors.as_deref(), Some(&[0, 1, 2, 3][..]));
            assert!(out.particles.iter().all(|p| p.weight == 0.5));
        }
    }

    #[test]
    fn zero_mass_is_rejected() {
        let set = set_from_weights(&[0.0, 0.0]);
        let mut rng = stream(2, Stream::Resample);
        assert_eq!(resample(&set, &ResampleConfig::new(10), &mut rng), Err(Error::ZeroMass));
        assert_eq!(resample(&ParticleSet::empty(0), &ResampleConfig::new(10), &mut rng), Err(Error::ZeroMass));
    }

    #[test]
    fn multinomial_mean_copies() {
        // Binomial oracle: E[copies of particle 0] = 10 * 0.9.
        let mass = 1.7;
        let set = set_from_weights(&[0.9 * mass, 0.1 * mass]);
        let cfg = ResampleConfig { scheme: Scheme::Multinomial, particles_per_target: 5, min_particles: 10 };
        let mut rng = stream(9, Stream::Resample);
        let reps = 100_000;
        let mut total = 0usize;
        for _ in 0..reps {
            let out = resample(&set, &cfg, &mut rng).unwrap();
            assert_eq!(out.len(), 10);
            total += out.ancestors.unwrap().iter().filter(|&&a| a == 0).count();
        }
        let mean = total as f64 / reps as f64;
        assert!((mean - 9.0).abs() / 9.0 < 0.01, "mean copies {mean}");
    }

    proptest! {
        #[test]
        fn mass_is_preserved_exactly(
            ws in prop::collection::vec(0.0f64..3.0, 1..200),
            seed in any::<u64>(),
            multinomial in any::<bool>(),
        ) {
            let set = set_from_weights(&ws);
            prop_assume!(set.total_mass() > 0.0);
            let scheme = if multinomial { Scheme::Multinomial } else { Scheme::Systematic };
            let cfg = ResampleConfig { scheme, particles_per_target: 50, min_particles: 25 };
            let out = resample(&set, &cfg, &mut stream(seed, Stream::Resample)).unwrap();
            prop_assert_eq!(out.total_mass(), set.total_mass());
            prop_assert_eq!(out.len(), target_count(set.total_mass(), &cfg));
            for (p, &a) in out.particles.iter().zip(out.ancestors.as_ref().unwrap()) {
                prop_assert!(set.particles[a].weight > 0.0);
                prop_assert_eq!(p.state, set.particles[a].state);
            }
        }

        #[test]
        fn systematic_copies_are_floor_or_ceil(
            ws in prop::collection::vec(0.0f64..3.0, 1..200),
            seed in any::<u64>(),
        ) {
            let set = set_from_weights(&ws);
            let mass = set.total_mass();
            prop_assume!(mass > 0.0);
            let cfg = ResampleConfig::new(40);
            let out = resample(&set, &cfg, &mut stream(seed, Stream::Resample)).unwrap();
            let anc = out.ancestors.unwrap();
            prop_assert!(anc.windows(2).all(|w| w[0] <= w[1]));
            let n = anc.len() as f64;
            let mut counts = vec![0usize; ws.len()];
            for a in anc {
                counts[a] += 1;
            }
            for (c, w) in counts.iter().zip(&ws) {
                let e = n * w / mass;
                prop_assert!(*c as f64 >= (e - 1e-9).floor() && *c as f64 <= (e + 1e-9).ceil(),
                    "count {} expected {}", c, e);
            }
        }
    }
}
