//! Quick oracle and invariant checks runnable from the command line.

use rand::Rng;

use crate::filter::{measurement_normalizers, predict, update, FilterConfig};
use crate::harness::{run_trial, Preset, Variant};
use crate::metrics::{ospa, ospa_bruteforce, OspaParams};
use crate::models::{clutter_intensity, Measurement, Models, StateVector};
use crate::particle::{Particle, ParticleSet};
use crate::resampling::{resample, ResampleConfig};
use crate::rng::{stream, FilterStreams, Stream};
use crate::roughening::{Mode, RougheningConfig};

/// Outcome of one self-test check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn random_points(n: usize, rng: &mut impl Rng) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0)]).collect()
}

fn random_set(rng: &mut impl Rng, n: usize) -> ParticleSet {
    let particles = (0..n)
        .map(|_| {
            let s = StateVector::new(
                rng.random_range(-60.0..60.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-60.0..60.0),
                rng.random_range(-3.0..3.0),
            );
            Particle::new(s, rng.random_range(0.0..0.01))
        })
        .collect();
    ParticleSet { particles, step: 1, survivor_count: n, ancestors: None }
}

fn ospa_oracle() -> Check {
    let params = OspaParams::default();
    let mut rng = stream(1, Stream::Truth);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let x = random_points(rng.random_range(0..=6), &mut rng);
        let y = random_points(rng.random_range(0..=6), &mut rng);
        let a = ospa(&x, &y, &params).unwrap_or(f64::NAN);
        let b = ospa_bruteforce(&x, &y, &params).unwrap_or(f64::NAN);
        worst = worst.max((a - b).abs());
    }
    Check { name: "ospa matches brute force", passed: worst < 1e-9, detail: format!("max |diff| = {worst:.3e}") }
}

fn update_mass() -> Check {
    let models = Models::paper();
    let mut rng = stream(2, Stream::Truth);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..300);
        let pred = random_set(&mut rng, n);
        let m = rng.random_range(0..15);
        let z: Vec<Measurement> =
            (0..m).map(|_| Measurement::new(rng.random_range(-80.0..80.0), rng.random_range(-80.0..80.0))).collect();
        let out = update(&pred, &z, &models).expect("update");
        let c = measurement_normalizers(&pred, &z, &models);
        let expected = (1.0 - models.detection.p_detect) * pred.total_mass()
            + z.iter().zip(&c).map(|(zi, ci)| ci / (clutter_intensity(zi, &models.clutter) + ci)).sum::<f64>();
        worst = worst.max((out.total_mass() - expected).abs() / expected.max(1e-300));
    }
    Check { name: "update mass identity", passed: worst < 1e-10, detail: format!("max rel err = {worst:.3e}") }
}

fn predict_and_resample_mass() -> Check {
    let models = Models::paper();
    let mut rng = stream(3, Stream::Truth);
    let mut ok = true;
    for i in 0..100 {
        let prev = random_set(&mut rng, 1 + i * 3);
        let out = predict(&prev, &models, &FilterConfig::new(200), &RougheningConfig::none(), &mut FilterStreams::new(i as u64))
            .expect("predict");
        ok &= out.survivor_mass() == 0.95 * prev.total_mass();
        ok &= out.birth_mass() == 0.2;
        let res = resample(&out, &ResampleConfig::new(200), &mut stream(i as u64, Stream::Resample)).expect("resample");
        ok &= res.total_mass() == out.total_mass();
    }
    Check { name: "predict/resample mass exact", passed: ok, detail: String::new() }
}

fn zero_roughening() -> Check {
    let mut cfg = Preset::PaperNp200.config();
    cfg.filter = FilterConfig::new(60);
    cfg.variants = vec![
        Variant::basic(),
        Variant::new("sep0", RougheningConfig::velocity(Mode::Separate, 0.0)),
        Variant::new("dir0", RougheningConfig::velocity(Mode::Direct, 0.0)),
    ];
    let passed = match run_trial(&cfg, 0) {
        Ok(t) => t.variants[0] == t.variants[1] && t.variants[0] == t.variants[2],
        Err(_) => false,
    };
    Check { name: "zero roughening equals basic", passed, detail: String::new() }
}

/// Runs every check.
pub fn run_all() -> Vec<Check> {
    vec![ospa_oracle(), update_mass(), predict_and_resample_mass(), zero_roughening()]
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for c in super::run_all() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
