//! Weighted particle representation of a PHD intensity.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::models::StateVector;

/// Weights below this are flushed to zero.
pub const WEIGHT_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub state: StateVector,
    pub weight: f64,
}

impl Particle {
    pub fn new(state: StateVector, weight: f64) -> Self {
        Self { state, weight }
    }
}

/// Particle approximation of the intensity at one time step.
///
/// The first `survivor_count` particles descend from the previous step, the
/// rest are births. After resampling `ancestors[i]` is the index (in the
/// pre-resampling set) that particle `i` was copied from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParticleSet {
    pub particles: Vec<Particle>,
    pub step: usize,
    pub survivor_count: usize,
    pub ancestors: Option<Vec<usize>>,
}

impl ParticleSet {
    pub fn empty(step: usize) -> Self {
        Self { step, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Expected number of targets: the in-order sum of weights.
    pub fn total_mass(&self) -> f64 {
        sequential_sum(self.particles.iter().map(|p| p.weight))
    }

    pub fn survivor_mass(&self) -> f64 {
        sequential_sum(self.particles[..self.survivor_count].iter().map(|p| p.weight))
    }

    pub fn birth_mass(&self) -> f64 {
        sequential_sum(self.particles[self.survivor_count..].iter().map(|p| p.weight))
    }

    pub fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.weight).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.survivor_count > self.particles.len() {
            return Err(Error::InvalidParameter("survivor_count exceeds particle count".into()));
        }
        if let Some(a) = &self.ancestors {
            if a.len() != self.particles.len() {
                return Err(Error::InvalidParameter("ancestry length mismatch".into()));
            }
        }
        for p in &self.particles {
            if !(p.weight >= 0.0 && p.weight.is_finite()) {
                return Err(Error::NonFinite("particle weight"));
            }
            if !p.state.is_finite() {
                return Err(Error::NonFinite("particle state"));
            }
        }
        Ok(())
    }

    /// Column text snapshot: `step px vx py vy weight`, one particle per line.
    pub fn to_columns(&self) -> String {
        let mut out = String::from("step\tpx\tvx\tpy\tvy\tweight\n");
        for p in &self.particles {
            let [px, vx, py, vy] = p.state.0;
            let _ = writeln!(out, "{}\t{px}\t{vx}\t{py}\t{vy}\t{}", self.step, p.weight);
        }
        out
    }

    /// Parses a snapshot written by [`ParticleSet::to_columns`]. Survivor
    /// split and ancestry are not part of the format; every particle is
    /// treated as a survivor.
    pub fn from_columns(text: &str) -> Result<Self> {
        let mut set = ParticleSet::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("step") || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 6 {
                return Err(Error::Parse { line: i + 1, msg: format!("expected 6 columns, got {}", fields.len()) });
            }
            let step: usize = fields[0]
                .parse()
                .map_err(|e| Error::Parse { line: i + 1, msg: format!("step: {e}") })?;
            let mut v = [0.0; 5];
            for (slot, f) in v.iter_mut().zip(&fields[1..]) {
                *slot = f.parse().map_err(|e| Error::Parse { line: i + 1, msg: format!("{f}: {e}") })?;
            }
            set.step = step;
            set.particles.push(Particle::new(StateVector([v[0], v[1], v[2], v[3]]), v[4]));
        }
        set.survivor_count = set.particles.len();
        set.validate()?;
        Ok(set)
    }
}

/// Plain left-to-right floating-point sum.
pub fn sequential_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().fold(0.0, |acc, w| acc + w)
}

/// Adjusts the last weight so that the left-to-right sum of `weights` equals
/// `target` exactly. The adjustment is a few ulps at most.
pub(crate) fn settle_mass(weights: &mut [f64], target: f64) {
    let Some((last, head)) = weights.split_last_mut() else {
        return;
    };
    let head_sum = sequential_sum(head.iter().copied());
    let mut w = (target - head_sum).max(0.0);
    for _ in 0..64 {
        let total = head_sum + w;
        if total == target {
            break;
        }
        w = if total < target { w.next_up() } else { w.next_down().max(0.0) };
    }
    *last = w;
}
