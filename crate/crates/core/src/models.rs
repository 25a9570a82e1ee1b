//! Single-target models shared by the filter and the simulator: a nearly
//! constant velocity motion model, a linear position sensor, a Gaussian birth
//! intensity, uniform Poisson clutter and constant survival/detection
//! probabilities.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};

/// Kinematic state ordered `[px, vx, py, vy]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateVector(pub [f64; 4]);

impl StateVector {
    pub const DIM: usize = 4;

    pub fn new(px: f64, vx: f64, py: f64, vy: f64) -> Self {
        Self([px, vx, py, vy])
    }

    pub fn px(&self) -> f64 {
        self.0[0]
    }
    pub fn vx(&self) -> f64 {
        self.0[1]
    }
    pub fn py(&self) -> f64 {
        self.0[2]
    }
    pub fn vy(&self) -> f64 {
        self.0[3]
    }

    pub fn position(&self) -> [f64; 2] {
        [self.0[0], self.0[2]]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<[f64; 4]> for StateVector {
    fn from(v: [f64; 4]) -> Self {
        Self(v)
    }
}

/// Position measurement `(zx, zy)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Measurement {
    pub zx: f64,
    pub zy: f64,
}

impl Measurement {
    pub fn new(zx: f64, zy: f64) -> Self {
        Self { zx, zy }
    }

    pub fn is_finite(&self) -> bool {
        self.zx.is_finite() && self.zy.is_finite()
    }
}

fn normal_pdf(x: f64, mean: f64, std: f64) -> f64 {
    let u = (x - mean) / std;
    (-0.5 * u * u).exp() / (std * (2.0 * PI).sqrt())
}

/// Nearly constant velocity dynamics with per-axis acceleration noise.
///
/// `x_k = F x_{k-1} + G v`, where `G` maps the 2-d noise onto
/// `(T^2/2, T)` of each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionModel {
    pub dt: f64,
    pub sigma_v1: f64,
    pub sigma_v2: f64,
}

impl MotionModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("motion.dt must be > 0, got {}", self.dt)));
        }
        if !(self.sigma_v1 >= 0.0 && self.sigma_v2 >= 0.0) {
            return Err(Error::InvalidParameter("motion noise stds must be >= 0".into()));
        }
        Ok(())
    }

    pub fn sigmas(&self) -> [f64; 2] {
        [self.sigma_v1, self.sigma_v2]
    }

    /// Noise-free prediction `F x`.
    pub fn transition(&self, s: &StateVector) -> StateVector {
        let t = self.dt;
        let [px, vx, py, vy] = s.0;
        StateVector([px + t * vx, vx, py + t * vy, vy])
    }

    /// `F x + G v` for an explicit noise vector.
    pub fn apply_noise(&self, s: &StateVector, noise: [f64; 2]) -> StateVector {
        let t = self.dt;
        let h = 0.5 * t * t;
        let m = self.transition(s);
        StateVector([
            m.0[0] + h * noise[0],
            m.0[1] + t * noise[0],
            m.0[2] + h * noise[1],
            m.0[3] + t * noise[1],
        ])
    }
}

/// Propagates `state` one step with noise stds `noise_scale * (sigma_v1, sigma_v2)`.
pub fn propagate<R: Rng + ?Sized>(
    state: &StateVector,
    model: &MotionModel,
    noise_scale: [f64; 2],
    rng: &mut R,
) -> Result<StateVector> {
    if noise_scale.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::InvalidParameter("noise scale must be >= 0".into()));
    }
    let std = [noise_scale[0] * model.sigma_v1, noise_scale[1] * model.sigma_v2];
    propagate_with_std(state, model, std, rng)
}

/// Propagates `state` one step with absolute per-axis noise stds.
///
/// Always consumes exactly two standard normal draws, whatever the stds.
pub fn propagate_with_std<R: Rng + ?Sized>(
    state: &StateVector,
    model: &MotionModel,
    std: [f64; 2],
    rng: &mut R,
) -> Result<StateVector> {
    if !state.is_finite() {
        return Err(Error::NonFinite("state"));
    }
    let z0: f64 = rng.sample(StandardNormal);
    let z1: f64 = rng.sample(StandardNormal);
    Ok(model.apply_noise(state, [std[0] * z0, std[1] * z1]))
}

/// Relative tolerance for the position consistency check in [`transition_density`].
pub const MANIFOLD_TOL: f64 = 1e-9;

/// Transition density `f(x | u)` evaluated in noise coordinates.
///
/// The process covariance has rank 2, so the density lives on the affine
/// noise manifold through `F u`. The noise vector is recovered from the
/// velocity change and the positions are checked against it; states off the
/// manifold have density 0.
pub fn transition_density(x: &StateVector, u: &StateVector, model: &MotionModel) -> Result<f64> {
    if !(model.sigma_v1 > 0.0 && model.sigma_v2 > 0.0) {
        return Err(Error::InvalidParameter("transition density needs positive noise stds".into()));
    }
    if !x.is_finite() || !u.is_finite() {
        return Err(Error::NonFinite("state"));
    }
    let t = model.dt;
    let noise = [(x.vx() - u.vx()) / t, (x.vy() - u.vy()) / t];
    let expected = model.apply_noise(u, noise);
    for i in [0, 2] {
        let scale = 1.0_f64.max(x.0[i].abs()).max(expected.0[i].abs());
        if (x.0[i] - expected.0[i]).abs() > MANIFOLD_TOL * scale {
            return Ok(0.0);
        }
    }
    Ok(normal_pdf(noise[0], 0.0, model.sigma_v1) * normal_pdf(noise[1], 0.0, model.sigma_v2))
}

/// Linear position sensor with independent Gaussian noise per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementModel {
    pub sigma_w1: f64,
    pub sigma_w2: f64,
}

impl MeasurementModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_w1 >= 0.0 && self.sigma_w2 >= 0.0) {
            return Err(Error::InvalidParameter("measurement noise stds must be >= 0".into()));
        }
        Ok(())
    }

    pub fn min_sigma(&self) -> f64 {
        self.sigma_w1.min(self.sigma_w2)
    }
}

/// Single-target likelihood `g(z | x)`.
pub fn likelihood(z: &Measurement, x: &StateVector, model: &MeasurementModel) -> f64 {
    normal_pdf(z.zx, x.px(), model.sigma_w1) * normal_pdf(z.zy, x.py(), model.sigma_w2)
}

/// Draws `H x + w`.
pub fn measure<R: Rng + ?Sized>(x: &StateVector, model: &MeasurementModel, rng: &mut R) -> Measurement {
    let w0: f64 = rng.sample(StandardNormal);
    let w1: f64 = rng.sample(StandardNormal);
    Measurement::new(x.px() + model.sigma_w1 * w0, x.py() + model.sigma_w2 * w1)
}

/// Spawn intensity `b(x | u)` of targets spawned from a parent state `u`.
///
/// No concrete kernel ships with the crate; the default birth model has none.
pub trait SpawnIntensity: Send + Sync {
    fn intensity(&self, x: &StateVector, parent: &StateVector) -> f64;
}

/// Gaussian birth intensity `mass * N(x; mean, diag(cov_diag))`.
#[derive(Clone)]
pub struct BirthModel {
    pub mass: f64,
    pub mean: StateVector,
    pub cov_diag: [f64; 4],
    pub spawn: Option<Arc<dyn SpawnIntensity>>,
}

impl fmt::Debug for BirthModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BirthModel")
            .field("mass", &self.mass)
            .field("mean", &self.mean)
            .field("cov_diag", &self.cov_diag)
            .field("spawn", &self.spawn.as_ref().map(|_| "<kernel>"))
            .finish()
    }
}

impl BirthModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter("birth.mass must be >= 0".into()));
        }
        if self.cov_diag.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidParameter("birth covariance diagonal must be > 0".into()));
        }
        if !self.mean.is_finite() {
            return Err(Error::NonFinite("birth.mean"));
        }
        Ok(())
    }

    /// Normalized birth density `N(x; mean, cov)`.
    pub fn density(&self, x: &StateVector) -> f64 {
        let det: f64 = self.cov_diag.iter().product();
        let maha: f64 = (0..4)
            .map(|i| {
                let d = x.0[i] - self.mean.0[i];
                d * d / self.cov_diag[i]
            })
            .sum();
        (-0.5 * maha).exp() / ((2.0 * PI).powi(2) * det.sqrt())
    }

    /// Draws a state from the normalized birth density.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> StateVector {
        let mut s = self.mean;
        for i in 0..4 {
            let z: f64 = rng.sample(StandardNormal);
            s.0[i] += self.cov_diag[i].sqrt() * z;
        }
        s
    }
}

/// Birth intensity `gamma(x) = mass * N(x; mean, cov)`.
pub fn birth_intensity(x: &StateVector, model: &BirthModel) -> f64 {
    if model.mass == 0.0 {
        return 0.0;
    }
    model.mass * model.density(x)
}

pub fn birth_sample<R: Rng + ?Sized>(model: &BirthModel, rng: &mut R) -> StateVector {
    model.sample(rng)
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self { x_min, x_max, y_min, y_max }
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn contains(&self, zx: f64, zy: f64) -> bool {
        zx >= self.x_min && zx <= self.x_max && zy >= self.y_min && zy <= self.y_max
    }
}

/// Poisson clutter, uniform over a rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClutterModel {
    pub rate: f64,
    pub region: Region,
}

impl ClutterModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(Error::InvalidParameter("clutter.rate must be >= 0".into()));
        }
        if !(self.region.area() > 0.0) {
            return Err(Error::InvalidParameter("clutter region must have positive area".into()));
        }
        Ok(())
    }

    /// Spatial density `c(z)` of a single clutter point.
    pub fn density(&self, z: &Measurement) -> f64 {
        if self.region.contains(z.zx, z.zy) {
            1.0 / self.region.area()
        } else {
            0.0
        }
    }
}

/// Clutter intensity `kappa(z) = rate * c(z)`.
pub fn clutter_intensity(z: &Measurement, model: &ClutterModel) -> f64 {
    if model.region.contains(z.zx, z.zy) {
        model.rate / model.region.area()
    } else {
        0.0
    }
}

/// Draws one scan of clutter: a Poisson(rate) count of uniform points.
pub fn clutter_sample<R: Rng + ?Sized>(model: &ClutterModel, rng: &mut R) -> Vec<Measurement> {
    let count = if model.rate > 0.0 {
        Poisson::new(model.rate).map(|p| p.sample(rng) as usize).unwrap_or(0)
    } else {
        0
    };
    let r = model.region;
    (0..count)
        .map(|_| {
            Measurement::new(
                rng.random_range(r.x_min..r.x_max),
                rng.random_range(r.y_min..r.y_max),
            )
        })
        .collect()
}

/// State-independent survival and detection probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionModel {
    pub p_survive: f64,
    pub p_detect: f64,
}

impl DetectionModel {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_survive", self.p_survive), ("p_detect", self.p_detect)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

/// All models of one scenario.
#[derive(Debug, Clone)]
pub struct Models {
    pub motion: MotionModel,
    pub measurement: MeasurementModel,
    pub birth: BirthModel,
    pub clutter: ClutterModel,
    pub detection: DetectionModel,
}

impl Models {
    /// The benchmark scenario: unit sampling time, process noise stds (1, 0.1),
    /// sensor noise 2.5, birth mass 0.2 at `[0, 3, 0, -3]` with
    /// `diag(10, 1, 10, 1)`, ten clutter points per scan over
    /// `[-100, 100]^2`, survival and detection 0.95.
    pub fn paper() -> Self {
        Self {
            motion: MotionModel { dt: 1.0, sigma_v1: 1.0, sigma_v2: 0.1 },
            measurement: MeasurementModel { sigma_w1: 2.5, sigma_w2: 2.5 },
            birth: BirthModel {
                mass: 0.2,
                mean: StateVector::new(0.0, 3.0, 0.0, -3.0),
                cov_diag: [10.0, 1.0, 10.0, 1.0],
                spawn: None,
            },
            clutter: ClutterModel { rate: 10.0, region: Region::new(-100.0, 100.0, -100.0, 100.0) },
            detection: DetectionModel { p_survive: 0.95, p_detect: 0.95 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.motion.validate()?;
        self.measurement.validate()?;
        self.birth.validate()?;
        self.clutter.validate()?;
        self.detection.validate()
    }
}
