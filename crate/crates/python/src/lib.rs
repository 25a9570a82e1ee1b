//! Python bindings. Build with `--features extension-module` for an
//! importable `roughphd` module.

use std::str::FromStr;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use roughphd::harness::{self, Preset};
use roughphd::resampling::ResampleConfig;
use roughphd::roughening::Mode;
use roughphd::{FilterConfig, Measurement, Models, OspaParams, PhdFilter, RougheningConfig};

fn py_err(e: roughphd::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// OSPA distance between two sets of 2-D positions.
#[pyfunction]
#[pyo3(signature = (x, y, cutoff=100.0, order=2.0))]
fn ospa(x: Vec<[f64; 2]>, y: Vec<[f64; 2]>, cutoff: f64, order: f64) -> PyResult<f64> {
    roughphd::ospa(&x, &y, &OspaParams { cutoff, order }).map_err(py_err)
}

/// `(basic - roughened) / basic` for mean OSPA values.
#[pyfunction]
fn gain_ratio(basic: f64, roughened: f64) -> PyResult<f64> {
    roughphd::gain_ratio(basic, roughened).map_err(py_err)
}

/// Gordon jitter std `k * E * n^(-1/d)` per dimension.
#[pyfunction]
fn gordon_std(k: f64, spread: Vec<f64>, n: usize, d: usize) -> Vec<f64> {
    roughphd::gordon_std(k, &spread, n, d)
}

/// Particles kept by resampling a set of total mass `mass`.
#[pyfunction]
#[pyo3(signature = (mass, particles_per_target=200))]
fn target_count(mass: f64, particles_per_target: usize) -> usize {
    roughphd::target_count(mass, &ResampleConfig::new(particles_per_target))
}

/// Particle PHD filter on the four-target benchmark models.
#[pyclass(name = "Filter")]
struct PyFilter {
    inner: PhdFilter,
}

#[pymethods]
impl PyFilter {
    #[new]
    #[pyo3(signature = (particles_per_target=200, mode="none", delta=0.4, seed=0))]
    fn new(particles_per_target: usize, mode: &str, delta: f64, seed: u64) -> PyResult<Self> {
        let mode = Mode::from_str(mode).map_err(py_err)?;
        let rough = if mode == Mode::None { RougheningConfig::none() } else { RougheningConfig::velocity(mode, delta) };
        let inner = PhdFilter::new(Models::paper(), FilterConfig::new(particles_per_target), rough, seed)
            .map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Processes one scan of `(zx, zy)` measurements. Returns a dict with
    /// `step`, `cardinality`, `states` (list of `(px, vx, py, vy)`), `mass`
    /// and `track_loss`.
    fn step<'py>(&mut self, py: Python<'py>, measurements: Vec<(f64, f64)>) -> PyResult<Bound<'py, PyDict>> {
        let zs: Vec<Measurement> = measurements.into_iter().map(|(x, y)| Measurement::new(x, y)).collect();
        let out = self.inner.step(&zs).map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("step", out.step)?;
        d.set_item("cardinality", out.estimate.cardinality)?;
        d.set_item("states", out.estimate.states.iter().map(|s| s.0).collect::<Vec<_>>())?;
        d.set_item("mass", out.mass)?;
        d.set_item("track_loss", out.track_loss)?;
        Ok(d)
    }

    /// Current particle weights.
    fn weights(&self) -> Vec<f64> {
        self.inner.particles().weights()
    }

    /// Current particle states as `(px, vx, py, vy)`.
    fn states(&self) -> Vec<[f64; 4]> {
        self.inner.particles().particles.iter().map(|p| p.state.0).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.particles().len()
    }
}

/// Simulates one trial of the benchmark scenario. Returns `(truth, scans)`:
/// per step, a list of `(id, (px, vx, py, vy))` and a list of `(zx, zy)`.
#[pyfunction]
#[pyo3(signature = (seed, trial=0))]
#[allow(clippy::type_complexity)]
fn simulate(seed: u64, trial: u64) -> PyResult<(Vec<Vec<(usize, [f64; 4])>>, Vec<Vec<(f64, f64)>>)> {
    let cfg = roughphd::scenario::ScenarioConfig::paper();
    let sc = roughphd::scenario::simulate(&cfg, roughphd::rng::trial_seed(seed, trial)).map_err(py_err)?;
    let truth = sc.truth.steps.iter().map(|s| s.iter().map(|(id, x)| (*id, x.0)).collect()).collect();
    let scans = sc.scans.scans.iter().map(|s| s.iter().map(|z| (z.zx, z.zy)).collect()).collect();
    Ok((truth, scans))
}

/// Runs a preset comparison. Returns `{variant: {"mean_ospa": [...],
/// "mean_est_n": [...], "overall_ospa": float, "gain_ratio": float | None}}`.
#[pyfunction]
#[pyo3(signature = (preset="paper-np200", trials=None, seed=None, config=None))]
fn run<'py>(
    py: Python<'py>,
    preset: &str,
    trials: Option<usize>,
    seed: Option<u64>,
    config: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = Preset::from_str(preset).map_err(py_err)?.config();
    if let Some(text) = config {
        cfg = harness::apply_config_text(cfg, text).map_err(py_err)?;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    let report = py.detach(|| harness::run(&cfg)).map_err(py_err)?;
    let out = PyDict::new(py);
    for v in &report.summary.variants {
        let d = PyDict::new(py);
        d.set_item("mean_ospa", &v.mean_ospa)?;
        d.set_item("mean_est_n", &v.mean_est_n)?;
        d.set_item("overall_ospa", v.overall_ospa)?;
        d.set_item("gain_ratio", v.gain_ratio)?;
        out.set_item(&v.name, d)?;
    }
    Ok(out)
}

/// Module initializer; also usable to register the module in an embedded
/// interpreter.
#[pymodule(name = "roughphd")]
pub fn roughphd_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(ospa, m)?)?;
    m.add_function(wrap_pyfunction!(gain_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(gordon_std, m)?)?;
    m.add_function(wrap_pyfunction!(target_count, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_class::<PyFilter>()?;
    Ok(())
}
