//! Calls the bindings through an embedded interpreter.

use pyo3::prelude::*;
use pyo3::types::{IntoPyDict, PyDict, PyModule};

use roughphd_py::roughphd_module;

type Simulation = (Vec<Vec<(usize, [f64; 4])>>, Vec<Vec<(f64, f64)>>);

fn with_module<T>(f: impl FnOnce(&Bound<'_, PyModule>) -> T) -> T {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "roughphd").unwrap();
        roughphd_module(&m).unwrap();
        f(&m)
    })
}

#[test]
fn ospa_and_gain_ratio() {
    with_module(|m| {
        let d: f64 = m.getattr("ospa").unwrap().call1((vec![[0.0, 0.0]], vec![[3.0, 4.0]])).unwrap().extract().unwrap();
        assert_eq!(d, 5.0);
        let g: f64 = m.getattr("gain_ratio").unwrap().call1((40.0, 30.0)).unwrap().extract().unwrap();
        assert_eq!(g, 0.25);
        let err = m.getattr("gain_ratio").unwrap().call1((0.0, 1.0)).unwrap_err();
        Python::attach(|py| assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py)));
    });
}

#[test]
fn filter_steps_through_a_scenario() {
    with_module(|m| {
        let sim = m.getattr("simulate").unwrap().call1((5u64,)).unwrap();
        let (_truth, scans): Simulation = sim.extract().unwrap();
        let filter = m.getattr("Filter").unwrap().call0().unwrap();
        let mut last = None;
        for scan in scans {
            last = Some(filter.call_method1("step", (scan,)).unwrap());
        }
        let out = last.unwrap();
        let out = out.cast::<PyDict>().unwrap();
        let n: usize = out.get_item("cardinality").unwrap().unwrap().extract().unwrap();
        let states: Vec<[f64; 4]> = out.get_item("states").unwrap().unwrap().extract().unwrap();
        assert_eq!(n, states.len());
        assert!(filter.len().unwrap() > 0);
    });
}

#[test]
fn unknown_mode_is_rejected() {
    with_module(|m| {
        let kwargs = [("mode", "sideways")].into_py_dict(m.py()).unwrap();
        assert!(m.getattr("Filter").unwrap().call((), Some(&kwargs)).is_err());
    });
}
