//! Python bindings: configuration, the four pipeline runners, the invariant
//! self-checks, and the standalone numerical primitives.

use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use levitodyn::analysis::{lorentzian_fit, welch_psd, TimeSeries};
use levitodyn::config::SimConfig;
use levitodyn::kinematics::{rotation_from_euler, EulerAngles};
use levitodyn::optics::{elliptical_polarization, Susceptibility};
use levitodyn::output::read_columns_csv;
use levitodyn::run::{run_check, run_currents, run_psd, run_simulate, run_sme, RunOptions};
use levitodyn::Error;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::ConfigInvalid(_) => PyValueError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

/// Parsed run configuration (TOML).
#[pyclass(name = "Config", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: SimConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    fn new(toml: &str) -> PyResult<Self> {
        SimConfig::parse(toml).map(|inner| Self { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn from_path(path: PathBuf) -> PyResult<Self> {
        SimConfig::from_path(&path).map(|inner| Self { inner }).map_err(to_py)
    }
}

/// Read a CSV the runners emitted into an ordered column dict.
fn columns_dict<'py>(py: Python<'py>, path: &Path) -> PyResult<Bound<'py, PyDict>> {
    let (header, rows) = read_columns_csv(path).map_err(to_py)?;
    let dict = PyDict::new(py);
    for (k, name) in header.iter().enumerate() {
        let col: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        dict.set_item(name, col)?;
    }
    Ok(dict)
}

fn resolve_out(out_dir: Option<PathBuf>) -> PyResult<(PathBuf, Option<tempfile::TempDir>)> {
    match out_dir {
        Some(dir) => Ok((dir, None)),
        None => {
            let tmp = tempfile::tempdir()
                .map_err(|e| PyRuntimeError::new_err(format!("tempdir: {e}")))?;
            Ok((tmp.path().to_path_buf(), Some(tmp)))
        }
    }
}

/// Classical trajectory with homodyne current; returns the trace columns.
#[pyfunction]
#[pyo3(signature = (config, out_dir=None, seed=None))]
fn simulate<'py>(
    py: Python<'py>,
    config: &PyConfig,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let (dir, _tmp) = resolve_out(out_dir)?;
    let opts = RunOptions { seed, threads: 1 };
    run_simulate(&config.inner, &dir, &opts).map_err(to_py)?;
    columns_dict(py, &dir.join("trace.csv"))
}

/// Static current-decomposition sweep; returns the sweep columns.
#[pyfunction]
#[pyo3(signature = (config, out_dir=None, threads=1))]
fn currents<'py>(
    py: Python<'py>,
    config: &PyConfig,
    out_dir: Option<PathBuf>,
    threads: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let (dir, _tmp) = resolve_out(out_dir)?;
    let opts = RunOptions { seed: None, threads };
    run_currents(&config.inner, &dir, &opts).map_err(to_py)?;
    columns_dict(py, &dir.join("currents.csv"))
}

/// Quantum toy-model trajectory; returns the observable columns.
#[pyfunction]
#[pyo3(signature = (config, out_dir=None, seed=None))]
fn sme<'py>(
    py: Python<'py>,
    config: &PyConfig,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let (dir, _tmp) = resolve_out(out_dir)?;
    let opts = RunOptions { seed, threads: 1 };
    run_sme(&config.inner, &dir, &opts).map_err(to_py)?;
    columns_dict(py, &dir.join("sme.csv"))
}

/// Welch PSD (and optional fit) of a previously written trace column.
/// `out_dir` must be the directory the trace was written to when the
/// configured input path is relative.
#[pyfunction]
#[pyo3(signature = (config, out_dir))]
fn psd<'py>(
    py: Python<'py>,
    config: &PyConfig,
    out_dir: PathBuf,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = RunOptions::default();
    run_psd(&config.inner, &out_dir, &opts).map_err(to_py)?;
    columns_dict(py, &out_dir.join("psd.csv"))
}

/// Invariant self-checks; returns `(name, passed, detail)` tuples.
#[pyfunction]
fn check(config: &PyConfig) -> PyResult<Vec<(String, bool, String)>> {
    let results = run_check(&config.inner).map_err(to_py)?;
    Ok(results
        .into_iter()
        .map(|r| (r.name.to_string(), r.passed, r.detail))
        .collect())
}

/// Welch power spectral density of a uniformly sampled series.
#[pyfunction(name = "welch_psd")]
#[pyo3(signature = (sample_rate, values, segment_length, overlap=0.5))]
fn welch_psd_py(
    sample_rate: f64,
    values: Vec<f64>,
    segment_length: usize,
    overlap: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let ts = TimeSeries::new(sample_rate, values).map_err(to_py)?;
    welch_psd(&ts, segment_length, overlap).map_err(to_py)
}

/// Lorentzian fit over `window = (f_lo, f_hi)`; returns the fit parameters.
#[pyfunction(name = "lorentzian_fit")]
fn lorentzian_fit_py<'py>(
    py: Python<'py>,
    frequencies: Vec<f64>,
    psd: Vec<f64>,
    window: (f64, f64),
) -> PyResult<Bound<'py, PyDict>> {
    let fit = lorentzian_fit(&frequencies, &psd, window).map_err(to_py)?;
    let dict = PyDict::new(py);
    dict.set_item("center", fit.center)?;
    dict.set_item("linewidth", fit.linewidth)?;
    dict.set_item("plateau", fit.plateau)?;
    dict.set_item("amplitude", fit.amplitude)?;
    dict.set_item("residual", fit.residual)?;
    Ok(dict)
}

/// Rotation matrix for z-y'-z'' Euler angles, as nested lists.
#[pyfunction(name = "rotation_from_euler")]
fn rotation_from_euler_py(alpha: f64, beta: f64, gamma: f64) -> Vec<Vec<f64>> {
    let f = rotation_from_euler(&EulerAngles::new(alpha, beta, gamma));
    (0..3).map(|i| (0..3).map(|j| f[(i, j)]).collect()).collect()
}

/// Orientation-dependent optical coupling for the given susceptibility and
/// elliptical polarization amplitudes.
#[pyfunction(name = "gradient_coupling")]
fn gradient_coupling_py(
    euler: (f64, f64, f64),
    chi0: f64,
    delta_chi: (f64, f64, f64),
    bx: f64,
    by: f64,
) -> PyResult<f64> {
    let phi = EulerAngles::new(euler.0, euler.1, euler.2);
    let chi = Susceptibility::new(chi0, Vector3::new(delta_chi.0, delta_chi.1, delta_chi.2))
        .map_err(to_py)?;
    let pol = elliptical_polarization(bx, by).map_err(to_py)?;
    Ok(levitodyn::optics::gradient_coupling(&phi, &chi, &pol))
}

#[pymodule]
fn levitodyn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(currents, m)?)?;
    m.add_function(wrap_pyfunction!(sme, m)?)?;
    m.add_function(wrap_pyfunction!(psd, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(welch_psd_py, m)?)?;
    m.add_function(wrap_pyfunction!(lorentzian_fit_py, m)?)?;
    m.add_function(wrap_pyfunction!(rotation_from_euler_py, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_coupling_py, m)?)?;
    Ok(())
}
