//! Python bindings: parse instance files, solve under each protocol, and
//! inspect thresholds, all returning plain Python types.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use irs_hma::hma::{self, BeamMode, OrderPolicy, SolveOptions};
use irs_hma::system::Budget;
use irs_hma::{config, noma, tdma, Error};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidConfig(_) | Error::Domain(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// One uplink instance: geometry, budgets, targets, fading seed.
#[pyclass(name = "SystemConfig")]
#[derive(Clone)]
struct PySystemConfig {
    inner: irs_hma::SystemConfig,
}

#[pymethods]
impl PySystemConfig {
    /// Parse the structured text format used by the CLI.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: config::parse_system(text).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: config::load_system(std::path::Path::new(path)).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn device_count(&self) -> usize {
        self.inner.device_count()
    }

    #[getter]
    fn irs_elements(&self) -> usize {
        self.inner.irs_elements
    }

    #[getter]
    fn bandwidth_hz(&self) -> f64 {
        self.inner.bandwidth_hz
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.rng_seed
    }

    #[getter]
    fn energy_limited(&self) -> bool {
        matches!(self.inner.budget, Budget::Energy(_))
    }

    /// Copy with a different fading seed.
    fn with_seed(&self, seed: u64) -> Self {
        let mut inner = self.inner.clone();
        inner.rng_seed = seed;
        Self { inner }
    }

    /// Copy with the reflecting surface removed.
    fn without_irs(&self) -> Self {
        Self {
            inner: self.inner.without_irs(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "SystemConfig(devices={}, irs_elements={}, energy_limited={}, seed={})",
            self.inner.device_count(),
            self.inner.irs_elements,
            matches!(self.inner.budget, Budget::Energy(_)),
            self.inner.rng_seed
        )
    }
}

/// Solver output: delay, regime, order, and the schedule.
#[pyclass(name = "Solution")]
struct PySolution {
    #[pyo3(get)]
    sum_delay: f64,
    #[pyo3(get)]
    regime: String,
    /// 0-based original device indices in decode-order positions.
    #[pyo3(get)]
    order: Vec<usize>,
    #[pyo3(get)]
    durations: Vec<f64>,
    #[pyo3(get)]
    completion_times: Vec<f64>,
    #[pyo3(get)]
    delay_trace: Vec<f64>,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    iterations: usize,
    /// powers[k][i] in watts for slot i <= position k.
    #[pyo3(get)]
    powers: Vec<Vec<f64>>,
}

#[pymethods]
impl PySolution {
    fn __repr__(&self) -> String {
        format!(
            "Solution(sum_delay={:.6e}, regime='{}', order={:?})",
            self.sum_delay, self.regime, self.order
        )
    }
}

fn parse_mode(beam_mode: &str) -> PyResult<BeamMode> {
    Ok(match beam_mode {
        "dynamic" => BeamMode::Dynamic,
        "static" => BeamMode::Static,
        "frozen" => BeamMode::Frozen,
        other => {
            return Err(PyValueError::new_err(format!(
                "beam_mode must be dynamic|static|frozen, got '{other}'"
            )))
        }
    })
}

fn parse_order(order: &str, seed: u64) -> PyResult<OrderPolicy> {
    Ok(match order {
        "pro" => OrderPolicy::Proposed,
        "des" => OrderPolicy::Descending,
        "rand" => OrderPolicy::Random(seed),
        "exhaustive" | "exh" => OrderPolicy::Exhaustive,
        other => {
            return Err(PyValueError::new_err(format!(
                "order must be pro|des|rand|exhaustive, got '{other}'"
            )))
        }
    })
}

/// Solve the hybrid-protocol delay minimization.
#[pyfunction]
#[pyo3(signature = (config, beam_mode = "dynamic", order = "pro"))]
fn solve_hybrid(config: &PySystemConfig, beam_mode: &str, order: &str) -> PyResult<PySolution> {
    let cfg = &config.inner;
    let channels = irs_hma::generate_channels(cfg).map_err(to_py_err)?;
    let options = SolveOptions {
        beam_mode: parse_mode(beam_mode)?,
        order: parse_order(order, cfg.rng_seed)?,
        ..Default::default()
    };
    let sol = hma::solve_hma(cfg, &channels, &options).map_err(to_py_err)?;
    let k = sol.schedule.device_count();
    let powers = (0..k)
        .map(|q| (0..=q).map(|i| sol.schedule.power(q, i)).collect())
        .collect();
    Ok(PySolution {
        sum_delay: sol.report.sum_delay,
        regime: sol.report.regime.to_string(),
        order: sol.report.order.clone(),
        durations: sol.schedule.durations.clone(),
        completion_times: sol.schedule.completion_times(),
        delay_trace: sol.report.trace.delays.clone(),
        converged: sol.report.converged,
        iterations: sol.report.outer_iterations,
        powers,
    })
}

/// Sum delay of the one-device-per-slot protocol with aligned beams.
#[pyfunction]
fn per_slot_delay(config: &PySystemConfig) -> PyResult<f64> {
    let cfg = &config.inner;
    let channels = irs_hma::generate_channels(cfg).map_err(to_py_err)?;
    let sol = match &cfg.budget {
        Budget::Power(_) => tdma::tdma_power_limited(cfg, &channels),
        Budget::Energy(_) => tdma::tdma_energy_limited(cfg, &channels),
    }
    .map_err(to_py_err)?;
    Ok(sol.sum_delay)
}

/// Delay of all-simultaneous transmission with an optimized slot beam.
#[pyfunction]
fn single_slot_delay(config: &PySystemConfig) -> PyResult<f64> {
    let cfg = &config.inner;
    let channels = irs_hma::generate_channels(cfg).map_err(to_py_err)?;
    let tdma_sol = match &cfg.budget {
        Budget::Power(_) => tdma::tdma_power_limited(cfg, &channels),
        Budget::Energy(_) => tdma::tdma_energy_limited(cfg, &channels),
    }
    .map_err(to_py_err)?;
    let order = hma::propose_order(&hma::tdma_snr(&tdma_sol));
    let sol = noma::solve_noma(cfg, &channels, &order).map_err(to_py_err)?;
    Ok(sol.duration)
}

/// Protocol-selection thresholds and the regime for one instance.
#[pyfunction]
fn thresholds<'py>(py: Python<'py>, config: &PySystemConfig) -> PyResult<Bound<'py, PyDict>> {
    let cfg = &config.inner;
    let channels = irs_hma::generate_channels(cfg).map_err(to_py_err)?;
    let sol = hma::solve_hma(cfg, &channels, &SolveOptions::default()).map_err(to_py_err)?;
    let dict = PyDict::new_bound(py);
    dict.set_item("regime", sol.report.regime.to_string())?;
    dict.set_item("order", sol.report.order.clone())?;
    let rows: Vec<Bound<'py, PyDict>> = sol
        .report
        .thresholds
        .comparisons
        .iter()
        .map(|c| {
            let row = PyDict::new_bound(py);
            row.set_item("position", c.position).unwrap();
            row.set_item("device", c.device).unwrap();
            row.set_item("own", c.own).unwrap();
            row.set_item("single_slot_threshold", c.noma_threshold)
                .unwrap();
            row.set_item("per_slot_threshold", c.tdma_threshold).unwrap();
            row
        })
        .collect();
    dict.set_item("comparisons", rows)?;
    Ok(dict)
}

/// Lower branch of the Lambert W function on [-1/e, 0).
#[pyfunction]
fn lambert_w_m1(x: f64) -> PyResult<f64> {
    irs_hma::numerics::lambert_w_m1(x).map_err(to_py_err)
}

/// Closed-form delay difference between the two decode orders of a
/// two-device power-limited instance; positive means device 1 first wins.
#[pyfunction]
fn order_gap(config: &PySystemConfig) -> PyResult<f64> {
    let cfg = &config.inner;
    let channels = irs_hma::generate_channels(cfg).map_err(to_py_err)?;
    hma::two_device_order_gap(cfg, &channels).map_err(to_py_err)
}

#[pymodule]
fn irs_hma_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemConfig>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(solve_hybrid, m)?)?;
    m.add_function(wrap_pyfunction!(per_slot_delay, m)?)?;
    m.add_function(wrap_pyfunction!(single_slot_delay, m)?)?;
    m.add_function(wrap_pyfunction!(thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(lambert_w_m1, m)?)?;
    m.add_function(wrap_pyfunction!(order_gap, m)?)?;
    Ok(())
}
