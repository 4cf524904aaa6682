//! Python bindings for the gta-mimo detection library.
//!
//! Exposes the symbol alphabet, the real-valued linear system, the
//! individual detectors, the Gaussian posteriors, the spanning-tree
//! builder, and the Monte Carlo sweep (as a JSON report string).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use gta_mimo::harness::{emit_report, run_sweep as run_sweep_rs, OutputFormat, SimConfig};
use gta_mimo::posterior::{mmse_posterior, zf_posterior};
use gta_mimo::tree::max_spanning_tree as max_spanning_tree_rs;
use gta_mimo::{DetectorSpec, Error, GaussianPosterior};
use nalgebra::{DMatrix, DVector};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn matrix_from_rows(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let m = rows.len();
    if m == 0 {
        return Err(PyValueError::new_err("matrix must have at least one row"));
    }
    let n = rows[0].len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix rows have unequal lengths"));
    }
    Ok(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn posterior_to_py(post: GaussianPosterior) -> (Vec<f64>, Vec<Vec<f64>>) {
    (
        post.mean().iter().copied().collect(),
        matrix_to_rows(post.cov()),
    )
}

/// A PAM symbol alphabet (one real dimension of a square QAM constellation).
#[pyclass(name = "Constellation", module = "gta_mimo_py", skip_from_py_object)]
#[derive(Clone)]
struct PyConstellation {
    inner: gta_mimo::Constellation,
}

#[pymethods]
impl PyConstellation {
    /// Constellation(qam_order) -> PAM alphabet of a square QAM order.
    #[new]
    fn new(qam_order: u32) -> PyResult<Self> {
        Ok(Self {
            inner: gta_mimo::Constellation::make_qam(qam_order).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn levels(&self) -> Vec<f64> {
        self.inner.levels().to_vec()
    }

    #[getter]
    fn energy(&self) -> f64 {
        self.inner.energy()
    }

    /// Nearest symbol to v; ties break toward the smaller level.
    fn slice(&self, v: f64) -> PyResult<f64> {
        self.inner.slice(v).map_err(to_py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Constellation(levels={:?}, energy={})",
            self.inner.levels(),
            self.inner.energy()
        )
    }
}

/// Real-valued observation model y = Hx + noise with per-component variance.
#[pyclass(name = "LinearSystem", module = "gta_mimo_py")]
struct PyLinearSystem {
    inner: gta_mimo::LinearSystem,
}

#[pymethods]
impl PyLinearSystem {
    /// LinearSystem(h_rows, y, noise_variance); h_rows is row-major.
    #[new]
    fn new(h_rows: Vec<Vec<f64>>, y: Vec<f64>, noise_variance: f64) -> PyResult<Self> {
        let h = matrix_from_rows(h_rows)?;
        let inner = gta_mimo::LinearSystem::new(h, DVector::from_vec(y), noise_variance)
            .map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n_vars(&self) -> usize {
        self.inner.n_vars()
    }

    #[getter]
    fn n_obs(&self) -> usize {
        self.inner.n_obs()
    }

    #[getter]
    fn noise_variance(&self) -> f64 {
        self.inner.noise_variance()
    }

    fn __repr__(&self) -> String {
        format!(
            "LinearSystem({}x{}, noise_variance={})",
            self.inner.n_obs(),
            self.inner.n_vars(),
            self.inner.noise_variance()
        )
    }
}

type DetectOutput = (Vec<f64>, Option<Vec<Vec<f64>>>);

/// Runs one detector; returns (hard_decisions, beliefs_or_None).
///
/// Detector names: zf, mmse, sic, gta, gta:line, gta:zf, gta:max, ml, loopybp.
#[pyfunction]
fn detect(
    sys: PyRef<'_, PyLinearSystem>,
    constellation: PyRef<'_, PyConstellation>,
    detector: &str,
) -> PyResult<DetectOutput> {
    let spec: DetectorSpec = detector.parse().map_err(to_py_err)?;
    let res = spec
        .detect(&sys.inner, &constellation.inner)
        .map_err(to_py_err)?;
    let soft = res.soft.map(|b| b.rows().to_vec());
    Ok((res.hard, soft))
}

/// Least-squares posterior (mean, covariance_rows) of the system.
#[pyfunction]
fn zf_estimate(sys: PyRef<'_, PyLinearSystem>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    Ok(posterior_to_py(zf_posterior(&sys.inner).map_err(to_py_err)?))
}

/// Bayesian posterior (mean, covariance_rows) under an N(0, eI) prior.
#[pyfunction]
fn mmse_estimate(
    sys: PyRef<'_, PyLinearSystem>,
    e: f64,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    Ok(posterior_to_py(
        mmse_posterior(&sys.inner, e).map_err(to_py_err)?,
    ))
}

/// Maximum spanning tree of a symmetric weight matrix (row-major), rooted
/// at node 0; returns the parent of each node (None for the root).
#[pyfunction]
fn max_spanning_tree(weights: Vec<Vec<f64>>) -> PyResult<Vec<Option<usize>>> {
    let w = matrix_from_rows(weights)?;
    let tree = max_spanning_tree_rs(&w).map_err(to_py_err)?;
    Ok(tree.parents().to_vec())
}

/// Mutual information −ln(1 − ρ²) of two jointly Gaussian variables.
#[pyfunction]
fn mutual_information(rho: f64) -> PyResult<f64> {
    gta_mimo::posterior::mutual_information(rho).map_err(to_py_err)
}

/// Runs a Monte Carlo SNR sweep and returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (tx, rx, qam, snr_db, trials, detectors, seed = 1, real_mode = false))]
#[allow(clippy::too_many_arguments)]
fn run_sweep(
    tx: usize,
    rx: usize,
    qam: u32,
    snr_db: Vec<f64>,
    trials: u64,
    detectors: Vec<String>,
    seed: u64,
    real_mode: bool,
) -> PyResult<String> {
    let detectors: Result<Vec<DetectorSpec>, Error> =
        detectors.iter().map(|s| s.parse()).collect();
    let cfg = SimConfig {
        tx_antennas: tx,
        rx_antennas: rx,
        qam_order: qam,
        snr_grid_db: snr_db,
        trials_per_point: trials,
        detectors: detectors.map_err(to_py_err)?,
        master_seed: seed,
        real_mode,
        output_format: OutputFormat::Json,
    };
    let report = run_sweep_rs(&cfg).map_err(to_py_err)?;
    let bytes = emit_report(&report, OutputFormat::Json).map_err(to_py_err)?;
    String::from_utf8(bytes).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn gta_mimo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConstellation>()?;
    m.add_class::<PyLinearSystem>()?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(zf_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(mmse_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(max_spanning_tree, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
