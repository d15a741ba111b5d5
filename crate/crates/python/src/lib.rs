use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use leakcert::adversary::{self, Optimizer};
use leakcert::analytic::{self, BoundIngredients, MixtureParams, QuadratureSpec};
use leakcert::audit::{self, VerdictPolicy};
use leakcert::finitealpha;
use leakcert::harness::{self, SelftestOptions};
use leakcert::synthdata::{self, FileSetting};
use leakcert::{Error, Loss, Sign};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for leakcert::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn parse_loss(loss: &str) -> PyResult<Loss> {
    loss.parse().py()
}

fn signs(labels: &[i64]) -> PyResult<Vec<Sign>> {
    labels
        .iter()
        .map(|&s| Sign::from_i64(s).ok_or_else(|| PyValueError::new_err(format!("label {s} is not -1 or +1"))))
        .collect()
}

/// Gaussian mixture scenario with `<v, v0> = mu`.
#[pyclass(name = "Scenario", module = "leakcert_py", frozen)]
struct PyScenario(synthdata::Scenario);

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (mu, r = 3.0, seed = 0))]
    fn new(mu: f64, r: f64, seed: u64) -> PyResult<Self> {
        Ok(PyScenario(synthdata::Scenario::with_mu(mu, r, seed).py()?))
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu()
    }

    #[getter]
    fn r(&self) -> f64 {
        self.0.r
    }

    fn sample(&self, py: Python<'_>, n: usize) -> PyResult<PyDataset> {
        py.detach(|| synthdata::sample_dataset(&self.0, n)).py().map(PyDataset)
    }

    fn minimal_true_loss(&self) -> PyResult<f64> {
        audit::reference_truth(&self.0, &QuadratureSpec::default()).py()
    }

    fn __repr__(&self) -> String {
        format!("Scenario(mu={}, r={}, seed={})", self.0.mu(), self.0.r, self.0.seed)
    }
}

/// Labelled samples in the representation or classification setting.
#[pyclass(name = "Dataset", module = "leakcert_py", frozen)]
struct PyDataset(synthdata::Dataset);

#[pymethods]
impl PyDataset {
    #[staticmethod]
    #[pyo3(signature = (labels, values, q = 1))]
    fn representation(labels: Vec<i64>, values: Vec<f64>, q: usize) -> PyResult<Self> {
        Ok(PyDataset(synthdata::Dataset::representation(signs(&labels)?, q, values).py()?))
    }

    #[staticmethod]
    fn classification(labels: Vec<i64>, symbols: Vec<u32>, d: usize) -> PyResult<Self> {
        Ok(PyDataset(synthdata::Dataset::classification(signs(&labels)?, d, symbols).py()?))
    }

    /// Reads a CSV file; pass `d` for classification data.
    #[staticmethod]
    #[pyo3(signature = (path, d = None))]
    fn load(path: PathBuf, d: Option<usize>) -> PyResult<Self> {
        let setting = d.map_or(FileSetting::Representation, |d| FileSetting::Classification { d });
        Ok(PyDataset(synthdata::read_dataset(path, setting).py()?))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        synthdata::write_dataset(&self.0, path).py()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn setting(&self) -> &'static str {
        match self.0.setting() {
            synthdata::Setting::Representation => "representation",
            synthdata::Setting::Classification => "classification",
        }
    }

    fn labels(&self) -> Vec<i8> {
        self.0.labels().iter().map(|s| s.as_i8()).collect()
    }

    fn values(&self) -> PyResult<Vec<f64>> {
        Ok(self.0.representation_values().py()?.1.to_vec())
    }

    fn symbols(&self) -> PyResult<Vec<u32>> {
        Ok(self.0.classification_symbols().py()?.1.to_vec())
    }

    fn discretize(&self, d: usize, r: f64) -> PyResult<Self> {
        Ok(PyDataset(self.0.discretize(d, r).py()?))
    }
}

/// Training protocol of the adversary search.
#[pyclass(name = "TrainConfig", module = "leakcert_py", get_all, set_all, from_py_object)]
#[derive(Clone)]
struct PyTrainConfig {
    restarts: usize,
    epochs: usize,
    batch_size: usize,
    optimizer: String,
    learn_rate: f64,
    seed: u64,
    loss: String,
}

#[pymethods]
impl PyTrainConfig {
    #[new]
    #[pyo3(signature = (restarts = 10, epochs = 30, batch_size = 256, optimizer = "adam".to_string(), learn_rate = 1e-3, seed = 0, loss = "squared".to_string()))]
    fn new(restarts: usize, epochs: usize, batch_size: usize, optimizer: String, learn_rate: f64, seed: u64, loss: String) -> Self {
        PyTrainConfig { restarts, epochs, batch_size, optimizer, learn_rate, seed, loss }
    }
}

impl Default for PyTrainConfig {
    fn default() -> Self {
        PyTrainConfig::new(10, 30, 256, "adam".into(), 1e-3, 0, "squared".into())
    }
}

impl PyTrainConfig {
    fn to_core(&self) -> PyResult<adversary::TrainConfig> {
        let cfg = adversary::TrainConfig {
            restarts: self.restarts,
            epochs: self.epochs,
            batch_size: self.batch_size,
            optimizer: self.optimizer.parse::<Optimizer>().py()?,
            learn_rate: self.learn_rate,
            seed: self.seed,
            loss: parse_loss(&self.loss)?,
            ..Default::default()
        };
        cfg.validate().py()?;
        Ok(cfg)
    }
}

/// `h(t) = c0 + sum_i c_i * tanh((a_i . t + b_i) / 2)`.
#[pyclass(name = "TwoLayerNet", module = "leakcert_py", frozen)]
struct PyTwoLayerNet(adversary::TwoLayerNet);

#[pymethods]
impl PyTwoLayerNet {
    #[staticmethod]
    fn from_parts(a: Vec<Vec<f64>>, b: Vec<f64>, c0: f64, c: Vec<f64>) -> PyResult<Self> {
        Ok(PyTwoLayerNet(adversary::TwoLayerNet::from_parts(a, b, c0, c).py()?))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyTwoLayerNet(adversary::TwoLayerNet::load(path).py()?))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.0.save(path).py()
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k()
    }

    fn __call__(&self, t: Vec<f64>) -> PyResult<f64> {
        self.0.forward(&t).py()
    }

    #[pyo3(signature = (ds, loss = "squared"))]
    fn empirical_loss(&self, py: Python<'_>, ds: &PyDataset, loss: &str) -> PyResult<f64> {
        let loss = parse_loss(loss)?;
        py.detach(|| adversary::empirical_loss(&self.0, &ds.0, loss)).py()
    }
}

/// Trains `cfg.restarts` networks of width `k`; returns
/// `(best_net, best_loss, per_restart_losses)`.
#[pyfunction]
#[pyo3(signature = (ds, k, cfg = None))]
fn train_erm(py: Python<'_>, ds: &PyDataset, k: usize, cfg: Option<PyTrainConfig>) -> PyResult<(PyTwoLayerNet, f64, Vec<Option<f64>>)> {
    let cfg = cfg.unwrap_or_default().to_core()?;
    let r = py.detach(|| adversary::train_erm(&ds.0, k, &cfg)).py()?;
    Ok((PyTwoLayerNet(r.best_net), r.best_empirical_loss, r.per_restart_losses))
}

#[pyfunction]
#[pyo3(signature = (mu, r = 3.0))]
fn minimal_true_loss(mu: f64, r: f64) -> PyResult<f64> {
    analytic::minimal_true_loss(&MixtureParams::new(mu, r).py()?, &QuadratureSpec::default()).py()
}

#[pyfunction]
fn barron_constant_numeric(mu: f64) -> PyResult<f64> {
    analytic::barron_constant_numeric(mu, &QuadratureSpec::default()).py()
}

#[pyfunction]
fn representation_bound(delta: f64, n: u64, k: u64, c_eta: f64, diam: f64) -> PyResult<f64> {
    Ok(analytic::representation_bound(&BoundIngredients::new(delta, n, k, c_eta, diam).py()?))
}

#[pyfunction]
fn classification_sq_bound(delta: f64, n: u64) -> PyResult<f64> {
    analytic::classification_sq_bound(delta, n).py()
}

#[pyfunction]
fn classification_log_bound(delta: f64, n: u64, d: u64) -> PyResult<f64> {
    analytic::classification_log_bound(delta, n, d).py()
}

#[pyfunction]
fn weissman_radius(delta: f64, n: u64, d: u64) -> PyResult<f64> {
    analytic::weissman_radius(delta, n, d).py()
}

#[pyfunction]
fn alhejji_smith_gap(theta: f64, alphabet_size: u64) -> PyResult<f64> {
    analytic::alhejji_smith_gap(theta, alphabet_size).py()
}

#[pyfunction]
fn binary_entropy(x: f64) -> PyResult<f64> {
    analytic::binary_entropy(x).py()
}

/// Plug-in `H(S | T)` in nats of a classification dataset.
#[pyfunction]
fn plugin_conditional_entropy(ds: &PyDataset) -> PyResult<f64> {
    Ok(finitealpha::plugin_conditional_entropy(&finitealpha::histogram(&ds.0).py()?))
}

/// `(value, argmin)` of the exact empirical minimizer.
#[pyfunction]
#[pyo3(signature = (ds, loss = "squared"))]
fn min_empirical_loss_classification(ds: &PyDataset, loss: &str) -> PyResult<(f64, Vec<f64>)> {
    let hist = finitealpha::histogram(&ds.0).py()?;
    Ok(finitealpha::min_empirical_loss_classification(&hist, parse_loss(loss)?))
}

/// Audit result; `to_json()` gives the full report.
#[pyclass(name = "AuditReport", module = "leakcert_py", frozen)]
struct PyAuditReport(audit::AuditReport);

#[pymethods]
impl PyAuditReport {
    #[getter]
    fn empirical_loss(&self) -> f64 {
        self.0.empirical_loss
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon
    }

    #[getter]
    fn certified_lower_bound(&self) -> f64 {
        self.0.certified_lower_bound
    }

    #[getter]
    fn reference_true_loss(&self) -> Option<f64> {
        self.0.reference_true_loss
    }

    #[getter]
    fn verdict(&self) -> String {
        self.0.verdict.to_string()
    }

    #[getter]
    fn exit_code(&self) -> i32 {
        self.0.verdict.exit_code()
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().py()
    }

    fn __repr__(&self) -> String {
        format!("AuditReport(verdict={}, certified_lower_bound={})", self.0.verdict, self.0.certified_lower_bound)
    }
}

fn policy(threshold: Option<f64>, loss: Loss) -> PyResult<VerdictPolicy> {
    threshold.map_or(Ok(VerdictPolicy::default_for(loss)), |t| VerdictPolicy::new(t, loss).py())
}

#[pyfunction]
#[pyo3(signature = (ds, k, c_eta, diam, delta, cfg = None, threshold = None))]
#[allow(clippy::too_many_arguments)]
fn certify_representation(
    py: Python<'_>,
    ds: &PyDataset,
    k: usize,
    c_eta: f64,
    diam: f64,
    delta: f64,
    cfg: Option<PyTrainConfig>,
    threshold: Option<f64>,
) -> PyResult<PyAuditReport> {
    let cfg = cfg.unwrap_or_default().to_core()?;
    let policy = policy(threshold, Loss::Squared)?;
    let report = py.detach(|| audit::certify_representation(&ds.0, k, &cfg, c_eta, diam, delta, &policy)).py()?;
    Ok(PyAuditReport(report))
}

#[pyfunction]
#[pyo3(signature = (ds, d, delta, loss = "squared", threshold = None))]
fn certify_classification(ds: &PyDataset, d: usize, delta: f64, loss: &str, threshold: Option<f64>) -> PyResult<PyAuditReport> {
    let loss = parse_loss(loss)?;
    let report = audit::certify_classification(&ds.0, d, delta, loss, &policy(threshold, loss)?).py()?;
    Ok(PyAuditReport(report))
}

/// Runs the sweep described by a JSON config (absent fields take defaults);
/// returns the rows as a JSON string.
#[pyfunction]
fn run_sweep(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let cfg: harness::SweepConfig = serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let out = py.detach(|| harness::run_sweep(&cfg)).py()?;
    serde_json::to_string(&out.rows).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Runs the self-test suites; returns `[(name, passed, detail)]`.
#[pyfunction]
#[pyo3(signature = (quick = true, seed = 0))]
fn selftest(py: Python<'_>, quick: bool, seed: u64) -> Vec<(String, bool, String)> {
    py.detach(|| harness::selftest(SelftestOptions { quick, seed }))
        .checks
        .into_iter()
        .map(|c| (c.name, c.passed, c.detail))
        .collect()
}

#[pymodule]
fn leakcert_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyTrainConfig>()?;
    m.add_class::<PyTwoLayerNet>()?;
    m.add_class::<PyAuditReport>()?;
    m.add_function(wrap_pyfunction!(train_erm, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_true_loss, m)?)?;
    m.add_function(wrap_pyfunction!(barron_constant_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(representation_bound, m)?)?;
    m.add_function(wrap_pyfunction!(classification_sq_bound, m)?)?;
    m.add_function(wrap_pyfunction!(classification_log_bound, m)?)?;
    m.add_function(wrap_pyfunction!(weissman_radius, m)?)?;
    m.add_function(wrap_pyfunction!(alhejji_smith_gap, m)?)?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(plugin_conditional_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(min_empirical_loss_classification, m)?)?;
    m.add_function(wrap_pyfunction!(certify_representation, m)?)?;
    m.add_function(wrap_pyfunction!(certify_classification, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
