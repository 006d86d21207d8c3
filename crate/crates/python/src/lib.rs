//! Python module `dimwit`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use dimwit_core::bellfmt;
use dimwit_core::catalog::{self, Verdict};
use dimwit_core::grothendieck::{self, CorrelationFunctional};
use dimwit_core::linalg::{Complex64, ComplexMatrix, Party};
use dimwit_core::localbound;
use dimwit_core::scenario::{self, MarginalPolicy, Povm, ProbabilityTable};
use dimwit_core::seesaw::{self, SeesawConfig};

type Rows = Vec<Vec<Complex64>>;
type VectorRun = (f64, Vec<Vec<f64>>, Vec<Vec<f64>>);

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: &Rows) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("POVM elements must be square"));
    }
    ComplexMatrix::new(n, n, rows.concat()).map_err(value_error)
}

fn from_matrix(m: &ComplexMatrix) -> Rows {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn to_povms(settings: &[Vec<Rows>]) -> PyResult<Vec<Povm>> {
    settings
        .iter()
        .map(|povm| povm.iter().map(to_matrix).collect())
        .collect()
}

/// Linear functional on probability tables of a two-party Bell scenario.
#[pyclass(name = "BellFunctional", module = "dimwit", frozen)]
struct PyBellFunctional {
    inner: scenario::BellFunctional,
}

#[pymethods]
impl PyBellFunctional {
    /// Parses `.bell` text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let inner = bellfmt::parse_functional(text).map_err(value_error)?;
        Ok(Self { inner })
    }

    /// A named catalog entry: `cglmp-c`, `cglmp-d`, `E`, `chsh` or `iphi:<phi>`.
    #[staticmethod]
    fn from_catalog(name: &str) -> PyResult<Self> {
        let inner = catalog::by_name(name).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[getter]
    fn scenario(&self) -> String {
        self.inner.scenario().describe()
    }

    #[getter]
    fn outcomes_a(&self) -> Vec<usize> {
        self.inner.scenario().outcomes_a().to_vec()
    }

    #[getter]
    fn outcomes_b(&self) -> Vec<usize> {
        self.inner.scenario().outcomes_b().to_vec()
    }

    #[getter]
    fn constant(&self) -> f64 {
        self.inner.constant()
    }

    fn joint(&self, x: usize, y: usize, a: usize, b: usize) -> PyResult<f64> {
        if !self.inner.scenario().contains_joint(x, y, a, b) {
            return Err(PyValueError::new_err("index outside the scenario"));
        }
        Ok(self.inner.joint(x, y, a, b))
    }

    /// Canonical `.bell` text.
    fn to_bell(&self) -> String {
        bellfmt::serialize_functional(&self.inner)
    }

    /// `(value, assignment_a, assignment_b)` for an optimal deterministic strategy.
    fn local_bound(&self, py: Python<'_>) -> PyResult<(f64, Vec<usize>, Vec<usize>)> {
        let (v, s) = py
            .detach(|| localbound::local_bound(&self.inner))
            .map_err(value_error)?;
        Ok((v, s.assignment_a, s.assignment_b))
    }

    /// Value on a probability table given as `x,y,a,b,p` CSV text.
    #[pyo3(signature = (table_csv, marginals = "partner-zero"))]
    fn evaluate(&self, table_csv: &str, marginals: &str) -> PyResult<f64> {
        let policy = match marginals {
            "partner-zero" => MarginalPolicy::PartnerSettingZero,
            "average" => MarginalPolicy::Average,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown marginal policy `{other}`"
                )))
            }
        };
        let table =
            ProbabilityTable::from_csv(table_csv, self.inner.scenario()).map_err(value_error)?;
        scenario::evaluate(&self.inner, &table, policy).map_err(value_error)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "BellFunctional(scenario='{}')",
            self.inner.scenario().describe()
        )
    }
}

/// State on `C^dA ⊗ C^dB` with one POVM per setting on each side.
#[pyclass(name = "QuantumModel", module = "dimwit", frozen)]
struct PyQuantumModel {
    inner: scenario::QuantumModel,
}

#[pymethods]
impl PyQuantumModel {
    /// `povms_a[x][a]` is a `dim_a × dim_a` matrix given as nested lists of complex numbers.
    #[new]
    fn new(
        dim_a: usize,
        dim_b: usize,
        state: Vec<Complex64>,
        povms_a: Vec<Vec<Rows>>,
        povms_b: Vec<Vec<Rows>>,
    ) -> PyResult<Self> {
        let inner = scenario::QuantumModel::new(
            dim_a,
            dim_b,
            state,
            to_povms(&povms_a)?,
            to_povms(&povms_b)?,
        )
        .map_err(value_error)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dim_a(&self) -> usize {
        self.inner.dim_a()
    }

    #[getter]
    fn dim_b(&self) -> usize {
        self.inner.dim_b()
    }

    #[getter]
    fn state(&self) -> Vec<Complex64> {
        self.inner.state().to_vec()
    }

    #[getter]
    fn povms_a(&self) -> Vec<Vec<Rows>> {
        self.povms(Party::A)
    }

    #[getter]
    fn povms_b(&self) -> Vec<Vec<Rows>> {
        self.povms(Party::B)
    }

    /// `<ψ|B|ψ>` for the functional's Bell operator `B`.
    fn value(&self, f: &PyBellFunctional) -> PyResult<f64> {
        scenario::model_value(&f.inner, &self.inner).map_err(value_error)
    }

    /// The model's probability table as `x,y,a,b,p` CSV text.
    fn table_csv(&self) -> PyResult<String> {
        Ok(scenario::table_of(&self.inner)
            .map_err(value_error)?
            .to_csv())
    }
}

impl PyQuantumModel {
    fn povms(&self, party: Party) -> Vec<Vec<Rows>> {
        self.inner
            .povms(party)
            .iter()
            .map(|povm| povm.iter().map(from_matrix).collect())
            .collect()
    }
}

#[pyclass(name = "SeesawResult", module = "dimwit", frozen, get_all)]
struct PySeesawResult {
    best_value: f64,
    best_restart: usize,
    /// `None` for restarts that failed.
    restart_values: Vec<Option<f64>>,
    iterations: Vec<usize>,
    converged: Vec<bool>,
    best_model: Py<PyQuantumModel>,
}

#[pymethods]
impl PySeesawResult {
    fn __repr__(&self) -> String {
        format!(
            "SeesawResult(best_value={}, best_restart={}, restarts={})",
            self.best_value,
            self.best_restart,
            self.restart_values.len()
        )
    }
}

/// Best-found value of `f` over models with local dimensions `dim_a`, `dim_b`.
#[pyfunction]
#[pyo3(name = "seesaw", signature = (
    f, dim_a, dim_b, restarts = 50, seed = 0, max_iterations = 500, tol = 1e-10,
    fixed_state = None, projective_only = false, seeds = Vec::new()
))]
#[allow(clippy::too_many_arguments)]
fn see_saw(
    py: Python<'_>,
    f: &PyBellFunctional,
    dim_a: usize,
    dim_b: usize,
    restarts: usize,
    seed: u64,
    max_iterations: usize,
    tol: f64,
    fixed_state: Option<Vec<Complex64>>,
    projective_only: bool,
    seeds: Vec<PyRef<'_, PyQuantumModel>>,
) -> PyResult<PySeesawResult> {
    let cfg = SeesawConfig {
        restarts,
        seed,
        max_iterations,
        convergence_tol: tol,
        fixed_state,
        projective_only,
        ..SeesawConfig::default()
    };
    let seeds: Vec<scenario::QuantumModel> = seeds.iter().map(|m| m.inner.clone()).collect();
    let r = py
        .detach(|| seesaw::seesaw_with_seeds(&f.inner, dim_a, dim_b, &cfg, &seeds))
        .map_err(value_error)?;
    Ok(PySeesawResult {
        best_value: r.best_value,
        best_restart: r.best_restart,
        restart_values: r.restarts.iter().map(|s| s.value).collect(),
        iterations: r.iterations_used(),
        converged: r.converged_flags(),
        best_model: Py::new(
            py,
            PyQuantumModel {
                inner: r.best_model,
            },
        )?,
    })
}

#[pyclass(name = "WitnessReport", module = "dimwit", frozen, get_all)]
struct PyWitnessReport {
    functional_id: String,
    dimension: usize,
    local_bound: f64,
    value_d: f64,
    value_d_plus: f64,
    gap: f64,
    threshold: f64,
    witnessed: bool,
}

#[pymethods]
impl PyWitnessReport {
    fn __repr__(&self) -> String {
        format!(
            "WitnessReport(functional_id='{}', dimension={}, gap={}, witnessed={})",
            self.functional_id,
            self.dimension,
            self.gap,
            if self.witnessed { "True" } else { "False" }
        )
    }
}

/// Best-found values at `d` and `d + 1` compared against the local bound.
#[pyfunction]
#[pyo3(signature = (f, d = 2, restarts = 50, seed = 0, threshold = catalog::DEFAULT_GAP_THRESHOLD, functional_id = ""))]
fn witness_report(
    py: Python<'_>,
    f: &PyBellFunctional,
    d: usize,
    restarts: usize,
    seed: u64,
    threshold: f64,
    functional_id: &str,
) -> PyResult<PyWitnessReport> {
    let cfg = SeesawConfig {
        restarts,
        seed,
        ..SeesawConfig::default()
    };
    let r = py
        .detach(|| catalog::witness_report(functional_id, &f.inner, d, &cfg, threshold))
        .map_err(value_error)?;
    Ok(PyWitnessReport {
        functional_id: r.functional_id,
        dimension: r.dimension,
        local_bound: r.local_bound,
        value_d: r.value_d,
        value_d_plus: r.value_d_plus,
        gap: r.gap,
        threshold: r.threshold,
        witnessed: r.verdict == Verdict::Witnessed,
    })
}

fn correlation(rows: Vec<Vec<f64>>) -> PyResult<CorrelationFunctional> {
    CorrelationFunctional::from_rows(&rows).map_err(value_error)
}

/// `max Σ_ij M_ij x_i y_j` over signs `x, y ∈ {±1}`.
#[pyfunction]
fn local_norm(matrix: Vec<Vec<f64>>) -> PyResult<f64> {
    grothendieck::local_norm(&correlation(matrix)?).map_err(value_error)
}

/// `(value, x_vectors, y_vectors)` for unit vectors in `R^n`; the matrix is used as given.
#[pyfunction]
#[pyo3(signature = (matrix, n, restarts = 50, seed = 0))]
fn vector_seesaw(
    py: Python<'_>,
    matrix: Vec<Vec<f64>>,
    n: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<VectorRun> {
    let f = correlation(matrix)?;
    let cfg = SeesawConfig {
        restarts,
        seed,
        ..SeesawConfig::default()
    };
    let r = py
        .detach(|| grothendieck::vector_seesaw(&f, n, &cfg, &[]))
        .map_err(value_error)?;
    Ok((r.value, r.strategy.x_vectors, r.strategy.y_vectors))
}

/// `cos θ |00> + sin θ |11>`.
#[pyfunction]
fn theta_state(theta: f64) -> Vec<Complex64> {
    catalog::theta_state(theta)
}

/// `(|00> + γ|11> + |22>) / sqrt(2 + γ²)`.
#[pyfunction]
fn gamma_state(gamma: f64) -> Vec<Complex64> {
    catalog::gamma_state(gamma)
}

#[pyfunction]
fn catalog_names() -> Vec<&'static str> {
    catalog::NAMES.to_vec()
}

#[pymodule]
fn dimwit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBellFunctional>()?;
    m.add_class::<PyQuantumModel>()?;
    m.add_class::<PySeesawResult>()?;
    m.add_class::<PyWitnessReport>()?;
    m.add_function(wrap_pyfunction!(see_saw, m)?)?;
    m.add_function(wrap_pyfunction!(witness_report, m)?)?;
    m.add_function(wrap_pyfunction!(local_norm, m)?)?;
    m.add_function(wrap_pyfunction!(vector_seesaw, m)?)?;
    m.add_function(wrap_pyfunction!(theta_state, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_state, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_names, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
