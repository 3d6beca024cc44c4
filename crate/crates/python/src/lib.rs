//! Python bindings: bit vectors, the GF(2) solver, parameter formulas,
//! single learning runs and the experiment engine.

use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;

use pacf2::harness::{self, ExperimentConfig, Format, Lemma1Family};
use pacf2::learner::{estimate_error, learn, paper_params as core_paper_params, LearnParams};
use pacf2::linalg::{self, BitMatrix, BitVector};
use pacf2::oracles::{ExampleOracle, FeatureMap, InputDistribution, NoisyFeatureOracle, OwpInstance};
use pacf2::reduction::{reduction_params as core_reduction_params, ReductionParams};
use pacf2::rng::stream;

fn py_err(e: pacf2::Error) -> PyErr {
    match e {
        pacf2::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Immutable bit vector over GF(2).
#[pyclass(name = "BitVector", module = "pacf2", eq, hash, frozen, from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyBitVector(BitVector);

#[pymethods]
impl PyBitVector {
    /// From a sequence of bits, index 0 first.
    #[new]
    fn new(bits: Vec<bool>) -> Self {
        Self(BitVector::from_bits(bits))
    }

    #[staticmethod]
    fn zeros(n: usize) -> Self {
        Self(BitVector::zeros(n))
    }

    #[staticmethod]
    fn basis(n: usize, i: usize) -> PyResult<Self> {
        if i >= n {
            return Err(PyIndexError::new_err(format!("basis index {i} out of range for length {n}")));
        }
        Ok(Self(BitVector::basis(n, i)))
    }

    #[staticmethod]
    fn from_int(n: usize, value: u64) -> Self {
        Self(BitVector::from_u64(n, value))
    }

    #[staticmethod]
    fn from_hex(n: usize, hex: &str) -> PyResult<Self> {
        BitVector::from_hex(n, hex).map(Self).map_err(py_err)
    }

    /// Parses the `<len>:<hex>` form.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        text.parse().map(Self).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __getitem__(&self, i: usize) -> PyResult<bool> {
        if i >= self.0.len() {
            return Err(PyIndexError::new_err(i));
        }
        Ok(self.0.get(i))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("BitVector.parse('{}')", self.0)
    }

    fn __xor__(&self, other: &Self) -> PyResult<Self> {
        self.0.xor(&other.0).map(Self).map_err(py_err)
    }

    fn bits(&self) -> Vec<bool> {
        self.0.iter().collect()
    }

    fn to_hex(&self) -> String {
        self.0.to_hex()
    }

    fn count_ones(&self) -> usize {
        self.0.count_ones()
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Inner product over GF(2).
    fn dot(&self, other: &Self) -> PyResult<bool> {
        self.0.dot(&other.0).map_err(py_err)
    }
}

/// Dense GF(2) matrix stored as rows.
#[pyclass(name = "BitMatrix", module = "pacf2", frozen, from_py_object)]
#[derive(Clone)]
struct PyBitMatrix(BitMatrix);

#[pymethods]
impl PyBitMatrix {
    #[new]
    fn new(cols: usize, rows: Vec<PyBitVector>) -> PyResult<Self> {
        BitMatrix::new(cols, rows.into_iter().map(|r| r.0).collect())
            .map(Self)
            .map_err(py_err)
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self(BitMatrix::identity(n))
    }

    #[staticmethod]
    fn random(rows: usize, cols: usize, seed: u64) -> Self {
        Self(BitMatrix::random(rows, cols, &mut stream(seed, 0)))
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.rows(), self.0.cols())
    }

    fn rows(&self) -> Vec<PyBitVector> {
        self.0.row_vectors().iter().cloned().map(PyBitVector).collect()
    }

    fn rank(&self) -> usize {
        self.0.rank()
    }

    /// `M . s`.
    fn mul_vec(&self, s: &PyBitVector) -> PyResult<PyBitVector> {
        self.0.mul_vec(&s.0).map(PyBitVector).map_err(py_err)
    }
}

#[pyclass(name = "SolveOutcome", module = "pacf2", frozen, get_all, skip_from_py_object)]
struct PySolveOutcome {
    consistent: bool,
    particular: Option<PyBitVector>,
    rank: usize,
    free_columns: Vec<usize>,
    solution_count: u128,
}

#[pyfunction]
fn inner_product(a: &PyBitVector, b: &PyBitVector) -> PyResult<bool> {
    linalg::inner_product(&a.0, &b.0).map_err(py_err)
}

#[pyfunction]
fn solve_f2(m: &PyBitMatrix, rhs: &PyBitVector) -> PyResult<PySolveOutcome> {
    let out = linalg::solve_f2(&m.0, &rhs.0).map_err(py_err)?;
    Ok(PySolveOutcome {
        consistent: out.consistent,
        solution_count: if out.consistent { out.solution_count(m.0.cols()) } else { 0 },
        particular: out.particular.map(PyBitVector),
        rank: out.rank,
        free_columns: out.free_columns,
    })
}

/// Every solution, by enumeration; at most 20 columns.
#[pyfunction]
fn brute_force_solutions(m: &PyBitMatrix, rhs: &PyBitVector) -> PyResult<Vec<PyBitVector>> {
    let all = linalg::brute_force_solutions(&m.0, &rhs.0).map_err(py_err)?;
    Ok(all.into_iter().map(PyBitVector).collect())
}

#[pyfunction]
fn in_span(m: &PyBitMatrix, y: &PyBitVector) -> PyResult<bool> {
    linalg::in_span(&m.0, &y.0).map_err(py_err)
}

#[pyclass(name = "LearnParams", module = "pacf2", frozen, get_all, skip_from_py_object)]
struct PyLearnParams {
    d: usize,
    epsilon: f64,
    delta: f64,
    m: usize,
    mu: f64,
    nu: f64,
}

impl From<LearnParams> for PyLearnParams {
    fn from(p: LearnParams) -> Self {
        Self {
            d: p.d,
            epsilon: p.epsilon,
            delta: p.delta,
            m: p.m,
            mu: p.mu,
            nu: p.nu,
        }
    }
}

#[pymethods]
impl PyLearnParams {
    fn __repr__(&self) -> String {
        format!("LearnParams(d={}, m={}, mu={}, nu={})", self.d, self.m, self.mu, self.nu)
    }
}

#[pyclass(name = "ReductionParams", module = "pacf2", frozen, get_all, skip_from_py_object)]
struct PyReductionParams {
    d: usize,
    mu: f64,
    nu: f64,
    eps_learn: f64,
    delta_learn: f64,
    eps_eval: f64,
    delta_eval: f64,
}

impl From<ReductionParams> for PyReductionParams {
    fn from(p: ReductionParams) -> Self {
        Self {
            d: p.d,
            mu: p.mu,
            nu: p.nu,
            eps_learn: p.eps_learn,
            delta_learn: p.delta_learn,
            eps_eval: p.eps_eval,
            delta_eval: p.delta_eval,
        }
    }
}

#[pyfunction]
fn paper_params(d: usize, epsilon: f64, delta: f64) -> PyResult<PyLearnParams> {
    core_paper_params(d, epsilon, delta).map(Into::into).map_err(py_err)
}

#[pyfunction]
fn reduction_params(d: usize, mu: f64, nu: f64) -> PyResult<PyReductionParams> {
    core_reduction_params(d, mu, nu).map(Into::into).map_err(py_err)
}

/// Exact feature map `f: F_2^n -> F_2^d`.
#[pyclass(name = "FeatureMap", module = "pacf2", frozen, skip_from_py_object)]
struct PyFeatureMap(Arc<FeatureMap>);

#[pymethods]
impl PyFeatureMap {
    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self(Arc::new(FeatureMap::identity(n)))
    }

    /// `x -> x^T G` for an `n x d` generator.
    #[staticmethod]
    fn linear(generator: &PyBitMatrix) -> Self {
        Self(Arc::new(FeatureMap::linear(generator.0.clone())))
    }

    /// Inverse of `y -> g^y mod p`.
    #[staticmethod]
    fn modexp_inverse(p: u64, g: u64) -> PyResult<Self> {
        let inst = OwpInstance::modexp(p, g).map_err(py_err)?;
        FeatureMap::owp_inverse(inst).map(|m| Self(Arc::new(m))).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.d()
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id().to_string()
    }

    fn __call__(&self, x: &PyBitVector) -> PyResult<PyBitVector> {
        self.0.exact_feature(&x.0).map(PyBitVector).map_err(py_err)
    }
}

/// One learning run under the uniform distribution on `F_2^n` with `paper_params`
/// sizing. Returns the learned parameter (or `None` if the system was
/// inconsistent) and its exact error.
#[pyfunction]
#[pyo3(signature = (feature_map, secret, epsilon, delta, seed, noisy = true))]
fn learn_once(
    feature_map: &PyFeatureMap,
    secret: &PyBitVector,
    epsilon: f64,
    delta: f64,
    seed: u64,
    noisy: bool,
) -> PyResult<(Option<PyBitVector>, f64)> {
    let map = feature_map.0.clone();
    let dist = Arc::new(InputDistribution::uniform(map.n()).map_err(py_err)?);
    let params = core_paper_params(map.d(), epsilon, delta).map_err(py_err)?;
    let mut rng = stream(seed, 0);
    let oracle = if noisy {
        NoisyFeatureOracle::new(map.clone(), &dist, params.mu, params.nu, seed).map_err(py_err)?
    } else {
        NoisyFeatureOracle::noiseless(map.clone())
    };
    let ex = ExampleOracle::new(dist.clone(), map.clone(), secret.0.clone()).map_err(py_err)?;
    match learn(&params, &ex, &oracle, &mut rng) {
        Ok(h) => {
            let err = estimate_error(&h, &secret.0, &map, &dist, 100_000, &mut rng).map_err(py_err)?;
            Ok((Some(PyBitVector(h.param)), err))
        }
        Err(pacf2::Error::Learn(_)) => Ok((None, 1.0)),
        Err(e) => Err(py_err(e)),
    }
}

/// `(family, m, trials, failures, empirical, bound, violated)`.
type Lemma1Row = (String, usize, usize, usize, f64, f64, bool);

/// One row per `(family, m)` cell of the span-bound check.
#[pyfunction]
#[pyo3(signature = (d, m_values, families, trials, master_seed, workers = 1))]
fn verify_lemma1(
    d: usize,
    m_values: Vec<usize>,
    families: Vec<String>,
    trials: usize,
    master_seed: u64,
    workers: usize,
) -> PyResult<Vec<Lemma1Row>> {
    let families = families
        .iter()
        .map(|f| f.parse::<Lemma1Family>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(py_err)?;
    let report = harness::verify_lemma1(d, &m_values, &families, trials, master_seed, workers).map_err(py_err)?;
    Ok(report
        .rows
        .into_iter()
        .map(|r| (r.family, r.m, r.trials, r.failures, r.empirical_fail, r.bound, r.violated))
        .collect())
}

/// Runs an experiment from TOML text and returns `(report, passed)` where
/// `report` is CSV or JSON text.
#[pyfunction]
#[pyo3(signature = (config, format = "json"))]
fn run_experiment(py: Python<'_>, config: &str, format: &str) -> PyResult<(String, bool)> {
    let cfg = ExperimentConfig::from_toml(config).map_err(py_err)?;
    let format: Format = format.parse().map_err(py_err)?;
    let report = py.detach(|| harness::run(&cfg)).map_err(py_err)?;
    let mut out = Vec::new();
    harness::emit_report(&report, format, false, &mut out).map_err(py_err)?;
    Ok((String::from_utf8(out).expect("reports are utf-8"), report.passed()))
}

#[pymodule]
#[pyo3(name = "pacf2")]
fn pacf2_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBitVector>()?;
    m.add_class::<PyBitMatrix>()?;
    m.add_class::<PySolveOutcome>()?;
    m.add_class::<PyLearnParams>()?;
    m.add_class::<PyReductionParams>()?;
    m.add_class::<PyFeatureMap>()?;
    m.add_function(wrap_pyfunction!(inner_product, m)?)?;
    m.add_function(wrap_pyfunction!(solve_f2, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_solutions, m)?)?;
    m.add_function(wrap_pyfunction!(in_span, m)?)?;
    m.add_function(wrap_pyfunction!(paper_params, m)?)?;
    m.add_function(wrap_pyfunction!(reduction_params, m)?)?;
    m.add_function(wrap_pyfunction!(learn_once, m)?)?;
    m.add_function(wrap_pyfunction!(verify_lemma1, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
