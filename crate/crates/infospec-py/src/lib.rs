//! Python bindings: a `Problem` class mirroring the library's testing
//! problems plus module functions for the finite-blocklength oracles.  All
//! rates and exponents cross the boundary in the problem's configured
//! logarithm units, exactly as the command-line front end reports them.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use infospec::cli::RunConfig;
use infospec::exponents::{
    evaluate_query, r_e_coding, sigma_from_eta, spectral_inf_divergence, ExponentKind,
    ExponentQuery, ExponentResult, MethodHint,
};
use infospec::ldp::eta_for_problem;
use infospec::models::{
    check_theorem4_assumptions, FiniteDistribution, GaussianMeanShiftPair, MarkovPair, MixedPair,
    StepSpectrumModel, TestingProblem,
};
use infospec::oracle;

fn err(e: infospec::Error) -> PyErr {
    let message = e.to_string();
    match e.exit_code() {
        2 => PyValueError::new_err(message),
        _ => PyRuntimeError::new_err(message),
    }
}

fn dist(masses: Vec<f64>) -> PyResult<FiniteDistribution> {
    FiniteDistribution::new(masses).map_err(err)
}

fn parse_kind(kind: &str) -> PyResult<ExponentKind> {
    ExponentKind::parse(kind).map_err(err)
}

fn parse_method(method: Option<&str>) -> PyResult<MethodHint> {
    match method {
        None => Ok(MethodHint::Auto),
        Some(token) => MethodHint::parse(token).map_err(err),
    }
}

fn result_dict<'py>(
    py: Python<'py>,
    result: &ExponentResult,
    scale: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("value", result.value * scale)?;
    out.set_item("minimizing_R", result.minimizing_r.map(|x| x * scale))?;
    out.set_item("attainment", result.diagnostics.attainment.label())?;
    out.set_item("method", result.method.label())?;
    Ok(out)
}

/// A null/alternative pair with a fixed logarithm base for inputs and
/// outputs.
#[pyclass(frozen)]
struct Problem {
    inner: TestingProblem,
}

impl Problem {
    fn scale(&self) -> f64 {
        self.inner.output_scale()
    }

    fn to_nats(&self) -> f64 {
        self.inner.input_scale()
    }
}

#[pymethods]
impl Problem {
    /// Memoryless null against a memoryless alternative.
    #[staticmethod]
    fn iid(null: Vec<f64>, alternative: Vec<f64>) -> PyResult<Self> {
        let inner = TestingProblem::iid(dist(null)?, dist(alternative)?).map_err(err)?;
        Ok(Problem { inner })
    }

    /// Memoryless null against the counting measure, the source-coding
    /// reduction's alternative.
    #[staticmethod]
    fn iid_vs_counting(masses: Vec<f64>) -> PyResult<Self> {
        let inner = TestingProblem::iid_vs_counting(dist(masses)?).map_err(err)?;
        Ok(Problem { inner })
    }

    /// Irreducible Markov null against an irreducible Markov alternative,
    /// both given as row-stochastic transition matrices.
    #[staticmethod]
    fn markov(null_kernel: Vec<Vec<f64>>, alt_kernel: Vec<Vec<f64>>) -> PyResult<Self> {
        let pair = MarkovPair::new(null_kernel, alt_kernel).map_err(err)?;
        let inner = TestingProblem::markov(pair).map_err(err)?;
        Ok(Problem { inner })
    }

    /// Unit-variance-ratio Gaussian mean shift.
    #[staticmethod]
    fn gaussian(mean_null: f64, mean_alt: f64, sigma: f64) -> PyResult<Self> {
        let pair = GaussianMeanShiftPair::new(mean_null, mean_alt, sigma).map_err(err)?;
        let inner = TestingProblem::gaussian(pair).map_err(err)?;
        Ok(Problem { inner })
    }

    /// Non-ergodic staircase-spectrum source against its uniform
    /// alternative; `log_base` fixes both the spectrum units and the
    /// reporting units.
    #[staticmethod]
    #[pyo3(signature = (alpha, log_base=2.0))]
    fn step(alpha: f64, log_base: f64) -> PyResult<Self> {
        let model = StepSpectrumModel::new(alpha, log_base).map_err(err)?;
        let inner = TestingProblem::step(model).map_err(err)?;
        Ok(Problem { inner })
    }

    /// Equal-alphabet two-component mixture null against a memoryless
    /// alternative.
    #[staticmethod]
    fn mixed(
        component_a: Vec<f64>,
        component_b: Vec<f64>,
        weight_a: f64,
        weight_b: f64,
        alternative: Vec<f64>,
    ) -> PyResult<Self> {
        let mix = MixedPair::iid(dist(component_a)?, dist(component_b)?, weight_a, weight_b)
            .map_err(err)?;
        let inner = TestingProblem::mixed(mix, dist(alternative)?).map_err(err)?;
        Ok(Problem { inner })
    }

    /// Build from the JSON configuration schema the command-line tool
    /// accepts (`version`, `null`, `alternative`, `log_base`).
    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        let config = RunConfig::from_json(text).map_err(err)?;
        let inner = config.problem(None).map_err(err)?;
        Ok(Problem { inner })
    }

    /// Same problem reporting in a different logarithm base.
    fn with_log_base(&self, base: f64) -> PyResult<Self> {
        let inner = self.inner.clone().with_log_base(base).map_err(err)?;
        Ok(Problem { inner })
    }

    #[getter]
    fn log_base(&self) -> f64 {
        self.inner.log_base()
    }

    /// Optimal exponent of the requested kind at rate constraint `r`:
    /// `"error"`, `"correct"`, or `"coding"`.
    #[pyo3(signature = (kind, r, method=None))]
    fn exponent<'py>(
        &self,
        py: Python<'py>,
        kind: &str,
        r: f64,
        method: Option<&str>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let query = ExponentQuery::new(parse_kind(kind)?, r * self.to_nats())
            .with_method(parse_method(method)?);
        let result = evaluate_query(&self.inner, &query).map_err(err)?;
        result_dict(py, &result, self.scale())
    }

    /// Exponents over a list of rate constraints; each entry carries its
    /// `r` alongside the fields `exponent` returns.
    #[pyo3(signature = (kind, rs, method=None))]
    fn sweep<'py>(
        &self,
        py: Python<'py>,
        kind: &str,
        rs: Vec<f64>,
        method: Option<&str>,
    ) -> PyResult<Bound<'py, PyList>> {
        let kind = parse_kind(kind)?;
        let method = parse_method(method)?;
        let out = PyList::empty(py);
        for r in rs {
            let query = ExponentQuery::new(kind, r * self.to_nats()).with_method(method);
            let result = evaluate_query(&self.inner, &query).map_err(err)?;
            let row = result_dict(py, &result, self.scale())?;
            row.set_item("r", r)?;
            out.append(row)?;
        }
        Ok(out)
    }

    /// Support conditions guarding the correct-decoding exponent.
    fn check_assumptions<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let report = check_theorem4_assumptions(&self.inner).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("passed", report.passed)?;
        out.set_item("witness", report.witness)?;
        out.set_item("detail", report.detail)?;
        out.set_item("probability_alternative", report.probability_alternative)?;
        out.set_item(
            "total_mass_exponent",
            report.total_mass_exponent * self.scale(),
        )?;
        Ok(out)
    }

    /// The divergence rate the spectrum concentrates at; error exponents
    /// vanish above it.
    fn spectral_inf_divergence(&self) -> PyResult<f64> {
        Ok(spectral_inf_divergence(&self.inner).map_err(err)? * self.scale())
    }

    /// Lower-tail decay exponent of the divergence spectrum at `r`.
    fn eta(&self, r: f64) -> PyResult<f64> {
        let eta = eta_for_problem(&self.inner).map_err(err)?;
        Ok(eta.value(r * self.to_nats()).map_err(err)? * self.scale())
    }

    fn fingerprint(&self) -> String {
        format!("{:016x}", self.inner.fingerprint())
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(fingerprint={}, log_base={})",
            self.fingerprint(),
            self.inner.log_base()
        )
    }
}

/// Fixed-length coding rate of the problem's null source sustaining error
/// decay `r`.
#[pyfunction]
#[pyo3(signature = (problem, r, method=None))]
fn coding_exponent<'py>(
    py: Python<'py>,
    problem: &Problem,
    r: f64,
    method: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let result = r_e_coding(
        problem.inner.null(),
        r * problem.to_nats(),
        parse_method(method)?,
    )
    .map_err(err)?;
    result_dict(py, &result, problem.scale())
}

/// Largest error-decay exponent compatible with coding the problem's null
/// source at rate `rate`.
#[pyfunction]
fn coding_sigma(problem: &Problem, rate: f64) -> PyResult<f64> {
    let counting = infospec::exponents::counting_problem(problem.inner.null()).map_err(err)?;
    let eta = eta_for_problem(&counting).map_err(err)?;
    let value = sigma_from_eta(&eta, rate * problem.to_nats()).map_err(err)?;
    Ok(value * problem.scale())
}

/// Exact Neyman-Pearson trade-off at blocklength `n`: the deterministic
/// frontier of (null rejection mass, alternative acceptance mass) pairs.
#[pyfunction]
fn np_tradeoff<'py>(py: Python<'py>, problem: &Problem, n: usize) -> PyResult<Bound<'py, PyDict>> {
    let tradeoff = oracle::np_tradeoff(&problem.inner, n).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("n", n)?;
    out.set_item("kappa", tradeoff.kappa())?;
    out.set_item("blocks", tradeoff.blocks().len())?;
    out.set_item("frontier", tradeoff.frontier())?;
    Ok(out)
}

/// Finite-blocklength exponent readings at rejection budget `exp(-n r)`.
#[pyfunction]
fn finite_n_exponents<'py>(
    py: Python<'py>,
    problem: &Problem,
    n: usize,
    r: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let fin = oracle::finite_n_exponents(&problem.inner, n, r * problem.to_nats()).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("n", n)?;
    out.set_item("r", r)?;
    out.set_item("mu_budget", fin.mu_budget)?;
    out.set_item("lambda", fin.lambda)?;
    out.set_item("kappa", fin.kappa)?;
    out.set_item("error_exponent", fin.error_exponent * problem.scale())?;
    out.set_item("correct_exponent", fin.correct_exponent * problem.scale())?;
    Ok(out)
}

/// Least-error fixed-length codebook of `size` words for the problem's null
/// source at blocklength `n`.
#[pyfunction]
fn best_code<'py>(
    py: Python<'py>,
    problem: &Problem,
    n: usize,
    size: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let code = oracle::best_fixed_length_code(problem.inner.null(), n, size).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("n", n)?;
    out.set_item("size", size)?;
    out.set_item("error", code.error)?;
    out.set_item("words", code.words)?;
    Ok(out)
}

/// Monte Carlo estimate of the spectrum's lower-tail exponent at each point
/// of `points`, with conservative confidence bands.
#[pyfunction]
fn mc_spectrum<'py>(
    py: Python<'py>,
    problem: &Problem,
    n: usize,
    samples: usize,
    seed: u64,
    points: Vec<f64>,
) -> PyResult<Bound<'py, PyList>> {
    let estimate = oracle::mc_spectrum(&problem.inner, n, samples, seed).map_err(err)?;
    let out = PyList::empty(py);
    for x in points {
        let nats = x * problem.to_nats();
        let (lo, hi) = estimate.eta_band(nats);
        let row = PyDict::new(py);
        row.set_item("R", x)?;
        row.set_item("eta_hat", estimate.eta_hat(nats) * problem.scale())?;
        row.set_item("band_lo", lo * problem.scale())?;
        row.set_item("band_hi", hi * problem.scale())?;
        out.append(row)?;
    }
    Ok(out)
}

#[pymodule]
fn infospec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_function(wrap_pyfunction!(coding_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(coding_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(np_tradeoff, m)?)?;
    m.add_function(wrap_pyfunction!(finite_n_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(best_code, m)?)?;
    m.add_function(wrap_pyfunction!(mc_spectrum, m)?)?;
    Ok(())
}
