//! Python bindings for the fuzzy beta regression library: fuzzy-number
//! types, the fuzzy-EM and crisp ML fitters, and the Monte Carlo harness.

use fuzzybeta as fb;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

fn pyerr(e: fb::Error) -> PyErr {
    match e {
        fb::Error::Domain(_) | fb::Error::Data(_) | fb::Error::Conversion(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_estep(s: &str) -> PyResult<fb::EStepVariant> {
    s.parse().map_err(pyerr)
}

fn parse_convention(s: &str) -> PyResult<fb::EtaNuConvention> {
    s.parse().map_err(pyerr)
}

/// Beta fuzzy number: membership is the beta kernel with mode `mode` and
/// precision `precision`, rescaled to peak at 1.
#[pyclass(frozen)]
#[derive(Clone)]
struct BetaFuzzyNumber {
    inner: fb::BetaFuzzyNumber,
}

#[pymethods]
impl BetaFuzzyNumber {
    #[new]
    fn new(mode: f64, precision: f64) -> PyResult<Self> {
        Ok(BetaFuzzyNumber {
            inner: fb::BetaFuzzyNumber::new(mode, precision).map_err(pyerr)?,
        })
    }

    #[getter]
    fn mode(&self) -> f64 {
        self.inner.mode()
    }

    #[getter]
    fn precision(&self) -> f64 {
        self.inner.precision()
    }

    fn membership(&self, y: f64) -> f64 {
        self.inner.membership(y)
    }

    fn log_membership(&self, y: f64) -> f64 {
        self.inner.log_membership(y)
    }

    /// (lower, upper) bounds of {y : membership(y) ≥ alpha}.
    fn alpha_cut(&self, alpha: f64) -> PyResult<(f64, f64)> {
        let cut = self.inner.alpha_cut(alpha).map_err(pyerr)?;
        Ok((cut.lower, cut.upper))
    }

    fn centroid(&self) -> f64 {
        self.inner.centroid()
    }

    fn first_maximum(&self) -> f64 {
        self.inner.first_maximum()
    }

    fn membership_area(&self) -> f64 {
        self.inner.membership_area()
    }

    /// Beta-kernel shape parameters (1 + m·s, 1 + s·(1−m)).
    fn shape_parameters(&self) -> (f64, f64) {
        self.inner.shape_parameters()
    }

    fn __repr__(&self) -> String {
        format!(
            "BetaFuzzyNumber(mode={}, precision={})",
            self.inner.mode(),
            self.inner.precision()
        )
    }
}

/// Trapezoidal fuzzy number on [0,1] with support [a,d] and core [b,c].
#[pyclass(frozen)]
#[derive(Clone)]
struct TrapezoidalFuzzyNumber {
    inner: fb::TrapezoidalFuzzyNumber,
}

#[pymethods]
impl TrapezoidalFuzzyNumber {
    #[new]
    fn new(a: f64, b: f64, c: f64, d: f64) -> PyResult<Self> {
        Ok(TrapezoidalFuzzyNumber {
            inner: fb::TrapezoidalFuzzyNumber::new(a, b, c, d).map_err(pyerr)?,
        })
    }

    #[getter]
    fn abscissae(&self) -> (f64, f64, f64, f64) {
        self.inner.abscissae()
    }

    fn membership(&self, y: f64) -> f64 {
        self.inner.membership(y)
    }

    fn membership_area(&self) -> f64 {
        self.inner.membership_area()
    }

    fn core_midpoint(&self) -> f64 {
        self.inner.core_midpoint()
    }

    /// The beta fuzzy number with the same mode (core midpoint) and the
    /// same membership area.
    fn to_beta(&self) -> PyResult<BetaFuzzyNumber> {
        Ok(BetaFuzzyNumber {
            inner: fb::trapezoid_to_beta(&self.inner).map_err(pyerr)?,
        })
    }

    fn __repr__(&self) -> String {
        let (a, b, c, d) = self.inner.abscissae();
        format!("TrapezoidalFuzzyNumber({a}, {b}, {c}, {d})")
    }
}

/// Completed fuzzy-EM fit.
#[pyclass(frozen)]
struct FitResult {
    #[pyo3(get)]
    beta: Vec<f64>,
    #[pyo3(get)]
    gamma: Vec<f64>,
    #[pyo3(get)]
    std_errors: Vec<f64>,
    #[pyo3(get)]
    loglik: f64,
    #[pyo3(get)]
    aic: f64,
    #[pyo3(get)]
    pseudo_r2: Option<f64>,
    #[pyo3(get)]
    residuals: Vec<f64>,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    iterations: usize,
}

#[pymethods]
impl FitResult {
    fn __repr__(&self) -> String {
        format!(
            "FitResult(beta={:?}, gamma={:?}, loglik={}, converged={})",
            self.beta, self.gamma, self.loglik, self.converged
        )
    }
}

/// Direct crisp maximum-likelihood fit.
#[pyclass(frozen)]
struct CrispFitResult {
    #[pyo3(get)]
    beta: Vec<f64>,
    #[pyo3(get)]
    gamma: Vec<f64>,
    #[pyo3(get)]
    std_errors: Vec<f64>,
    #[pyo3(get)]
    loglik: f64,
    #[pyo3(get)]
    aic: f64,
}

#[pymethods]
impl CrispFitResult {
    fn __repr__(&self) -> String {
        format!(
            "CrispFitResult(beta={:?}, gamma={:?}, loglik={})",
            self.beta, self.gamma, self.loglik
        )
    }
}

fn build_design(
    n: usize,
    mu_covariates: &[Vec<f64>],
    phi_covariates: &[Vec<f64>],
) -> PyResult<fb::DesignPair> {
    fb::DesignPair::with_intercept(n, mu_covariates, phi_covariates).map_err(pyerr)
}

/// Fit the variable-dispersion beta regression to fuzzy (mode, spread)
/// responses by fuzzy EM. Covariates are given column-wise; intercepts are
/// always included.
#[pyfunction]
#[pyo3(signature = (modes, spreads, mu_covariates=Vec::new(), phi_covariates=Vec::new(), *,
    estep="taylor", eta_nu="direct", max_em_iterations=500, loglik_tolerance=1e-8,
    param_tolerance=1e-6, compute_pseudo_r2=true))]
#[allow(clippy::too_many_arguments)]
fn fit_fuzzy_em(
    modes: Vec<f64>,
    spreads: Vec<f64>,
    mu_covariates: Vec<Vec<f64>>,
    phi_covariates: Vec<Vec<f64>>,
    estep: &str,
    eta_nu: &str,
    max_em_iterations: usize,
    loglik_tolerance: f64,
    param_tolerance: f64,
    compute_pseudo_r2: bool,
) -> PyResult<FitResult> {
    let design = build_design(modes.len(), &mu_covariates, &phi_covariates)?;
    let dataset = fb::FuzzyDataset::new(modes, spreads, design).map_err(pyerr)?;
    let cfg = fb::EmConfig {
        max_em_iterations,
        loglik_tolerance,
        param_tolerance,
        estep_variant: parse_estep(estep)?,
        eta_nu_convention: parse_convention(eta_nu)?,
        solver: fb::SolverConfig::default(),
        compute_pseudo_r2,
    };
    let fit = fb::fit_fuzzy_em(&dataset, &cfg).map_err(pyerr)?;
    Ok(FitResult {
        beta: fit.coefficients.beta.iter().copied().collect(),
        gamma: fit.coefficients.gamma.iter().copied().collect(),
        std_errors: fit.std_errors.iter().copied().collect(),
        loglik: fit.loglik_fuzzy,
        aic: fit.aic,
        pseudo_r2: fit.pseudo_r2,
        residuals: fit.residuals.iter().copied().collect(),
        converged: fit.converged,
        iterations: fit.em_trace.len(),
    })
}

/// Fit the crisp variable-dispersion beta regression by maximum likelihood.
#[pyfunction]
#[pyo3(signature = (y, mu_covariates=Vec::new(), phi_covariates=Vec::new()))]
fn fit_crisp_ml(
    y: Vec<f64>,
    mu_covariates: Vec<Vec<f64>>,
    phi_covariates: Vec<Vec<f64>>,
) -> PyResult<CrispFitResult> {
    let design = build_design(y.len(), &mu_covariates, &phi_covariates)?;
    let y = nalgebra_vector(y);
    let fit = fb::fit_crisp_ml(&y, &design, &fb::SolverConfig::default()).map_err(pyerr)?;
    Ok(CrispFitResult {
        beta: fit.coefficients.beta.iter().copied().collect(),
        gamma: fit.coefficients.gamma.iter().copied().collect(),
        std_errors: fit.std_errors.iter().copied().collect(),
        loglik: fit.loglik,
        aic: fit.aic,
    })
}

fn nalgebra_vector(v: Vec<f64>) -> fb::nalgebra::DVector<f64> {
    fb::nalgebra::DVector::from_vec(v)
}

fn block_to_dict<'py>(py: Python<'py>, b: &fb::BlockStat) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new_bound(py);
    d.set_item("block", b.block.to_string())?;
    d.set_item("bias", b.bias)?;
    d.set_item("rmse", b.rmse)?;
    d.set_item("r", b.r)?;
    d.set_item("p", b.p)?;
    Ok(d)
}

fn report_to_dict<'py>(
    py: Python<'py>,
    report: &fb::SimulationReport,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new_bound(py);
    d.set_item("n", report.n)?;
    d.set_item("j", report.j)?;
    d.set_item("h", report.h)?;
    d.set_item("b", report.b)?;
    d.set_item("seed", report.seed)?;
    let estimators = PyList::empty_bound(py);
    for est in &report.estimators {
        let e = PyDict::new_bound(py);
        e.set_item("estimator", est.estimator.name())?;
        e.set_item("failures", est.failures)?;
        e.set_item("non_converged", est.non_converged)?;
        e.set_item("replications_used", est.replications_used)?;
        let coefficients = PyList::empty_bound(py);
        for c in &est.coefficients {
            let cd = PyDict::new_bound(py);
            cd.set_item("name", &c.name)?;
            cd.set_item("bias", c.bias)?;
            cd.set_item("rmse", c.rmse)?;
            coefficients.append(cd)?;
        }
        e.set_item("coefficients", coefficients)?;
        let blocks = PyList::empty_bound(py);
        for b in &est.blocks {
            blocks.append(block_to_dict(py, b)?)?;
        }
        e.set_item("blocks", blocks)?;
        let overall = PyDict::new_bound(py);
        overall.set_item("bias", est.overall.bias)?;
        overall.set_item("rmse", est.overall.rmse)?;
        overall.set_item("r", est.overall.r)?;
        overall.set_item("p", est.overall.p)?;
        e.set_item("overall", overall)?;
        estimators.append(e)?;
    }
    d.set_item("estimators", estimators)?;
    Ok(d)
}

/// Run one Monte Carlo estimator-recovery cell; returns the report as
/// nested dictionaries.
#[pyfunction]
#[pyo3(signature = (n, j, h, b, seed, *, true_beta=None, true_gamma=None, estimators=None,
    gamma_shape=1.025, gamma_rate=0.001, gamma_convention="shape-rate",
    estep="taylor", eta_nu="direct"))]
#[allow(clippy::too_many_arguments)]
fn run_monte_carlo<'py>(
    py: Python<'py>,
    n: usize,
    j: usize,
    h: usize,
    b: usize,
    seed: u64,
    true_beta: Option<Vec<f64>>,
    true_gamma: Option<Vec<f64>>,
    estimators: Option<Vec<String>>,
    gamma_shape: f64,
    gamma_rate: f64,
    gamma_convention: &str,
    estep: &str,
    eta_nu: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = match (true_beta, true_gamma) {
        (None, None) => fb::SimConfig::standard(n, j, h, b, seed).map_err(pyerr)?,
        (Some(beta), Some(gamma)) => fb::SimConfig {
            n,
            j,
            h,
            b,
            seed,
            true_beta: beta,
            true_gamma: gamma,
            gamma_shape,
            gamma_rate,
            gamma_convention: gamma_convention.parse().map_err(pyerr)?,
            estimators: fb::Estimator::ALL.to_vec(),
            em: fb::EmConfig::default(),
        },
        _ => {
            return Err(PyValueError::new_err(
                "true_beta and true_gamma must be given together (or both omitted)",
            ))
        }
    };
    cfg.gamma_shape = gamma_shape;
    cfg.gamma_rate = gamma_rate;
    cfg.gamma_convention = gamma_convention.parse().map_err(pyerr)?;
    if let Some(names) = estimators {
        cfg.estimators = names
            .iter()
            .map(|s| s.parse().map_err(pyerr))
            .collect::<PyResult<_>>()?;
    }
    cfg.em = fb::EmConfig {
        estep_variant: parse_estep(estep)?,
        eta_nu_convention: parse_convention(eta_nu)?,
        compute_pseudo_r2: false,
        ..fb::EmConfig::default()
    };
    cfg.validate().map_err(pyerr)?;
    let report = fb::run_monte_carlo(&cfg).map_err(pyerr)?;
    report_to_dict(py, &report)
}

#[pymodule]
fn _fuzzybeta(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<BetaFuzzyNumber>()?;
    m.add_class::<TrapezoidalFuzzyNumber>()?;
    m.add_class::<FitResult>()?;
    m.add_class::<CrispFitResult>()?;
    m.add_function(wrap_pyfunction!(fit_fuzzy_em, m)?)?;
    m.add_function(wrap_pyfunction!(fit_crisp_ml, m)?)?;
    m.add_function(wrap_pyfunction!(run_monte_carlo, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
