//! Python bindings for the `xyecho` crate.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use xyecho::{DerivativeMethod, PeakTarget, Regime, Slope};

create_exception!(xyecho, EchoError, PyValueError);

fn wrap<T>(r: xyecho::Result<T>) -> PyResult<T> {
    r.map_err(|e| EchoError::new_err(e.to_string()))
}

#[pyclass(name = "ChainParams", module = "xyecho", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyChainParams(xyecho::ChainParams);

#[pymethods]
impl PyChainParams {
    /// Odd `n_sites` is accepted only with `any_parity=True` (Berry-phase paths).
    #[new]
    #[pyo3(signature = (gamma, lambda_, n_sites, any_parity = false))]
    fn new(gamma: f64, lambda_: f64, n_sites: usize, any_parity: bool) -> PyResult<Self> {
        let chain = if any_parity {
            xyecho::ChainParams::with_any_parity(gamma, lambda_, n_sites)
        } else {
            xyecho::ChainParams::new(gamma, lambda_, n_sites)
        };
        wrap(chain).map(Self)
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma()
    }

    #[getter(lambda_)]
    fn lambda(&self) -> f64 {
        self.0.lambda()
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.0.n_sites()
    }

    fn __repr__(&self) -> String {
        format!(
            "ChainParams(gamma={}, lambda_={}, n_sites={})",
            self.0.gamma(),
            self.0.lambda(),
            self.0.n_sites()
        )
    }
}

#[pyclass(
    name = "CentralSpinParams",
    module = "xyecho",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyCentralSpin(xyecho::CentralSpinParams);

#[pymethods]
impl PyCentralSpin {
    #[new]
    #[pyo3(signature = (mu = 0.1, nu = 2.0, g = 0.5))]
    fn new(mu: f64, nu: f64, g: f64) -> PyResult<Self> {
        wrap(xyecho::CentralSpinParams::new(mu, nu, g)).map(Self)
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu
    }

    #[getter]
    fn nu(&self) -> f64 {
        self.0.nu
    }

    #[getter]
    fn g(&self) -> f64 {
        self.0.g
    }

    fn __repr__(&self) -> String {
        format!(
            "CentralSpinParams(mu={}, nu={}, g={})",
            self.0.mu, self.0.nu, self.0.g
        )
    }
}

#[pyclass(
    name = "ModeData",
    module = "xyecho",
    frozen,
    get_all,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyModeData {
    k: usize,
    phi: f64,
    lambda_g: f64,
    lambda_e: f64,
    theta_g: f64,
    theta_e: f64,
    alpha: f64,
    sin_two_alpha: f64,
    degenerate: bool,
}

impl From<&xyecho::ModeData> for PyModeData {
    fn from(m: &xyecho::ModeData) -> Self {
        PyModeData {
            k: m.k,
            phi: m.phi,
            lambda_g: m.lambda_g,
            lambda_e: m.lambda_e,
            theta_g: m.theta_g,
            theta_e: m.theta_e,
            alpha: m.alpha,
            sin_two_alpha: m.sin_two_alpha,
            degenerate: m.degenerate,
        }
    }
}

/// Berry phase and its lambda-derivative. `slope` is `"regular"`,
/// `"one_sided"` (see `slope_left` / `slope_right`) or `"singular"`.
#[pyclass(
    name = "BerryResult",
    module = "xyecho",
    frozen,
    get_all,
    skip_from_py_object
)]
struct PyBerryResult {
    beta: f64,
    dbeta_dlambda: Option<f64>,
    slope: &'static str,
    slope_left: Option<f64>,
    slope_right: Option<f64>,
    f_value: f64,
    regime: &'static str,
}

impl From<xyecho::BerryResult> for PyBerryResult {
    fn from(r: xyecho::BerryResult) -> Self {
        let (slope, left, right) = match r.dbeta_dlambda {
            Slope::Regular(v) => ("regular", Some(v), Some(v)),
            Slope::OneSided { left, right } => ("one_sided", Some(left), Some(right)),
            Slope::Singular => ("singular", None, None),
        };
        PyBerryResult {
            beta: r.beta,
            dbeta_dlambda: r.dbeta_dlambda.value(),
            slope,
            slope_left: left,
            slope_right: right,
            f_value: r.f_value,
            regime: match r.regime {
                Regime::FiniteN => "finite",
                Regime::Thermodynamic => "thermodynamic",
            },
        }
    }
}

#[pyclass(
    name = "ScalingFit",
    module = "xyecho",
    frozen,
    get_all,
    skip_from_py_object
)]
struct PyScalingFit {
    target: &'static str,
    sizes: Vec<usize>,
    peak_positions: Vec<f64>,
    exponent: f64,
    reference_exponent: f64,
}

fn parse_target(target: &str) -> PyResult<PeakTarget> {
    match target {
        "dbeta" => Ok(PeakTarget::Dbeta),
        "df" => Ok(PeakTarget::Df),
        _ => Err(PyValueError::new_err(format!(
            "target must be 'dbeta' or 'df' (got {target:?})"
        ))),
    }
}

/// Returns `(delta, big_delta)` for a central spin and chain length.
#[pyfunction]
fn derive_branch_params(cs: &PyCentralSpin, n_sites: usize) -> PyResult<(f64, f64)> {
    let b = wrap(xyecho::derive_branch_params(&cs.0, n_sites))?;
    Ok((b.delta, b.big_delta))
}

#[pyfunction]
fn mode_table(chain: &PyChainParams, delta: f64) -> PyResult<Vec<PyModeData>> {
    Ok(wrap(xyecho::mode_table(&chain.0, delta))?
        .iter()
        .map(PyModeData::from)
        .collect())
}

#[pyfunction]
fn loschmidt_echo(chain: &PyChainParams, delta: f64, t: f64) -> PyResult<f64> {
    let modes = wrap(xyecho::mode_table(&chain.0, delta))?;
    wrap(xyecho::loschmidt_echo(&modes, t))
}

#[pyfunction]
fn log_echo(chain: &PyChainParams, delta: f64, t: f64) -> PyResult<f64> {
    let modes = wrap(xyecho::mode_table(&chain.0, delta))?;
    wrap(xyecho::log_echo(&modes, t))
}

/// Echo on a sorted, non-negative time grid.
#[pyfunction]
fn echo_series(
    py: Python<'_>,
    chain: &PyChainParams,
    delta: f64,
    times: Vec<f64>,
) -> PyResult<Vec<f64>> {
    let series = py.detach(|| {
        let modes = xyecho::mode_table(&chain.0, delta)?;
        xyecho::echo_series(&modes, &times)
    });
    Ok(wrap(series)?.values)
}

#[pyfunction]
fn partial_product(chain: &PyChainParams, delta: f64, t: f64, cutoff: usize) -> PyResult<f64> {
    let modes = wrap(xyecho::mode_table(&chain.0, delta))?;
    wrap(xyecho::partial_product(&modes, t, cutoff))
}

/// Returns `(tau, e_factor)` of the short-time Gaussian envelope.
#[pyfunction]
fn heuristic_tau(chain: &PyChainParams, delta: f64, cutoff: usize) -> PyResult<(f64, f64)> {
    let h = wrap(xyecho::heuristic_tau(&chain.0, delta, cutoff))?;
    Ok((h.tau, h.e_factor))
}

#[pyfunction]
fn small_k_log_echo(chain: &PyChainParams, delta: f64, cutoff: usize, t: f64) -> PyResult<f64> {
    wrap(xyecho::small_k_log_echo(&chain.0, delta, cutoff, t))
}

#[pyfunction]
fn purity(echo: f64, c_g_sq: f64, c_e_sq: f64) -> PyResult<f64> {
    let p = wrap(xyecho::PurityInput::new(c_g_sq, c_e_sq))?;
    Ok(xyecho::purity(echo, &p))
}

#[pyfunction]
fn oracle_echo(chain: &PyChainParams, delta: f64, t: f64) -> PyResult<f64> {
    wrap(xyecho::oracle_echo(&chain.0, delta, t))
}

#[pyfunction]
#[pyo3(signature = (chain, delta = 0.0))]
fn f_function(chain: &PyChainParams, delta: f64) -> f64 {
    xyecho::f_function(&chain.0, delta)
}

#[pyfunction]
#[pyo3(signature = (chain, delta = 0.0))]
fn df_dlambda(chain: &PyChainParams, delta: f64) -> PyResult<f64> {
    wrap(xyecho::df_dlambda(&chain.0, delta))
}

#[pyfunction]
fn f_thermodynamic(gamma: f64, lambda_: f64) -> PyResult<f64> {
    wrap(xyecho::f_thermodynamic(gamma, lambda_))
}

/// `(left, right)` derivatives; equal away from a kink.
#[pyfunction]
fn df_thermodynamic(gamma: f64, lambda_: f64) -> PyResult<(f64, f64)> {
    match wrap(xyecho::df_thermodynamic(gamma, lambda_))? {
        Slope::Regular(v) => Ok((v, v)),
        Slope::OneSided { left, right } => Ok((left, right)),
        Slope::Singular => Ok((f64::NAN, f64::NAN)),
    }
}

/// Finite-N Berry phase; `delta=None` derives the shift from the central spin.
#[pyfunction]
#[pyo3(signature = (chain, cs, delta = None))]
fn berry_phase_finite(
    chain: &PyChainParams,
    cs: &PyCentralSpin,
    delta: Option<f64>,
) -> PyResult<PyBerryResult> {
    let r = match delta {
        Some(d) => xyecho::berry_phase_finite_with_delta(&chain.0, &cs.0, d),
        None => xyecho::berry_phase_finite(&chain.0, &cs.0),
    };
    wrap(r).map(PyBerryResult::from)
}

#[pyfunction]
fn berry_phase_thermodynamic(
    gamma: f64,
    lambda_: f64,
    cs: &PyCentralSpin,
) -> PyResult<PyBerryResult> {
    wrap(xyecho::berry_phase_thermodynamic(gamma, lambda_, &cs.0)).map(PyBerryResult::from)
}

#[pyfunction]
#[pyo3(signature = (chain, cs, method = "analytic"))]
fn dbeta_dlambda(chain: &PyChainParams, cs: &PyCentralSpin, method: &str) -> PyResult<f64> {
    let method = match method {
        "analytic" => DerivativeMethod::Analytic,
        "finite_difference" => DerivativeMethod::FiniteDifference,
        _ => {
            return Err(PyValueError::new_err(format!(
                "method must be 'analytic' or 'finite_difference' (got {method:?})"
            )))
        }
    };
    wrap(xyecho::dbeta_dlambda(&chain.0, &cs.0, method))
}

#[pyfunction]
#[pyo3(signature = (chain, cs, bracket = (0.5, 1.0)))]
fn find_pseudocritical(
    chain: &PyChainParams,
    cs: &PyCentralSpin,
    bracket: (f64, f64),
) -> PyResult<f64> {
    wrap(xyecho::find_pseudocritical(&chain.0, &cs.0, bracket))
}

#[pyfunction]
#[pyo3(signature = (sizes, cs, gamma = 1.0, target = "df", bracket = (0.5, 1.0)))]
fn scaling_fit(
    py: Python<'_>,
    sizes: Vec<usize>,
    cs: &PyCentralSpin,
    gamma: f64,
    target: &str,
    bracket: (f64, f64),
) -> PyResult<PyScalingFit> {
    let peak_target = parse_target(target)?;
    let cs = cs.0;
    let fit = wrap(py.detach(|| xyecho::scaling_fit_in(&sizes, &cs, gamma, peak_target, bracket)))?;
    Ok(PyScalingFit {
        target: match fit.target {
            PeakTarget::Dbeta => "dbeta",
            PeakTarget::Df => "df",
        },
        sizes: fit.sizes,
        peak_positions: fit.peak_positions,
        exponent: fit.exponent,
        reference_exponent: fit.reference_exponent,
    })
}

#[pymodule]
#[pyo3(name = "xyecho")]
pub fn xyecho_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("EchoError", m.py().get_type::<EchoError>())?;
    m.add_class::<PyChainParams>()?;
    m.add_class::<PyCentralSpin>()?;
    m.add_class::<PyModeData>()?;
    m.add_class::<PyBerryResult>()?;
    m.add_class::<PyScalingFit>()?;
    m.add_function(wrap_pyfunction!(derive_branch_params, m)?)?;
    m.add_function(wrap_pyfunction!(mode_table, m)?)?;
    m.add_function(wrap_pyfunction!(loschmidt_echo, m)?)?;
    m.add_function(wrap_pyfunction!(log_echo, m)?)?;
    m.add_function(wrap_pyfunction!(echo_series, m)?)?;
    m.add_function(wrap_pyfunction!(partial_product, m)?)?;
    m.add_function(wrap_pyfunction!(heuristic_tau, m)?)?;
    m.add_function(wrap_pyfunction!(small_k_log_echo, m)?)?;
    m.add_function(wrap_pyfunction!(purity, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_echo, m)?)?;
    m.add_function(wrap_pyfunction!(f_function, m)?)?;
    m.add_function(wrap_pyfunction!(df_dlambda, m)?)?;
    m.add_function(wrap_pyfunction!(f_thermodynamic, m)?)?;
    m.add_function(wrap_pyfunction!(df_thermodynamic, m)?)?;
    m.add_function(wrap_pyfunction!(berry_phase_finite, m)?)?;
    m.add_function(wrap_pyfunction!(berry_phase_thermodynamic, m)?)?;
    m.add_function(wrap_pyfunction!(dbeta_dlambda, m)?)?;
    m.add_function(wrap_pyfunction!(find_pseudocritical, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_fit, m)?)?;
    Ok(())
}
