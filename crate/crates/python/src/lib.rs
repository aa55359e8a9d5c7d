//! Python bindings: the main types and operations of the core crate.
//!
//! Values cross the boundary as floats or decimal strings; the working
//! precision is an explicit argument everywhere, matching the core API.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use stdmap::greene::{Classification, GreeneEngine, GreeneOptions};
use stdmap::lindstedt;
use stdmap::numerics::PrecisionContext;
use stdmap::orbits::{self, PrecisionSchedule};
use stdmap::pade;
use stdmap::rotation::{ContinuedFraction, Family};
use stdmap::scaling::{self, FitModel, ScalingDataset, ValueKind};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn ctx(digits: u32) -> PyResult<PrecisionContext> {
    PrecisionContext::new(digits).map_err(err)
}

/// Rotation number as a continued fraction with an eventually periodic
/// tail, e.g. `RotationNumber("[2,500,(1)]")`.
#[pyclass(name = "RotationNumber", from_py_object)]
#[derive(Clone)]
struct PyRotationNumber {
    inner: ContinuedFraction,
}

#[pymethods]
impl PyRotationNumber {
    #[new]
    fn new(bracket: &str) -> PyResult<Self> {
        Ok(Self { inner: ContinuedFraction::parse(bracket).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("RotationNumber(\"{}\")", self.inner.to_bracket())
    }

    /// Canonical bracket notation.
    fn bracket(&self) -> String {
        self.inner.to_bracket()
    }

    fn is_rational(&self) -> bool {
        self.inner.is_rational()
    }

    /// Numeric value at the given precision, as a decimal string.
    #[pyo3(signature = (digits = 40))]
    fn value(&self, digits: u32) -> PyResult<String> {
        let c = ctx(digits)?;
        Ok(self.inner.value(&c).to_significant(digits as usize))
    }

    /// Bryuno function B(omega) as a float.
    #[pyo3(signature = (digits = 40))]
    fn bryuno(&self, digits: u32) -> PyResult<f64> {
        let c = ctx(digits)?;
        Ok(self.inner.bryuno(&c).map_err(err)?.value.to_f64())
    }

    /// First `count` convergents as (p, q) pairs.
    fn convergents(&self, count: usize) -> PyResult<Vec<(u64, u64)>> {
        let conv = self.inner.convergents(count).map_err(err)?;
        conv.iter()
            .map(|c| c.as_u64().ok_or_else(|| err("convergent exceeds u64")))
            .collect()
    }
}

/// Periodic orbit of rotation number p/q with its Greene residue.
#[pyclass(name = "OrbitResidue")]
struct PyOrbitResidue {
    #[pyo3(get)]
    p: u64,
    #[pyo3(get)]
    q: u64,
    #[pyo3(get)]
    residue: f64,
    #[pyo3(get)]
    trace: f64,
    #[pyo3(get)]
    cancellation_digits: i64,
    #[pyo3(get)]
    digits: u32,
    #[pyo3(get)]
    closure_error: f64,
}

/// Greene residue of the p/q orbit at eps, with automatic precision
/// escalation up to `max_digits`.
#[pyfunction]
#[pyo3(signature = (p, q, epsilon, max_digits = 600))]
fn residue(p: u64, q: u64, epsilon: &str, max_digits: u32) -> PyResult<PyOrbitResidue> {
    let c = ctx(38)?;
    let eps = c.parse(epsilon).map_err(|_| err(format!("bad epsilon `{epsilon}`")))?;
    let schedule = PrecisionSchedule::capped(max_digits);
    let (orbit, res) = orbits::residue_at(p, q, &eps, &schedule, None).map_err(err)?;
    Ok(PyOrbitResidue {
        p,
        q,
        residue: res.value.to_f64(),
        trace: res.trace.to_f64(),
        cancellation_digits: res.cancellation_digits,
        digits: orbit.digits,
        closure_error: orbit.closure_error.to_f64(),
    })
}

/// Critical function eps_c(omega) by residue-criterion bisection.
/// Returns (value, error).
#[pyfunction]
#[pyo3(signature = (omega, target_digits = 4, k_max = 12, max_q = None, max_digits = 600))]
fn critical_function(
    omega: &PyRotationNumber,
    target_digits: u32,
    k_max: usize,
    max_q: Option<u64>,
    max_digits: u32,
) -> PyResult<(f64, f64)> {
    let mut options = GreeneOptions::default();
    options.schedule = PrecisionSchedule::capped(max_digits);
    options.max_q = max_q;
    let mut engine = GreeneEngine::new(options);
    let est = engine
        .critical_function(&omega.inner, target_digits, k_max, None, |_| {})
        .map_err(err)?;
    Ok((est.value().to_f64(), est.error().to_f64()))
}

/// Classify eps against eps_c(omega): "subcritical", "supercritical" or
/// "undecided".
#[pyfunction]
#[pyo3(signature = (omega, epsilon, k_max = 12, max_digits = 600))]
fn classify(
    omega: &PyRotationNumber,
    epsilon: &str,
    k_max: usize,
    max_digits: u32,
) -> PyResult<String> {
    let c = ctx(38)?;
    let eps = c.parse(epsilon).map_err(|_| err(format!("bad epsilon `{epsilon}`")))?;
    let mut options = GreeneOptions::default();
    options.schedule = PrecisionSchedule::capped(max_digits);
    let mut engine = GreeneEngine::new(options);
    let (verdict, _) = engine.classify(&omega.inner, &eps, k_max).map_err(err)?;
    Ok(match verdict {
        Classification::Subcritical => "subcritical",
        Classification::Supercritical => "supercritical",
        Classification::Undecided => "undecided",
    }
    .to_string())
}

/// Lindstedt-series coefficients u^(k)_nu as a list of (k, nu, value).
#[pyfunction]
#[pyo3(signature = (omega, order, digits = 60))]
fn lindstedt_coefficients(
    omega: &PyRotationNumber,
    order: usize,
    digits: u32,
) -> PyResult<Vec<(usize, usize, f64)>> {
    let c = ctx(digits)?;
    let series = lindstedt::coefficients(&omega.inner, order, &c).map_err(err)?;
    let mut out = Vec::new();
    for term in &series.terms {
        for (nu, s) in term.sine.iter().enumerate().skip(1) {
            if !s.is_zero() {
                out.push((term.order, nu, s.to_f64()));
            }
        }
    }
    Ok(out)
}

/// Pade radius rho_P(omega) from the [order/order] approximant at alpha.
#[pyfunction]
#[pyo3(signature = (omega, order = 80, digits = 150, alpha = "1"))]
fn rho_pade(omega: &PyRotationNumber, order: usize, digits: u32, alpha: &str) -> PyResult<f64> {
    let c = ctx(digits)?;
    let alpha0 = c.parse(alpha).map_err(|_| err(format!("bad alpha `{alpha}`")))?;
    let est = pade::rho_pade(&omega.inner, &alpha0, order, &c, None).map_err(err)?;
    Ok(est.rho.to_f64())
}

/// Heuristic near-resonance radius rho_1(omega) as a decimal string.
#[pyfunction]
#[pyo3(signature = (omega, digits = 50))]
fn rho1(omega: &PyRotationNumber, digits: u32) -> PyResult<String> {
    let c = ctx(digits)?;
    let est = pade::rho1(&omega.inner, &c).map_err(err)?;
    Ok(est.rho.to_significant(12))
}

/// Members of a family like "[n,(1)]" at the given indices.
#[pyfunction]
fn family(descriptor: &str, indices: Vec<u64>) -> PyResult<Vec<PyRotationNumber>> {
    let fam = Family::parse(descriptor).map_err(err)?;
    Ok(fam
        .sequence(&indices)
        .into_iter()
        .map(|inner| PyRotationNumber { inner })
        .collect())
}

/// Fit -log(value) = const + beta*B + correction on (omega, value) pairs.
/// Returns a dict-like list of (name, value) plus the mean square distance.
#[pyfunction]
#[pyo3(signature = (pairs, kind = "eps_c", exponent = None))]
fn scaling_fit(
    pairs: Vec<(String, String)>,
    kind: &str,
    exponent: Option<f64>,
) -> PyResult<(Vec<(String, f64)>, f64)> {
    let c = ctx(40)?;
    let kind = match kind {
        "eps_c" => ValueKind::EpsC,
        "rho" => ValueKind::Rho,
        other => return Err(err(format!("unknown kind `{other}`"))),
    };
    let borrowed: Vec<(&str, &str)> =
        pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let ds = ScalingDataset::from_printed(&borrowed, kind, (0, 1), &c).map_err(err)?;
    let fit = scaling::fit(&ds, FitModel::ExpCorrection { exponent }, &c).map_err(err)?;
    let params = fit
        .params
        .iter()
        .map(|(name, value)| (name.clone(), value.to_f64()))
        .collect();
    Ok((params, fit.mean_square_distance.to_f64()))
}

#[pymodule]
fn stdmap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRotationNumber>()?;
    m.add_class::<PyOrbitResidue>()?;
    m.add_function(wrap_pyfunction!(residue, m)?)?;
    m.add_function(wrap_pyfunction!(critical_function, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(lindstedt_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(rho_pade, m)?)?;
    m.add_function(wrap_pyfunction!(rho1, m)?)?;
    m.add_function(wrap_pyfunction!(family, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_fit, m)?)?;
    Ok(())
}
