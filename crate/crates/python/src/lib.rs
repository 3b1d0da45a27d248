//! Python bindings: design solvers, the log-rank statistic and the trial
//! simulator.

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tte3o_core::numeric;
use tte3o_core::trial::{self, Arm, DecisionRule, PatientRecord, SimScenario, TrialData};
use tte3o_core::{Decision, DesignSpec, Error, ErrorClass, GsSpec};

create_exception!(tte3o, ValidationError, PyValueError);
create_exception!(tte3o, NumericalError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    let msg = format!("{}: {e}", e.code());
    match e.class() {
        ErrorClass::Validation => ValidationError::new_err(msg),
        ErrorClass::Numerical => NumericalError::new_err(msg),
        ErrorClass::Io => PyOSError::new_err(msg),
    }
}

fn decision_name(d: Decision) -> &'static str {
    match d {
        Decision::RejectH0 => "reject_h0",
        Decision::RejectH1 => "reject_h1",
        Decision::Inconclusive => "inconclusive",
    }
}

#[pyfunction]
#[pyo3(signature = (x, mean=0.0, sd=1.0))]
fn normal_cdf(x: f64, mean: f64, sd: f64) -> PyResult<f64> {
    numeric::normal_cdf(x, mean, sd).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (x, mean=0.0, sd=1.0))]
fn normal_pdf(x: f64, mean: f64, sd: f64) -> PyResult<f64> {
    numeric::normal_pdf(x, mean, sd).map_err(to_py)
}

#[pyfunction]
fn normal_quantile(p: f64) -> PyResult<f64> {
    numeric::normal_quantile(p).map_err(to_py)
}

/// Fixed three-outcome design.
#[pyclass(name = "FixedDesign", frozen)]
struct PyFixedDesign {
    inner: tte3o_core::FixedDesign,
}

#[pymethods]
impl PyFixedDesign {
    #[getter]
    fn events(&self) -> u64 {
        self.inner.n_events_d
    }
    #[getter]
    fn events_exact(&self) -> f64 {
        self.inner.n_events_exact
    }
    #[getter]
    fn lower_loghr(&self) -> f64 {
        self.inner.boundary_lower_loghr
    }
    #[getter]
    fn upper_loghr(&self) -> f64 {
        self.inner.boundary_upper_loghr
    }
    #[getter]
    fn lower_hr(&self) -> f64 {
        self.inner.boundary_lower_hr
    }
    #[getter]
    fn upper_hr(&self) -> f64 {
        self.inner.boundary_upper_hr
    }
    /// Achieved (alpha, beta, pi, eta).
    #[getter]
    fn achieved(&self) -> (f64, f64, f64, f64) {
        let d = &self.inner;
        (
            d.achieved_alpha,
            d.achieved_beta,
            d.achieved_pi,
            d.achieved_eta,
        )
    }

    /// Analytic (P(reject H0), P(reject H1)) at log hazard ratio `theta`.
    fn rejection_probabilities(&self, theta: f64) -> (f64, f64) {
        self.inner.rejection_probabilities(theta)
    }

    fn classify(&self, theta_hat: f64) -> &'static str {
        decision_name(self.inner.classify(theta_hat))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("designs serialize")
    }

    fn __repr__(&self) -> String {
        format!(
            "FixedDesign(events={}, lower_hr={:.4}, upper_hr={:.4})",
            self.inner.n_events_d, self.inner.boundary_lower_hr, self.inner.boundary_upper_hr
        )
    }
}

/// Two-stage three-outcome design.
#[pyclass(name = "GsDesign", frozen)]
struct PyGsDesign {
    inner: tte3o_core::GsDesign,
}

#[pymethods]
impl PyGsDesign {
    #[getter]
    fn events(&self) -> u64 {
        self.inner.d_total
    }
    #[getter]
    fn interim_events(&self) -> u64 {
        self.inner.d1_interim
    }
    /// (lower, upper) log-HR interim boundaries; infinite when unused.
    #[getter]
    fn interim_loghr(&self) -> (f64, f64) {
        (
            self.inner.interim_lower_loghr,
            self.inner.interim_upper_loghr,
        )
    }
    #[getter]
    fn final_loghr(&self) -> (f64, f64) {
        (self.inner.final_lower_loghr, self.inner.final_upper_loghr)
    }
    #[getter]
    fn interim_hr(&self) -> (f64, f64) {
        (self.inner.interim_lower_hr, self.inner.interim_upper_hr)
    }
    #[getter]
    fn final_hr(&self) -> (f64, f64) {
        (self.inner.final_lower_hr, self.inner.final_upper_hr)
    }
    #[getter]
    fn achieved(&self) -> (f64, f64, f64, f64) {
        let g = &self.inner;
        (
            g.achieved_alpha,
            g.achieved_beta,
            g.achieved_pi,
            g.achieved_eta,
        )
    }

    /// Decision at the interim, or None to continue.
    fn classify_interim(&self, theta_hat_1: f64) -> Option<&'static str> {
        self.inner.classify_interim(theta_hat_1).map(decision_name)
    }

    fn classify_final(&self, theta_hat: f64) -> &'static str {
        decision_name(self.inner.classify_final(theta_hat))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("designs serialize")
    }

    fn __repr__(&self) -> String {
        format!(
            "GsDesign(events={}, interim_events={})",
            self.inner.d_total, self.inner.d1_interim
        )
    }
}

#[pyfunction]
#[pyo3(signature = (hr1, alpha, beta, pi, eta, hr0=1.0, r=1.0, round_events=true))]
#[allow(clippy::too_many_arguments)]
fn design(
    hr1: f64,
    alpha: f64,
    beta: f64,
    pi: f64,
    eta: f64,
    hr0: f64,
    r: f64,
    round_events: bool,
) -> PyResult<PyFixedDesign> {
    let spec = DesignSpec::new(hr0, hr1, alpha, beta, pi, eta, r);
    tte3o_core::solve_fixed_design(&spec, round_events)
        .map(|inner| PyFixedDesign { inner })
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (hr1, alpha, beta, pi, eta, t1, alpha1, beta1, hr0=1.0, r=1.0))]
#[allow(clippy::too_many_arguments)]
fn gs_design(
    hr1: f64,
    alpha: f64,
    beta: f64,
    pi: f64,
    eta: f64,
    t1: f64,
    alpha1: f64,
    beta1: f64,
    hr0: f64,
    r: f64,
) -> PyResult<PyGsDesign> {
    let spec = GsSpec::new(
        DesignSpec::new(hr0, hr1, alpha, beta, pi, eta, r),
        t1,
        alpha1,
        beta1,
    );
    tte3o_core::solve_gs_design(&spec)
        .map(|inner| PyGsDesign { inner })
        .map_err(to_py)
}

/// Log-rank statistic from per-patient columns. Returns a dict with
/// `statistic`, `n_events` and `theta_hat`.
#[pyfunction]
#[pyo3(signature = (arm, entry_time, time, event, cutoff=f64::INFINITY, r=1.0))]
fn log_rank<'py>(
    py: Python<'py>,
    arm: Vec<u8>,
    entry_time: Vec<f64>,
    time: Vec<f64>,
    event: Vec<bool>,
    cutoff: f64,
    r: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let n = arm.len();
    if entry_time.len() != n || time.len() != n || event.len() != n {
        return Err(ValidationError::new_err(
            "invalid-parameter: columns differ in length",
        ));
    }
    let patients = (0..n)
        .map(|i| {
            Ok(PatientRecord {
                arm: Arm::from_indicator(arm[i]).ok_or_else(|| {
                    ValidationError::new_err(format!("invalid-parameter: arm[{i}] must be 0 or 1"))
                })?,
                entry_time: entry_time[i],
                event_time: time[i],
                observed: event[i],
            })
        })
        .collect::<PyResult<Vec<_>>>()?;
    let data = TrialData::new(patients, r).map_err(to_py)?;
    let result = trial::log_rank(&data, cutoff).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("statistic", result.statistic)?;
    out.set_item("n_events", result.n_events)?;
    out.set_item("theta_hat", result.theta_hat)?;
    Ok(out)
}

/// Monte-Carlo operating characteristics of a design under exponential
/// event times. Returns the estimate as a dict.
#[pyfunction]
#[pyo3(signature = (design, theta, hazard, n_patients, accrual, reps=10_000, seed=1))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    design: &Bound<'py, PyAny>,
    theta: f64,
    hazard: f64,
    n_patients: u64,
    accrual: f64,
    reps: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let mut scenario = SimScenario::exponential(theta, hazard, n_patients, accrual, seed, reps);
    let estimate = if let Ok(d) = design.cast::<PyFixedDesign>() {
        let rule = d.get().inner;
        scenario.rand_ratio = rule.rand_ratio();
        py.detach(|| trial::simulate_trial(&scenario, &rule))
    } else if let Ok(g) = design.cast::<PyGsDesign>() {
        let rule = g.get().inner;
        scenario.rand_ratio = rule.rand_ratio();
        py.detach(|| trial::simulate_trial(&scenario, &rule))
    } else {
        return Err(ValidationError::new_err(
            "invalid-parameter: design must be a FixedDesign or GsDesign",
        ));
    }
    .map_err(to_py)?;
    let text = serde_json::to_string(&estimate).expect("estimates serialize");
    py.import("json")?.call_method1("loads", (text,))
}

#[pymodule]
fn tte3o(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(normal_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(normal_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(normal_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(design, m)?)?;
    m.add_function(wrap_pyfunction!(gs_design, m)?)?;
    m.add_function(wrap_pyfunction!(log_rank, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_class::<PyFixedDesign>()?;
    m.add_class::<PyGsDesign>()?;
    m.add("ValidationError", m.py().get_type::<ValidationError>())?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    Ok(())
}
