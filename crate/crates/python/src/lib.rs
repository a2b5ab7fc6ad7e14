//! Python module `qndanneal`. Matrices cross the boundary as nested lists
//! of complex numbers; reports come back as plain dicts.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

use qndanneal::anneal::{lz_infidelity as core_lz_infidelity, AnnealOptions};
use qndanneal::bench::{
    gadget_verify_problem, random_ising as core_random_ising, time_to_solution as core_tts, tts_ratio_sweep as core_sweep,
    TtsSweepConfig,
};
use qndanneal::channel::{coherence_trace as core_coherence, kraus_operators as core_kraus};
use qndanneal::model::{qubo_to_ising, MeterState, ThreeBodyTerm};
use qndanneal::qcore::{CMatrix, CVector, Integrator};
use qndanneal::{AnnealSetup, DensityMatrix, InteractionMode, IsingProblem, MeterSpec, QuboProblem, StateVector};

fn err(e: qndanneal::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn mode_of(s: &str) -> PyResult<InteractionMode> {
    match s {
        "none" => Ok(InteractionMode::None),
        "full" => Ok(InteractionMode::Full),
        "constrained" => Ok(InteractionMode::Constrained),
        _ => Err(PyValueError::new_err(format!("mode must be none, full or constrained, got '{s}'"))),
    }
}

fn meter_state_of(s: &str) -> PyResult<MeterState> {
    match s {
        "zero" | "0" => Ok(MeterState::Zero),
        "one" | "1" => Ok(MeterState::One),
        "plus" | "+" => Ok(MeterState::Plus),
        "minus" | "-" => Ok(MeterState::Minus),
        _ => Err(PyValueError::new_err(format!("meter state must be zero, one, plus or minus, got '{s}'"))),
    }
}

fn options(steps: Option<usize>) -> AnnealOptions {
    AnnealOptions::fixed(steps.unwrap_or(qndanneal::qcore::DEFAULT_STEPS))
}

/// Ising problem `sum_i h_i z_i + sum_{i != j} J_ij z_i z_j` plus optional
/// three-body terms.
#[pyclass(name = "IsingProblem", module = "qndanneal", skip_from_py_object)]
#[derive(Clone)]
pub struct PyIsing {
    inner: IsingProblem,
}

#[pymethods]
impl PyIsing {
    #[new]
    #[pyo3(signature = (j, h, three_body = Vec::new()))]
    fn new(j: Vec<Vec<f64>>, h: Vec<f64>, three_body: Vec<([usize; 3], f64)>) -> PyResult<Self> {
        let terms = three_body.into_iter().map(|(sites, c)| ThreeBodyTerm { sites, c }).collect();
        let inner = IsingProblem::new(j, h).and_then(|p| p.with_three_body(terms)).map_err(err)?;
        Ok(Self { inner })
    }

    /// Maps the QUBO `x^T Q x` to spins; the constant goes to `offset`.
    #[staticmethod]
    fn from_qubo(q: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: qubo_to_ising(&QuboProblem::new(q).map_err(err)?) })
    }

    /// Seeded instance with `J_ij, h_i` uniform in `[0, 1)`.
    #[staticmethod]
    fn random(n: usize, seed: u64) -> Self {
        Self { inner: core_random_ising(n, seed) }
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits
    }

    #[getter]
    fn offset(&self) -> f64 {
        self.inner.offset
    }

    fn energy(&self, spins: Vec<i8>) -> PyResult<f64> {
        if spins.len() != self.inner.n_qubits || spins.iter().any(|&z| z != 1 && z != -1) {
            return Err(PyValueError::new_err("expected one +1/-1 spin per qubit"));
        }
        Ok(self.inner.energy(&spins))
    }

    /// `(energy, basis indices)` of the classical ground space.
    fn ground_states(&self) -> (f64, Vec<usize>) {
        self.inner.brute_force_ground()
    }

    /// Ground-manifold and gap comparison with the gadget decomposition.
    fn gadget_report(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &gadget_verify_problem(&self.inner).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!("IsingProblem(n_qubits={}, three_body={})", self.inner.n_qubits, self.inner.three_body.len())
    }
}

/// A problem, its schedule and an optional meter coupling.
#[pyclass(name = "AnnealSetup", module = "qndanneal", skip_from_py_object)]
#[derive(Clone)]
pub struct PySetup {
    inner: AnnealSetup,
}

#[pymethods]
impl PySetup {
    /// Landau-Zener sweep over `t` in `[-T/2, T/2]` with minimum gap `g`.
    #[staticmethod]
    fn landau_zener(g: f64, duration: f64) -> PyResult<Self> {
        Ok(Self { inner: AnnealSetup::landau_zener(g, duration).map_err(err)? })
    }

    /// Landau-Zener sweep given the rate `v` instead of the duration.
    #[staticmethod]
    fn landau_zener_rate(v: f64, g: f64) -> PyResult<Self> {
        Ok(Self { inner: AnnealSetup::landau_zener_rate(v, g).map_err(err)? })
    }

    /// Linear transverse-field anneal of `problem` over `duration`.
    #[staticmethod]
    fn ising(problem: PyRef<'_, PyIsing>, duration: f64) -> PyResult<Self> {
        Ok(Self { inner: AnnealSetup::ising(problem.inner.clone(), duration).map_err(err)? })
    }

    /// Qubit meter with coupling `x0`, frequency `omega` and initial state.
    #[pyo3(signature = (x0, omega = 0.0, state = "zero", mode = "full"))]
    fn with_meter(&self, x0: f64, omega: f64, state: &str, mode: &str) -> PyResult<Self> {
        let meter = MeterSpec::qubit(x0, omega, meter_state_of(state)?);
        Ok(Self { inner: self.inner.clone().with_meter(meter, mode_of(mode)?).map_err(err)? })
    }

    fn without_meter(&self) -> Self {
        Self { inner: self.inner.clone().without_meter() }
    }

    fn with_duration(&self, duration: f64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.with_duration(duration).map_err(err)? })
    }

    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration()
    }

    #[getter]
    fn window(&self) -> (f64, f64) {
        self.inner.window()
    }

    #[getter]
    fn system_dim(&self) -> usize {
        self.inner.system_dim()
    }

    #[getter]
    fn coupled(&self) -> bool {
        self.inner.coupled()
    }

    fn system_hamiltonian(&self, t: f64) -> Vec<Vec<Complex64>> {
        rows(self.inner.system_hamiltonian(t).matrix())
    }

    fn total_hamiltonian(&self, t: f64) -> PyResult<Vec<Vec<Complex64>>> {
        Ok(rows(self.inner.total_hamiltonian(t).map_err(err)?.matrix()))
    }

    fn __repr__(&self) -> String {
        let (t0, t1) = self.inner.window();
        let coupled = if self.inner.coupled() { "True" } else { "False" };
        format!("AnnealSetup(dim={}, window=({t0}, {t1}), coupled={coupled})", self.inner.system_dim())
    }
}

/// Outcome of one anneal.
#[pyclass(name = "AnnealResult", module = "qndanneal", get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyResult_ {
    fidelity: f64,
    success_probability: f64,
    duration: f64,
    steps: usize,
    /// Final reduced density matrix.
    state: Vec<Vec<Complex64>>,
}

#[pymethods]
impl PyResult_ {
    fn __repr__(&self) -> String {
        format!("AnnealResult(fidelity={}, duration={}, steps={})", self.fidelity, self.duration, self.steps)
    }
}

/// Runs the protocol from the ground state of the initial Hamiltonian.
#[pyfunction]
#[pyo3(signature = (setup, steps = None))]
fn run_anneal(py: Python<'_>, setup: PyRef<'_, PySetup>, steps: Option<usize>) -> PyResult<PyResult_> {
    let s = setup.inner.clone();
    let r = py.detach(|| qndanneal::run_anneal(&s, &options(steps))).map_err(err)?;
    Ok(PyResult_ {
        fidelity: r.fidelity,
        success_probability: r.success_probability,
        duration: r.duration,
        steps: r.steps,
        state: rows(r.state.matrix()),
    })
}

/// Kraus operators of the reduced channel from the window start to `t`.
#[pyfunction]
#[pyo3(signature = (setup, t, steps = None))]
fn kraus_operators(setup: PyRef<'_, PySetup>, t: f64, steps: Option<usize>) -> PyResult<Vec<Vec<Vec<Complex64>>>> {
    let integ = Integrator::new(steps.unwrap_or(qndanneal::qcore::DEFAULT_STEPS));
    let set = core_kraus(&setup.inner, t, &integ).map_err(err)?;
    Ok(set.operators.iter().map(rows).collect())
}

/// `|rho_mn(t)|` in the instantaneous eigenbasis for a pure start state.
#[pyfunction]
#[pyo3(signature = (setup, psi0, times, levels = (0, 1), steps = None))]
fn coherence_trace(
    py: Python<'_>,
    setup: PyRef<'_, PySetup>,
    psi0: Vec<Complex64>,
    times: Vec<f64>,
    levels: (usize, usize),
    steps: Option<usize>,
) -> PyResult<Vec<f64>> {
    let psi = StateVector::normalized(CVector::from_vec(psi0)).map_err(err)?;
    let rho = DensityMatrix::pure(&psi);
    let s = setup.inner.clone();
    let integ = Integrator::new(steps.unwrap_or(qndanneal::qcore::DEFAULT_STEPS));
    py.detach(|| core_coherence(&s, &rho, &times, levels, &integ)).map_err(err)
}

/// Time-to-solution over a duration grid; the setup's own duration is ignored.
#[pyfunction]
#[pyo3(signature = (setup, durations, p_target = 0.95, steps = None))]
fn time_to_solution(
    py: Python<'_>,
    setup: PyRef<'_, PySetup>,
    durations: Vec<f64>,
    p_target: f64,
    steps: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let s = setup.inner.clone();
    let entry = py.detach(|| core_tts(&s, p_target, &durations, &options(steps))).map_err(err)?;
    to_py(py, &entry)
}

/// Mean TTS ratio of the meter protocol to coherent annealing over seeded
/// random instances.
#[pyfunction]
#[pyo3(signature = (n_qubits, instances = 20, seed = 0, x0 = 2.0, mode = "full", steps = None))]
fn tts_ratio_sweep(
    py: Python<'_>,
    n_qubits: Vec<usize>,
    instances: usize,
    seed: u64,
    x0: f64,
    mode: &str,
    steps: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let mut config = TtsSweepConfig { n_qubits, instances, seed, x0, mode: mode_of(mode)?, ..TtsSweepConfig::default() };
    if let Some(s) = steps {
        config.steps = s;
    }
    let report = py.detach(|| core_sweep(&config)).map_err(err)?;
    to_py(py, &report)
}

/// Closed-form Landau-Zener transition probability.
#[pyfunction]
fn lz_infidelity(v: f64, g: f64) -> PyResult<f64> {
    core_lz_infidelity(v, g).map_err(err)
}

#[pymodule(name = "qndanneal")]
fn qndanneal_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyIsing>()?;
    m.add_class::<PySetup>()?;
    m.add_class::<PyResult_>()?;
    m.add_function(wrap_pyfunction!(run_anneal, m)?)?;
    m.add_function(wrap_pyfunction!(kraus_operators, m)?)?;
    m.add_function(wrap_pyfunction!(coherence_trace, m)?)?;
    m.add_function(wrap_pyfunction!(time_to_solution, m)?)?;
    m.add_function(wrap_pyfunction!(tts_ratio_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(lz_infidelity, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
