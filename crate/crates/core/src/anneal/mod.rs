//! Single protocol runs and adiabaticity diagnostics.

use crate::channel::{reduced_evolution, Route};
use crate::model::{AnnealSetup, InteractionMode, Schedule};
use crate::qcore::{hermitian_eig, tensor, DensityMatrix, HermitianOperator, Integrator};
use crate::{Error, Result};

/// Step-doubling disagreement above which a run is flagged as unconverged.
pub const CONVERGENCE_TOL: f64 = 1e-6;
/// Refinement target used by [`AnnealOptions::refined`].
pub const REFINE_TOL: f64 = 1e-8;
const MAX_REFINE_STEPS: usize = 1 << 20;
/// Default `epsilon` of the locally adiabatic schedule.
pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnealOptions {
    pub integrator: Integrator,
    pub route: Route,
    /// Re-run with doubled steps and record the fidelity change.
    pub convergence_check: bool,
    /// Keep doubling the steps until the fidelity changes by less than this.
    pub refine_tol: Option<f64>,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        Self { integrator: Integrator::default(), route: Route::Auto, convergence_check: true, refine_tol: None }
    }
}

impl AnnealOptions {
    /// Fixed step count, no convergence re-run.
    pub fn fixed(steps: usize) -> Self {
        Self { integrator: Integrator::new(steps), route: Route::Auto, convergence_check: false, refine_tol: None }
    }

    /// Step doubling from the default step count until the fidelity
    /// settles to [`REFINE_TOL`].
    pub fn refined() -> Self {
        Self { refine_tol: Some(REFINE_TOL), ..Self::default() }
    }

    pub fn with_route(mut self, route: Route) -> Self {
        self.route = route;
        self
    }
}

/// Outcome of one protocol run.
#[derive(Clone, Debug)]
pub struct AnnealResult {
    /// Reduced system state at the end of the window.
    pub state: DensityMatrix,
    /// `<psi_0(T)| rho_S |psi_0(T)>` against the ground state of `H_S(T)`.
    pub fidelity: f64,
    /// Population of the (possibly degenerate) ground space of `H_S(T)`.
    pub success_probability: f64,
    pub duration: f64,
    pub steps: usize,
    /// `|F(steps) - F(2 steps)|` when a convergence check ran.
    pub step_doubling_change: Option<f64>,
    pub converged: bool,
}

struct Evaluation {
    state: DensityMatrix,
    fidelity: f64,
    success: f64,
}

fn evaluate(setup: &AnnealSetup, rho0: &DensityMatrix, integrator: &Integrator, route: Route) -> Result<Evaluation> {
    let (_, t1) = setup.window();
    let state = reduced_evolution(setup, rho0, t1, integrator, route)?;
    let eig = hermitian_eig(&setup.system_hamiltonian(t1))?;
    let fidelity = state.population(&eig.vector(0)).clamp(0.0, 1.0);
    let success = eig.ground_space_population(state.matrix()).clamp(0.0, 1.0);
    Ok(Evaluation { state, fidelity, success })
}

/// Starts in the ground state of `H_S(t_start)` (meter in its initial
/// state) and propagates across the setup's window.
pub fn run_anneal(setup: &AnnealSetup, options: &AnnealOptions) -> Result<AnnealResult> {
    let rho0 = DensityMatrix::pure(&setup.initial_system_state()?);
    let mut integrator = options.integrator;
    let mut current = evaluate(setup, &rho0, &integrator, options.route)?;
    let mut change = None;
    let mut converged = true;

    if let Some(tol) = options.refine_tol {
        loop {
            let finer_integrator = integrator.doubled();
            let finer = evaluate(setup, &rho0, &finer_integrator, options.route)?;
            let delta = (finer.fidelity - current.fidelity).abs();
            integrator = finer_integrator;
            current = finer;
            change = Some(delta);
            if delta < tol {
                break;
            }
            if integrator.steps >= MAX_REFINE_STEPS {
                converged = false;
                break;
            }
        }
        converged &= change.is_some_and(|d| d <= CONVERGENCE_TOL);
    } else if options.convergence_check {
        let finer = evaluate(setup, &rho0, &integrator.doubled(), options.route)?;
        let delta = (finer.fidelity - current.fidelity).abs();
        change = Some(delta);
        converged = delta <= CONVERGENCE_TOL;
    }

    Ok(AnnealResult {
        state: current.state,
        fidelity: current.fidelity,
        success_probability: current.success,
        duration: setup.duration(),
        steps: integrator.steps,
        step_doubling_change: change,
        converged,
    })
}

/// Landau-Zener infidelity `exp(-pi (g/2)^2 / (v/2))`.
pub fn lz_infidelity(v: f64, g: f64) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!("sweep rate must be positive, got {v}")));
    }
    Ok((-std::f64::consts::PI * (0.5 * g).powi(2) / (0.5 * v)).exp())
}

/// Matrix element, gap and `|M| / g^2` at schedule position `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdiabaticityFactor {
    pub s: f64,
    /// `|<E_0| dH/ds |E_k>|`.
    pub matrix_element: f64,
    pub gap: f64,
    pub factor: f64,
    /// Index `k` of the level connected to the ground state.
    pub level: usize,
}

/// `H(s)` and `dH/ds` as seen by the adiabatic condition.
///
/// With a commuting meter prepared in an eigenstate `m` of `X_M` the
/// dynamics never leaves the block `H_S + m Y_S`, which is used directly;
/// otherwise the full system-meter Hamiltonian is used.
fn path_at(setup: &AnnealSetup, s: f64) -> Result<(HermitianOperator, HermitianOperator)> {
    setup.validate()?;
    let h = setup.problem.at(s);
    let dh = setup.problem.derivative(s);
    let meter = match (&setup.meter, setup.coupled()) {
        (Some(m), true) => m,
        _ => return Ok((h, dh)),
    };
    let hf = setup.problem.problem_term();
    // Y(s) and dY/ds
    let (y, dy) = match (setup.mode, hf) {
        (InteractionMode::Full, _) => (h.clone(), dh.clone()),
        (InteractionMode::Constrained, Some(hf)) => (hf * s, hf.clone()),
        _ => return Err(Error::Setup("constrained coupling requires an annealing (Ising) problem".into())),
    };
    let eigen_m = if meter.is_commuting() { meter.initial_eigenvalue() } else { None };
    if let Some(m) = eigen_m {
        return Ok((&h + &(&y * m), &dh + &(&dy * m)));
    }
    let id_m = HermitianOperator::identity(meter.dim());
    let id_s = HermitianOperator::identity(setup.system_dim());
    let total = &(&tensor(&h, &id_m) + &tensor(&y, &meter.x_m)) + &tensor(&id_s, &meter.h_m);
    let d_total = &tensor(&dh, &id_m) + &tensor(&dy, &meter.x_m);
    Ok((total, d_total))
}

/// `|M| / g^2` between the ground state and the lowest level it is
/// connected to by `dH/ds`.
pub fn adiabaticity_factor(setup: &AnnealSetup, s: f64) -> Result<AdiabaticityFactor> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("schedule position {s} outside [0, 1]")));
    }
    let (h, dh) = path_at(setup, s)?;
    let eig = hermitian_eig(&h)?;
    if eig.ground_space_dim() > 1 {
        return Err(Error::Degenerate { gap: eig.values[1] - eig.values[0] });
    }
    let dh_basis = eig.to_eigenbasis(dh.matrix());
    let threshold = 1e-10 * dh.max_abs().max(1.0);
    let level = (1..eig.dim())
        .find(|&k| dh_basis[(0, k)].norm() > threshold)
        .ok_or(Error::VanishingMatrixElement)?;
    let m = dh_basis[(0, level)].norm();
    let gap = eig.values[level] - eig.values[0];
    if gap < 1e-9 {
        return Err(Error::Degenerate { gap });
    }
    Ok(AdiabaticityFactor { s, matrix_element: m, gap, factor: m / (gap * gap), level })
}

/// Schedule saturating `(ds/dt) |M| / g^2 = epsilon`, tabulated on
/// `samples` evenly spaced values of `s` and integrated with the
/// trapezoidal rule.
pub fn local_adiabatic_schedule(setup: &AnnealSetup, epsilon: f64, samples: usize) -> Result<Schedule> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let s_grid: Vec<f64> = (0..samples).map(|k| k as f64 / (samples - 1) as f64).collect();
    let rates = s_grid
        .iter()
        .map(|&s| match adiabaticity_factor(setup, s) {
            Ok(a) => Ok(a.factor / epsilon),
            Err(Error::VanishingMatrixElement) => Ok(0.0),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut times = Vec::with_capacity(samples);
    times.push(0.0);
    for k in 1..samples {
        let dt = 0.5 * (rates[k - 1] + rates[k]) * (s_grid[k] - s_grid[k - 1]);
        times.push(times[k - 1] + dt);
    }
    let mut values = s_grid;
    *values.last_mut().expect("at least two samples") = 1.0;
    Schedule::tabulated(times, values)
}
