use num_complex::Complex64;

use super::{c, hermitian_eig, one_norm, CMatrix, CVector, HermitianOperator, StateVector};
use crate::{Error, Result};

/// Default number of time slices per protocol run.
pub const DEFAULT_STEPS: usize = 4000;

/// Largest `||H||_1 * dt` handled by one Taylor sub-step.
const SERIES_SUBSTEP_NORM: f64 = 3.0;
const SERIES_MAX_TERMS: usize = 80;
const SERIES_TOL: f64 = 1e-17;

/// `exp(-i H dt)` from the eigendecomposition of `H`.
pub fn expm_unitary(h: &HermitianOperator, dt: f64) -> Result<CMatrix> {
    if !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite time step {dt}")));
    }
    let eig = hermitian_eig(h)?;
    Ok(unitary_from_eig(&eig.values, &eig.vectors, dt))
}

fn unitary_from_eig(values: &[f64], vectors: &CMatrix, dt: f64) -> CMatrix {
    let mut scaled = vectors.clone();
    for (k, &lam) in values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -lam * dt);
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= phase);
    }
    scaled * vectors.adjoint()
}

/// `exp(-i H dt) v` by a scaled Taylor series summed to round-off.
pub fn expm_action(h: &CMatrix, dt: f64, v: &CVector) -> CVector {
    let n = v.len();
    let mut out = v.clone();
    let mut term = CVector::zeros(n);
    let mut next = CVector::zeros(n);
    series_step_vector(h, dt, &mut out, &mut term, &mut next);
    out
}

fn substeps(h: &CMatrix, dt: f64) -> (usize, f64) {
    let norm = one_norm(h) * dt.abs();
    let sub = ((norm / SERIES_SUBSTEP_NORM).ceil() as usize).max(1);
    (sub, dt / sub as f64)
}

fn series_step_vector(h: &CMatrix, dt: f64, v: &mut CVector, term: &mut CVector, next: &mut CVector) {
    let (sub, tau) = substeps(h, dt);
    let zero = c(0.0, 0.0);
    for _ in 0..sub {
        term.copy_from(v);
        for k in 1..=SERIES_MAX_TERMS {
            next.gemv(c(0.0, -tau / k as f64), h, term, zero);
            std::mem::swap(term, next);
            *v += &*term;
            if term.norm() <= SERIES_TOL * v.norm() {
                break;
            }
        }
    }
}

fn series_step_matrix(h: &CMatrix, dt: f64, u: &mut CMatrix, term: &mut CMatrix, next: &mut CMatrix) {
    let (sub, tau) = substeps(h, dt);
    let zero = c(0.0, 0.0);
    for _ in 0..sub {
        term.copy_from(u);
        for k in 1..=SERIES_MAX_TERMS {
            next.gemm(c(0.0, -tau / k as f64), h, term, zero);
            std::mem::swap(term, next);
            *u += &*term;
            if term.norm() <= SERIES_TOL * u.norm() {
                break;
            }
        }
    }
}

/// How each constant-Hamiltonian slice is exponentiated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SliceMethod {
    /// Exact exponential through the eigendecomposition of every slice.
    Eigen,
    /// Taylor series of the slice exponential, summed to round-off.
    Series,
    /// `Eigen` up to dimension 8 (16 for full propagators), `Series` above.
    #[default]
    Auto,
}

impl SliceMethod {
    fn resolve(self, dim: usize, full_propagator: bool) -> SliceMethod {
        match self {
            SliceMethod::Auto => {
                let limit = if full_propagator { 16 } else { 8 };
                if dim <= limit {
                    SliceMethod::Eigen
                } else {
                    SliceMethod::Series
                }
            }
            m => m,
        }
    }
}

/// Time-ordered states together with the grid that produced them.
#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub steps: usize,
}

impl<S> Trajectory<S> {
    pub fn last(&self) -> Option<&S> {
        self.states.last()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Midpoint piecewise-constant propagation: on each slice `[t_k, t_k+dt]`
/// the Hamiltonian is frozen at `t_k + dt/2` and exponentiated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Integrator {
    pub steps: usize,
    pub method: SliceMethod,
}

impl Default for Integrator {
    fn default() -> Self {
        Self { steps: DEFAULT_STEPS, method: SliceMethod::Auto }
    }
}

impl Integrator {
    pub fn new(steps: usize) -> Self {
        Self { steps, method: SliceMethod::Auto }
    }

    pub fn with_method(mut self, method: SliceMethod) -> Self {
        self.method = method;
        self
    }

    pub fn doubled(self) -> Self {
        Self { steps: self.steps * 2, ..self }
    }

    fn check(&self, t0: f64, t1: f64) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        if !(t0.is_finite() && t1.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite time window [{t0}, {t1}]")));
        }
        Ok(())
    }

    /// Final state only.
    pub fn final_state<F>(&self, hamiltonian: F, psi0: &StateVector, t0: f64, t1: f64) -> Result<StateVector>
    where
        F: Fn(f64) -> HermitianOperator,
    {
        self.check(t0, t1)?;
        let mut stepper = VectorStepper::new(psi0.amplitudes().clone(), self.method);
        let dt = (t1 - t0) / self.steps as f64;
        for k in 0..self.steps {
            let h = hamiltonian(t0 + (k as f64 + 0.5) * dt);
            stepper.step(&h, dt)?;
        }
        Ok(StateVector::from_vector_unchecked(stepper.v))
    }

    /// Every intermediate state, `steps + 1` entries including `psi0`.
    pub fn trajectory<F>(&self, hamiltonian: F, psi0: &StateVector, t0: f64, t1: f64) -> Result<Trajectory<StateVector>>
    where
        F: Fn(f64) -> HermitianOperator,
    {
        self.check(t0, t1)?;
        let dt = (t1 - t0) / self.steps as f64;
        let mut stepper = VectorStepper::new(psi0.amplitudes().clone(), self.method);
        let mut times = Vec::with_capacity(self.steps + 1);
        let mut states = Vec::with_capacity(self.steps + 1);
        times.push(t0);
        states.push(psi0.clone());
        for k in 0..self.steps {
            let h = hamiltonian(t0 + (k as f64 + 0.5) * dt);
            stepper.step(&h, dt)?;
            times.push(t0 + (k + 1) as f64 * dt);
            states.push(StateVector::from_vector_unchecked(stepper.v.clone()));
        }
        if let Some(t) = times.last_mut() {
            *t = t1;
        }
        Ok(Trajectory { times, states, steps: self.steps })
    }

    /// States at each point of `grid` (ascending, first entry is the start).
    /// The interval between neighbouring grid points gets a share of
    /// `steps` proportional to its length, at least one slice.
    pub fn states_on_grid<F>(&self, hamiltonian: F, psi0: &StateVector, grid: &[f64]) -> Result<Vec<StateVector>>
    where
        F: Fn(f64) -> HermitianOperator,
    {
        let (first, last) = match (grid.first(), grid.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Ok(Vec::new()),
        };
        self.check(first, last)?;
        let total = last - first;
        let mut stepper = VectorStepper::new(psi0.amplitudes().clone(), self.method);
        let mut out = Vec::with_capacity(grid.len());
        out.push(psi0.clone());
        for w in grid.windows(2) {
            let span = w[1] - w[0];
            let slices = if total > 0.0 {
                ((self.steps as f64 * span / total).round() as usize).max(1)
            } else {
                1
            };
            let dt = span / slices as f64;
            for k in 0..slices {
                let h = hamiltonian(w[0] + (k as f64 + 0.5) * dt);
                stepper.step(&h, dt)?;
            }
            out.push(StateVector::from_vector_unchecked(stepper.v.clone()));
        }
        Ok(out)
    }

    /// Full unitary `U(t1, t0)` of dimension `dim`.
    pub fn propagator<F>(&self, hamiltonian: F, dim: usize, t0: f64, t1: f64) -> Result<CMatrix>
    where
        F: Fn(f64) -> HermitianOperator,
    {
        self.check(t0, t1)?;
        let dt = (t1 - t0) / self.steps as f64;
        let method = self.method.resolve(dim, true);
        let mut u = CMatrix::identity(dim, dim);
        let mut term = CMatrix::zeros(dim, dim);
        let mut next = CMatrix::zeros(dim, dim);
        for k in 0..self.steps {
            let h = hamiltonian(t0 + (k as f64 + 0.5) * dt);
            if h.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: h.dim() });
            }
            match method {
                SliceMethod::Series => series_step_matrix(h.matrix(), dt, &mut u, &mut term, &mut next),
                _ => {
                    let slice = expm_unitary(&h, dt)?;
                    u = slice * u;
                }
            }
        }
        Ok(u)
    }
}

struct VectorStepper {
    v: CVector,
    term: CVector,
    next: CVector,
    method: SliceMethod,
}

impl VectorStepper {
    fn new(v: CVector, method: SliceMethod) -> Self {
        let n = v.len();
        let method = method.resolve(n, false);
        Self { v, term: CVector::zeros(n), next: CVector::zeros(n), method }
    }

    fn step(&mut self, h: &HermitianOperator, dt: f64) -> Result<()> {
        if h.dim() != self.v.len() {
            return Err(Error::DimensionMismatch { expected: self.v.len(), actual: h.dim() });
        }
        match self.method {
            SliceMethod::Series => series_step_vector(h.matrix(), dt, &mut self.v, &mut self.term, &mut self.next),
            _ => {
                let eig = hermitian_eig(h)?;
                let mut coeffs = eig.vectors.adjoint() * &self.v;
                for (k, &lam) in eig.values.iter().enumerate() {
                    coeffs[k] *= Complex64::from_polar(1.0, -lam * dt);
                }
                self.v = &eig.vectors * coeffs;
            }
        }
        Ok(())
    }
}

/// Trajectory under `hamiltonian` from `t0` to `t1` in `steps` midpoint slices.
pub fn propagate<F>(hamiltonian: F, psi0: &StateVector, t0: f64, t1: f64, steps: usize) -> Result<Trajectory<StateVector>>
where
    F: Fn(f64) -> HermitianOperator,
{
    Integrator::new(steps).trajectory(hamiltonian, psi0, t0, t1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{max_abs_diff, pauli, unitarity_error, Axis};
    use std::f64::consts::PI;

    #[test]
    fn zero_hamiltonian_gives_identity() {
        let u = expm_unitary(&HermitianOperator::zeros(3), 1.7).unwrap();
        assert!(max_abs_diff(&u, &CMatrix::identity(3, 3)) < 1e-15);
    }

    #[test]
    fn sigma_z_for_pi_is_minus_identity() {
        let u = expm_unitary(&pauli(Axis::Z), PI).unwrap();
        assert!(max_abs_diff(&u, &(-CMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn sigma_x_for_half_pi_is_minus_i_sigma_x() {
        let u = expm_unitary(&pauli(Axis::X), PI / 2.0).unwrap();
        let expected = pauli(Axis::X).matrix() * c(0.0, -1.0);
        assert!(max_abs_diff(&u, &expected) < 1e-14);
    }

    #[test]
    fn series_matches_eigen_exponential() {
        let h = HermitianOperator::from_real(3, 3, &[1.0, 0.3, -2.0, 0.3, -0.5, 0.7, -2.0, 0.7, 2.5]).unwrap();
        let v = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)]);
        for dt in [0.01, 0.7, 5.0] {
            let exact = expm_unitary(&h, dt).unwrap() * &v;
            let series = expm_action(h.matrix(), dt, &v);
            assert!((exact - series).norm() < 1e-13, "dt = {dt}");
        }
    }

    #[test]
    fn eigenstate_acquires_phase_only() {
        let h = pauli(Axis::X) * 0.8;
        let psi0 = StateVector::plus();
        let traj = propagate(|_| h.clone(), &psi0, 0.0, 3.0, 50).unwrap();
        let expected = psi0.amplitudes() * Complex64::from_polar(1.0, -0.8 * 3.0);
        assert!((traj.last().unwrap().amplitudes() - expected).norm() < 1e-12);
        assert_eq!(traj.len(), 51);
    }

    #[test]
    fn propagator_is_unitary_for_both_methods() {
        let h = |t: f64| pauli(Axis::Z) * t + pauli(Axis::X) * 0.5;
        for method in [SliceMethod::Eigen, SliceMethod::Series] {
            let u = Integrator::new(200).with_method(method).propagator(h, 2, -3.0, 3.0).unwrap();
            assert!(unitarity_error(&u) < 1e-12);
        }
    }

    #[test]
    fn slice_methods_agree() {
        let h = |t: f64| pauli(Axis::Z) * t + pauli(Axis::X) * 0.5;
        let a = Integrator::new(300).with_method(SliceMethod::Eigen).propagator(h, 2, -3.0, 3.0).unwrap();
        let b = Integrator::new(300).with_method(SliceMethod::Series).propagator(h, 2, -3.0, 3.0).unwrap();
        assert!((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn zero_steps_rejected() {
        let err = Integrator::new(0).final_state(|_| pauli(Axis::Z), &StateVector::zero(), 0.0, 1.0);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = Integrator::new(4).final_state(|_| HermitianOperator::zeros(4), &StateVector::zero(), 0.0, 1.0);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn grid_states_match_trajectory_endpoints() {
        let h = |t: f64| pauli(Axis::Z) * (0.5 * t) + pauli(Axis::X) * 0.5;
        let psi0 = StateVector::plus();
        let grid = [-2.0, -1.0, 0.5, 2.0];
        let integ = Integrator::new(400);
        let on_grid = integ.states_on_grid(h, &psi0, &grid).unwrap();
        let direct = integ.final_state(h, &psi0, -2.0, 2.0).unwrap();
        assert_eq!(on_grid.len(), 4);
        assert!(1.0 - on_grid[3].overlap(&direct) < 1e-9);
    }
}
