use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::meter::MeterSpec;
use super::problem::{ising_hamiltonian, transverse_hamiltonian, IsingProblem};
use super::schedule::Schedule;
use crate::qcore::{hermitian_eig, pauli, tensor, Axis, HermitianOperator, StateVector};
use crate::{Error, Result};

/// The Landau-Zener ramp covers `v t` in `[-LZ_RAMP, +LZ_RAMP]`, i.e.
/// `t` in `[-10/v, +10/v]` and `T = 20 / v`.
pub const LZ_RAMP: f64 = 10.0;

/// A Hamiltonian path `H(s)` for `s` in `[0, 1]`, with its analytic
/// derivative. Implement this for systems outside the built-in problems.
pub trait HamiltonianPath: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn at(&self, s: f64) -> HermitianOperator;
    fn derivative(&self, s: f64) -> HermitianOperator;
}

/// `(1 - s) H_T + s H_I` with both endpoints precomputed.
#[derive(Clone, Debug)]
pub struct IsingPath {
    pub ising: IsingProblem,
    pub transverse: HermitianOperator,
    pub problem: HermitianOperator,
}

impl IsingPath {
    pub fn new(ising: IsingProblem) -> Self {
        let transverse = transverse_hamiltonian(ising.n_qubits);
        let problem = ising_hamiltonian(&ising);
        Self { ising, transverse, problem }
    }
}

#[derive(Clone, Debug)]
pub enum Problem {
    /// Transverse-field annealing towards an Ising Hamiltonian.
    Ising(Arc<IsingPath>),
    /// `H(t) = (v t / 2) sigma_z + (g / 2) sigma_x` over the standard ramp.
    LandauZener { g: f64 },
    Custom(Arc<dyn HamiltonianPath>),
}

impl Problem {
    pub fn ising(p: IsingProblem) -> Self {
        Problem::Ising(Arc::new(IsingPath::new(p)))
    }

    pub fn dim(&self) -> usize {
        match self {
            Problem::Ising(p) => p.problem.dim(),
            Problem::LandauZener { .. } => 2,
            Problem::Custom(p) => p.dim(),
        }
    }

    /// `H(s)`.
    pub fn at(&self, s: f64) -> HermitianOperator {
        match self {
            Problem::Ising(p) => &(&p.transverse * (1.0 - s)) + &(&p.problem * s),
            Problem::LandauZener { g } => {
                pauli(Axis::Z) * (0.5 * LZ_RAMP * (2.0 * s - 1.0)) + pauli(Axis::X) * (0.5 * g)
            }
            Problem::Custom(p) => p.at(s),
        }
    }

    /// `dH/ds`.
    pub fn derivative(&self, s: f64) -> HermitianOperator {
        match self {
            Problem::Ising(p) => &p.problem - &p.transverse,
            Problem::LandauZener { .. } => pauli(Axis::Z) * LZ_RAMP,
            Problem::Custom(p) => p.derivative(s),
        }
    }

    /// Final (problem) Hamiltonian `H_f`, available for annealing problems.
    pub fn problem_term(&self) -> Option<&HermitianOperator> {
        match self {
            Problem::Ising(p) => Some(&p.problem),
            _ => None,
        }
    }

    pub fn ising_problem(&self) -> Option<&IsingProblem> {
        match self {
            Problem::Ising(p) => Some(&p.ising),
            _ => None,
        }
    }

    pub fn lz_gap(&self) -> Option<f64> {
        match self {
            Problem::LandauZener { g } => Some(*g),
            _ => None,
        }
    }
}

/// How the meter couples to the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionMode {
    /// No coupling: `H_S(t)` alone (the meter, if any, is ignored).
    #[default]
    None,
    /// `H_S ⊗ 1 + H_S ⊗ X_M + 1 ⊗ H_M`.
    #[serde(alias = "full_qnd")]
    Full,
    /// `H_S ⊗ 1 + f(t) H_f ⊗ X_M + 1 ⊗ H_M`.
    Constrained,
}

/// One protocol run: problem, schedule, optional meter and coupling mode.
#[derive(Clone, Debug)]
pub struct AnnealSetup {
    pub problem: Problem,
    pub schedule: Schedule,
    pub meter: Option<MeterSpec>,
    pub mode: InteractionMode,
}

impl AnnealSetup {
    pub fn new(problem: Problem, schedule: Schedule) -> Self {
        Self { problem, schedule, meter: None, mode: InteractionMode::None }
    }

    /// Linear anneal `(1 - t/T) H_T + (t/T) H_I`.
    pub fn ising(ising: IsingProblem, duration: f64) -> Result<Self> {
        Ok(Self::new(Problem::ising(ising), Schedule::linear(duration)?))
    }

    /// Landau-Zener ramp of total duration `T`, i.e. sweep rate `v = 20/T`.
    pub fn landau_zener(g: f64, duration: f64) -> Result<Self> {
        Ok(Self::new(Problem::LandauZener { g }, Schedule::linear(duration)?))
    }

    /// Landau-Zener ramp specified by its sweep rate.
    pub fn landau_zener_rate(v: f64, g: f64) -> Result<Self> {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("sweep rate must be positive, got {v}")));
        }
        Self::landau_zener(g, 2.0 * LZ_RAMP / v)
    }

    pub fn with_meter(mut self, meter: MeterSpec, mode: InteractionMode) -> Result<Self> {
        self.meter = Some(meter);
        self.mode = mode;
        self.validate()?;
        Ok(self)
    }

    pub fn without_meter(mut self) -> Self {
        self.meter = None;
        self.mode = InteractionMode::None;
        self
    }

    pub fn with_duration(&self, duration: f64) -> Result<Self> {
        let mut out = self.clone();
        out.schedule = self.schedule.with_duration(duration)?;
        Ok(out)
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match (self.mode, &self.meter) {
            (InteractionMode::None, _) => Ok(()),
            (_, None) => Err(Error::Setup(format!("interaction mode {:?} requires a meter", self.mode))),
            (InteractionMode::Constrained, Some(_)) if self.problem.problem_term().is_none() => Err(
                Error::Setup("constrained coupling requires an annealing (Ising) problem".into()),
            ),
            _ => Ok(()),
        }
    }

    pub fn duration(&self) -> f64 {
        self.schedule.duration
    }

    /// `(t_start, t_end)`: `(0, T)` for annealing, `(-T/2, T/2)` for the
    /// Landau-Zener ramp.
    pub fn window(&self) -> (f64, f64) {
        let t = self.duration();
        match self.problem {
            Problem::LandauZener { .. } => (-0.5 * t, 0.5 * t),
            _ => (0.0, t),
        }
    }

    /// Sweep rate `v = 20 / T` of a Landau-Zener setup.
    pub fn sweep_rate(&self) -> Option<f64> {
        self.problem.lz_gap().map(|_| 2.0 * LZ_RAMP / self.duration())
    }

    /// Schedule value `f(t)` at absolute time `t`.
    pub fn fraction(&self, t: f64) -> f64 {
        self.schedule.value(t - self.window().0)
    }

    pub fn system_dim(&self) -> usize {
        self.problem.dim()
    }

    pub fn coupled(&self) -> bool {
        self.mode != InteractionMode::None && self.meter.is_some()
    }

    pub fn total_dim(&self) -> usize {
        match (&self.meter, self.coupled()) {
            (Some(m), true) => self.system_dim() * m.dim(),
            _ => self.system_dim(),
        }
    }

    /// `H_S(t)`.
    pub fn system_hamiltonian(&self, t: f64) -> HermitianOperator {
        self.problem.at(self.fraction(t))
    }

    /// System factor `Y_S(t)` of the interaction `Y_S(t) ⊗ X_M`.
    pub fn interaction_operator(&self, t: f64) -> Result<HermitianOperator> {
        self.validate()?;
        Ok(self.interaction_unchecked(t))
    }

    fn interaction_unchecked(&self, t: f64) -> HermitianOperator {
        match (self.mode, self.problem.problem_term()) {
            (InteractionMode::Full, _) => self.system_hamiltonian(t),
            (InteractionMode::Constrained, Some(hf)) => hf * self.fraction(t),
            _ => HermitianOperator::zeros(self.system_dim()),
        }
    }

    /// `H_S(t) + m Y_S(t)`: the system Hamiltonian seen by meter branch `m`.
    pub fn branch_hamiltonian(&self, t: f64, m: f64) -> Result<HermitianOperator> {
        self.validate()?;
        Ok(self.branch_unchecked(t, m))
    }

    pub(crate) fn branch_unchecked(&self, t: f64, m: f64) -> HermitianOperator {
        let hs = self.system_hamiltonian(t);
        match (self.mode, self.problem.problem_term()) {
            (InteractionMode::Full, _) => hs * (1.0 + m),
            (InteractionMode::Constrained, Some(hf)) => &hs + &(hf * (m * self.fraction(t))),
            _ => hs,
        }
    }

    /// Total system ⊗ meter Hamiltonian (or `H_S(t)` when uncoupled).
    pub fn total_hamiltonian(&self, t: f64) -> Result<HermitianOperator> {
        self.validate()?;
        Ok(self.total_unchecked(t))
    }

    pub(crate) fn total_unchecked(&self, t: f64) -> HermitianOperator {
        let meter = match (&self.meter, self.coupled()) {
            (Some(m), true) => m,
            _ => return self.system_hamiltonian(t),
        };
        let hs = self.system_hamiltonian(t);
        let id_m = HermitianOperator::identity(meter.dim());
        let id_s = HermitianOperator::identity(self.system_dim());
        let coupling = tensor(&self.interaction_unchecked(t), &meter.x_m);
        &(&tensor(&hs, &id_m) + &coupling) + &tensor(&id_s, &meter.h_m)
    }

    /// Ground state of `H_S(t_start)`.
    pub fn initial_system_state(&self) -> Result<StateVector> {
        let eig = hermitian_eig(&self.system_hamiltonian(self.window().0))?;
        if eig.ground_space_dim() > 1 {
            return Err(Error::Degenerate { gap: eig.values[1] - eig.values[0] });
        }
        Ok(eig.vector(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::meter::MeterState;
    use crate::qcore::{max_abs_diff, CMatrix};

    fn sample_ising() -> IsingProblem {
        IsingProblem::new(
            vec![vec![0.0, 0.3, 0.8], vec![0.3, 0.0, 0.1], vec![0.8, 0.1, 0.0]],
            vec![0.2, 0.9, 0.4],
        )
        .unwrap()
    }

    #[test]
    fn annealing_endpoints_exact() {
        let setup = AnnealSetup::ising(sample_ising(), 5.0).unwrap();
        assert_eq!(setup.system_hamiltonian(0.0), transverse_hamiltonian(3));
        assert_eq!(setup.system_hamiltonian(5.0), ising_hamiltonian(&sample_ising()));
    }

    #[test]
    fn lz_arithmetic() {
        let setup = AnnealSetup::landau_zener_rate(1.0, 1.0).unwrap();
        assert_eq!(setup.window(), (-10.0, 10.0));
        let h = setup.system_hamiltonian(2.0);
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[1.0, 0.5, 0.5, -1.0].map(|x| num_complex::Complex64::new(x, 0.0)),
        );
        assert!(max_abs_diff(h.matrix(), &expected) < 1e-12);
    }

    #[test]
    fn full_qnd_is_block_diagonal_with_rescaled_blocks() {
        let x0 = 1.7;
        let setup = AnnealSetup::landau_zener(1.0, 20.0)
            .unwrap()
            .with_meter(MeterSpec::qubit(x0, 0.0, MeterState::Plus), InteractionMode::Full)
            .unwrap();
        let t = 3.3;
        let total = setup.total_hamiltonian(t).unwrap();
        let hs = setup.system_hamiltonian(t);
        for i in 0..2 {
            for j in 0..2 {
                let upper = total.matrix()[(2 * i, 2 * j)];
                let lower = total.matrix()[(2 * i + 1, 2 * j + 1)];
                assert!((upper - hs.matrix()[(i, j)] * (1.0 + x0)).norm() < 1e-12);
                assert!((lower - hs.matrix()[(i, j)] * (1.0 - x0)).norm() < 1e-12);
                assert_eq!(total.matrix()[(2 * i, 2 * j + 1)].norm(), 0.0);
            }
        }
    }

    #[test]
    fn zero_coupling_reduces_to_uncoupled_sum() {
        let setup = AnnealSetup::ising(sample_ising(), 4.0)
            .unwrap()
            .with_meter(MeterSpec::qubit(0.0, 0.7, MeterState::Zero), InteractionMode::Full)
            .unwrap();
        let t = 1.3;
        let expected = &tensor(&setup.system_hamiltonian(t), &HermitianOperator::identity(2))
            + &tensor(&HermitianOperator::identity(8), &(pauli(Axis::X) * 0.7));
        assert!(max_abs_diff(setup.total_hamiltonian(t).unwrap().matrix(), expected.matrix()) < 1e-14);
    }

    #[test]
    fn constrained_at_start_has_no_coupling() {
        let setup = AnnealSetup::ising(sample_ising(), 4.0)
            .unwrap()
            .with_meter(MeterSpec::qubit(2.0, 0.3, MeterState::Zero), InteractionMode::Constrained)
            .unwrap();
        let expected = &tensor(&transverse_hamiltonian(3), &HermitianOperator::identity(2))
            + &tensor(&HermitianOperator::identity(8), &(pauli(Axis::X) * 0.3));
        assert!(max_abs_diff(setup.total_hamiltonian(0.0).unwrap().matrix(), expected.matrix()) < 1e-14);
    }

    #[test]
    fn constrained_requires_ising() {
        let err = AnnealSetup::landau_zener(1.0, 5.0)
            .unwrap()
            .with_meter(MeterSpec::qubit(2.0, 0.0, MeterState::Zero), InteractionMode::Constrained);
        assert!(matches!(err, Err(Error::Setup(_))));
    }

    #[test]
    fn coupled_mode_requires_meter() {
        let mut setup = AnnealSetup::landau_zener(1.0, 5.0).unwrap();
        setup.mode = InteractionMode::Full;
        assert!(setup.total_hamiltonian(0.0).is_err());
    }
}
