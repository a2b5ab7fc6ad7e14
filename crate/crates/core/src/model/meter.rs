use serde::{Deserialize, Serialize};

use crate::qcore::{hermitian_eig, pauli, Axis, DensityMatrix, EigenDecomposition, HermitianOperator, StateVector};
use crate::{Error, Result};

/// Tolerance on `||[X_M, H_M]||_max` for treating the meter as commuting.
pub const COMMUTING_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeterState {
    /// `|0>`, eigenvalue +1 of sigma_z.
    Zero,
    /// `|1>`, eigenvalue -1 of sigma_z.
    One,
    Plus,
    Minus,
}

impl MeterState {
    pub fn state(self) -> StateVector {
        match self {
            MeterState::Zero => StateVector::zero(),
            MeterState::One => StateVector::one(),
            MeterState::Plus => StateVector::plus(),
            MeterState::Minus => StateVector::minus(),
        }
    }
}

/// Auxiliary quantum system: coupling operator `X_M`, own Hamiltonian `H_M`
/// and initial state.
#[derive(Clone, Debug)]
pub struct MeterSpec {
    pub x_m: HermitianOperator,
    pub h_m: HermitianOperator,
    pub initial: DensityMatrix,
    /// Coupling scale for the qubit preset `X_M = x0 sigma_z`.
    pub x0: Option<f64>,
    /// Frequency for the qubit preset `H_M = omega sigma_x`.
    pub omega: Option<f64>,
}

impl MeterSpec {
    pub fn new(x_m: HermitianOperator, h_m: HermitianOperator, initial: DensityMatrix) -> Result<Self> {
        if h_m.dim() != x_m.dim() {
            return Err(Error::DimensionMismatch { expected: x_m.dim(), actual: h_m.dim() });
        }
        if initial.dim() != x_m.dim() {
            return Err(Error::DimensionMismatch { expected: x_m.dim(), actual: initial.dim() });
        }
        Ok(Self { x_m, h_m, initial, x0: None, omega: None })
    }

    /// Qubit meter with `X_M = x0 sigma_z` and `H_M = omega sigma_x`.
    pub fn qubit(x0: f64, omega: f64, state: MeterState) -> Self {
        Self {
            x_m: pauli(Axis::Z) * x0,
            h_m: pauli(Axis::X) * omega,
            initial: DensityMatrix::pure(&state.state()),
            x0: Some(x0),
            omega: Some(omega),
        }
    }

    pub fn dim(&self) -> usize {
        self.x_m.dim()
    }

    pub fn commutator_norm(&self) -> f64 {
        self.x_m.commutator_norm(&self.h_m)
    }

    pub fn is_commuting(&self) -> bool {
        self.commutator_norm() <= COMMUTING_TOL * self.x_m.max_abs().max(self.h_m.max_abs()).max(1.0)
    }

    pub fn x_m_eigen(&self) -> Result<EigenDecomposition> {
        hermitian_eig(&self.x_m)
    }

    /// `(m_j, <m_j|rho_M|m_j>)` over the eigenbasis of `X_M`.
    pub fn branch_weights(&self) -> Result<Vec<(f64, f64)>> {
        let eig = self.x_m_eigen()?;
        Ok((0..eig.dim())
            .map(|k| (eig.values[k], self.initial.population(&eig.vector(k))))
            .collect())
    }

    /// Eigenvalue `m` when the initial meter state is (to 1e-10) a pure
    /// eigenstate of `X_M`.
    pub fn initial_eigenvalue(&self) -> Option<f64> {
        let weights = self.branch_weights().ok()?;
        let eig = self.x_m_eigen().ok()?;
        // weight may be split over a degenerate eigenspace
        let (mut best_m, mut best_w) = (0.0, 0.0);
        for k in 0..eig.dim() {
            let m = eig.values[k];
            let w: f64 = weights.iter().filter(|(mj, _)| (mj - m).abs() < 1e-12).map(|(_, w)| w).sum();
            if w > best_w {
                best_w = w;
                best_m = m;
            }
        }
        ((1.0 - best_w).abs() < 1e-10).then_some(best_m)
    }
}
