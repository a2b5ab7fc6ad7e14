use serde::{Deserialize, Serialize};

use super::{c, CMatrix, DensityMatrix, HermitianOperator, StateVector};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Single-qubit Pauli matrix. `sigma_z |0> = |0>`, `sigma_z |1> = -|1>`.
pub fn pauli(axis: Axis) -> HermitianOperator {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let m = match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    };
    HermitianOperator::from_matrix_unchecked(m)
}

/// Kronecker product `a ⊗ b` of Hermitian operators (system first, meter second).
pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::from_matrix_unchecked(a.matrix().kronecker(b.matrix()))
}

pub fn tensor_state(a: &StateVector, b: &StateVector) -> StateVector {
    StateVector::from_vector_unchecked(a.amplitudes().kronecker(b.amplitudes()))
}

pub fn tensor_density(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_matrix_unchecked(a.matrix().kronecker(b.matrix()))
}

/// `Tr_M rho` for `rho` on `system ⊗ meter`.
pub fn partial_trace_meter(
    rho: &DensityMatrix,
    system_dim: usize,
    meter_dim: usize,
) -> Result<DensityMatrix> {
    let m = partial_trace_meter_matrix(rho.matrix(), system_dim, meter_dim)?;
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

pub(crate) fn partial_trace_meter_matrix(
    rho: &CMatrix,
    system_dim: usize,
    meter_dim: usize,
) -> Result<CMatrix> {
    let expected = system_dim * meter_dim;
    if rho.nrows() != expected || rho.ncols() != expected {
        return Err(Error::DimensionMismatch { expected, actual: rho.nrows() });
    }
    Ok(CMatrix::from_fn(system_dim, system_dim, |i, j| {
        (0..meter_dim).map(|a| rho[(i * meter_dim + a, j * meter_dim + a)]).sum()
    }))
}

/// `Tr_S rho` for `rho` on `system ⊗ meter`.
pub(crate) fn partial_trace_system_matrix(
    rho: &CMatrix,
    system_dim: usize,
    meter_dim: usize,
) -> Result<CMatrix> {
    let expected = system_dim * meter_dim;
    if rho.nrows() != expected {
        return Err(Error::DimensionMismatch { expected, actual: rho.nrows() });
    }
    Ok(CMatrix::from_fn(meter_dim, meter_dim, |a, b| {
        (0..system_dim).map(|i| rho[(i * meter_dim + a, i * meter_dim + b)]).sum()
    }))
}

/// Tensor product of Pauli factors on the listed sites with identities
/// elsewhere. Site 0 is the leftmost (most significant) factor.
pub fn pauli_string(n_qubits: usize, factors: &[(usize, Axis)]) -> Result<HermitianOperator> {
    let mut slots: Vec<Option<Axis>> = vec![None; n_qubits];
    for &(site, axis) in factors {
        if site >= n_qubits {
            return Err(Error::SiteOutOfRange { site, n_qubits });
        }
        if slots[site].is_some() {
            return Err(Error::DuplicateSite(site));
        }
        slots[site] = Some(axis);
    }
    // diagonal fast path: products of sigma_z only
    if factors.iter().all(|&(_, a)| a == Axis::Z) {
        let dim = 1usize << n_qubits;
        let diag: Vec<f64> = (0..dim)
            .map(|k| {
                let flips = factors
                    .iter()
                    .filter(|&&(site, _)| (k >> (n_qubits - 1 - site)) & 1 == 1)
                    .count();
                if flips % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        return Ok(HermitianOperator::from_real_diagonal(&diag));
    }
    let mut out = CMatrix::identity(1, 1);
    for slot in slots {
        let factor = match slot {
            Some(axis) => pauli(axis).into_matrix(),
            None => CMatrix::identity(2, 2),
        };
        out = out.kronecker(&factor);
    }
    Ok(HermitianOperator::from_matrix_unchecked(out))
}
