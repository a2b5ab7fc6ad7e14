//! Dense complex linear algebra used by every other module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Tensor products always place
//! the system factor first and the meter factor second, and qubit site 0 is
//! the most significant bit of a basis index.

mod eig;
mod operator;
mod propagate;
mod tensor;

pub use eig::{align_eigenbasis, hermitian_eig, EigenDecomposition, PhaseConvention};
pub use operator::{DensityMatrix, HermitianOperator, StateVector};
pub use propagate::{
    expm_action, expm_unitary, propagate, Integrator, SliceMethod, Trajectory, DEFAULT_STEPS,
};
pub use tensor::{
    partial_trace_meter, pauli, pauli_string, tensor, tensor_density, tensor_state, Axis,
};
pub(crate) use tensor::{partial_trace_meter_matrix, partial_trace_system_matrix};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Absolute Hermiticity tolerance, scaled by `max(1, max|M_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on state norms and density-matrix traces.
pub const NORM_TOL: f64 = 1e-10;
/// Relative tolerance (in units of the operator norm) for treating two
/// eigenvalues as one degenerate level.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Max-norm of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Max column sum, an upper bound on the spectral norm.
pub fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `A B - B A`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `max |U^dag U - I|`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(n, n))
}
