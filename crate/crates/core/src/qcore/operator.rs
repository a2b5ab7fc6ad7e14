use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::{c, max_abs, CMatrix, CVector, HERMITIAN_TOL, NORM_TOL};
use crate::{Error, Result};

/// Dense Hermitian matrix. Construction checks Hermiticity and stores the
/// exactly symmetrised matrix `(M + M^dag) / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        let asymmetry = max_asymmetry(&matrix);
        let scale = max_abs(&matrix).max(1.0);
        if asymmetry > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Self::from_matrix_unchecked(symmetrize(matrix)))
    }

    /// Skips validation; callers guarantee Hermiticity by construction.
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, actual: data.len() });
        }
        Self::new(CMatrix::from_fn(rows, cols, |i, j| c(data[i * cols + j], 0.0)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = c(d, 0.0);
        }
        Self { matrix: m }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: CMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim) }
    }

    /// `|v><v|` for a normalised state.
    pub fn projector(state: &StateVector) -> Self {
        let v = state.amplitudes();
        Self { matrix: v * v.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { matrix: &self.matrix * c(factor, 0.0) }
    }

    /// Max-norm of the commutator with `other`.
    pub fn commutator_norm(&self, other: &Self) -> f64 {
        max_abs(&super::commutator(&self.matrix, &other.matrix))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// Real diagonal, meaningful for diagonal operators such as Ising terms.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    pub fn expectation(&self, state: &StateVector) -> f64 {
        let v = state.amplitudes();
        v.dotc(&(&self.matrix * v)).re
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)] == Complex64::new(0.0, 0.0)))
    }
}

fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn symmetrize(m: CMatrix) -> CMatrix {
    let adj = m.adjoint();
    (m + adj) * c(0.5, 0.0)
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { matrix: &self.matrix + &rhs.matrix }
    }
}

impl Add for HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { matrix: self.matrix + rhs.matrix }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { matrix: &self.matrix - &rhs.matrix }
    }
}

impl Neg for &HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        HermitianOperator { matrix: -&self.matrix }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scaled(rhs)
    }
}

impl Mul<f64> for HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        HermitianOperator { matrix: self.matrix * c(rhs, 0.0) }
    }
}

/// Normalised pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes: amplitudes / c(norm, 0.0) })
    }

    pub(crate) fn from_vector_unchecked(amplitudes: CVector) -> Self {
        Self { amplitudes }
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::normalized(CVector::from_iterator(values.len(), values.iter().map(|&x| c(x, 0.0))))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = c(1.0, 0.0);
        Self { amplitudes: v }
    }

    /// `|0>`, the +1 eigenstate of sigma_z.
    pub fn zero() -> Self {
        Self::basis(2, 0)
    }

    /// `|1>`, the -1 eigenstate of sigma_z.
    pub fn one() -> Self {
        Self::basis(2, 1)
    }

    /// `(|0> + |1>)/sqrt 2`.
    pub fn plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self { amplitudes: CVector::from_vec(vec![c(s, 0.0), c(s, 0.0)]) }
    }

    /// `(|0> - |1>)/sqrt 2`.
    pub fn minus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self { amplitudes: CVector::from_vec(vec![c(s, 0.0), c(-s, 0.0)]) }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_vector(self) -> CVector {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|<self|other>|^2`.
    pub fn overlap(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }
}

/// Trace-one positive semidefinite Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-10) and positivity
    /// (eigenvalues >= -1e-10).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let op = HermitianOperator::new(matrix)
            .map_err(|e| Error::InvalidDensityMatrix(e.to_string()))?;
        let trace = op.matrix().trace();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace = {trace}")));
        }
        let eig = super::hermitian_eig(&op)?;
        if let Some(&lowest) = eig.values.first() {
            if lowest < -NORM_TOL {
                return Err(Error::InvalidDensityMatrix(format!(
                    "negative eigenvalue {lowest:.3e}"
                )));
            }
        }
        Ok(Self { matrix: op.into_matrix() })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn pure(state: &StateVector) -> Self {
        let v = state.amplitudes();
        Self { matrix: v * v.adjoint() }
    }

    /// `sum_k w_k |psi_k><psi_k|` with weights summing to one.
    pub fn mixture(ensemble: &[(f64, StateVector)]) -> Result<Self> {
        let dim = ensemble
            .first()
            .map(|(_, s)| s.dim())
            .ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?;
        let mut m = CMatrix::zeros(dim, dim);
        for (w, s) in ensemble {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: s.dim() });
            }
            let v = s.amplitudes();
            m += v * v.adjoint() * c(*w, 0.0);
        }
        Self::new(m)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim) * c(1.0 / dim as f64, 0.0) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        // Tr(rho rho) = sum_ij |rho_ij|^2 for Hermitian rho
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<psi|rho|psi>`.
    pub fn population(&self, state: &StateVector) -> f64 {
        let v = state.amplitudes();
        v.dotc(&(&self.matrix * v)).re
    }

    /// `U rho U^dag`.
    pub fn conjugated(&self, unitary: &CMatrix) -> Self {
        Self { matrix: unitary * &self.matrix * unitary.adjoint() }
    }

    /// Eigen-ensemble `{(p_k, |k>)}` with `p_k > cutoff`.
    pub fn ensemble(&self, cutoff: f64) -> Result<Vec<(f64, StateVector)>> {
        let eig = super::hermitian_eig(&HermitianOperator::from_matrix_unchecked(self.matrix.clone()))?;
        Ok(eig
            .values
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > cutoff)
            .map(|(k, &p)| (p, StateVector::from_vector_unchecked(eig.vectors.column(k).into_owned())))
            .collect())
    }
}
