use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{c, CMatrix, HermitianOperator, StateVector, DEGENERACY_TOL};
use crate::Result;

/// How eigenvector phases were fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseConvention {
    /// Largest-magnitude component of each eigenvector is real and positive.
    LargestComponentReal,
    /// Each eigenvector has a real non-negative overlap with the matching
    /// eigenvector of a reference basis.
    AlignedToPrevious,
}

/// Eigenvalues in ascending order with column-orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
    pub phase: PhaseConvention,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> StateVector {
        StateVector::from_vector_unchecked(self.vectors.column(k).into_owned())
    }

    /// Number of levels within `1e-9 * max(1, max|E|)` of the lowest one.
    pub fn ground_space_dim(&self) -> usize {
        let scale = self.values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        let tol = DEGENERACY_TOL * scale;
        self.values.iter().take_while(|&&v| v - self.values[0] <= tol).count()
    }

    /// `E_1 - E_0` counted between distinct levels, i.e. the gap above the
    /// (possibly degenerate) ground space.
    pub fn ground_gap(&self) -> Option<f64> {
        let g = self.ground_space_dim();
        self.values.get(g).map(|&e| e - self.values[0])
    }

    /// `V diag(lambda) V^dag`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let lam = c(self.values[k], 0.0);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= lam);
        }
        scaled * self.vectors.adjoint()
    }

    /// `V^dag A V`: the matrix of `A` in this eigenbasis.
    pub fn to_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        self.vectors.adjoint() * a * &self.vectors
    }

    /// Population of the ground space in `rho` (given in the original basis).
    pub fn ground_space_population(&self, rho: &CMatrix) -> f64 {
        (0..self.ground_space_dim())
            .map(|k| {
                let v = self.vectors.column(k);
                v.dotc(&(rho * v)).re
            })
            .sum()
    }
}

/// Eigendecomposition of a Hermitian operator with ascending eigenvalues and
/// the largest-magnitude component of every eigenvector made real-positive.
///
/// Real symmetric input is routed through the real solver.
pub fn hermitian_eig(op: &HermitianOperator) -> Result<EigenDecomposition> {
    let m = op.matrix();
    let n = m.nrows();
    let (values, vectors) = if m.iter().all(|z| z.im == 0.0) {
        let real = DMatrix::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        let eig = real.symmetric_eigen();
        let vecs = CMatrix::from_fn(n, n, |i, j| c(eig.eigenvectors[(i, j)], 0.0));
        (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), vecs)
    } else {
        let eig = m.clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut sorted_vecs = CMatrix::zeros(n, n);
    let mut sorted_vals = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_vals.push(values[src]);
        let mut col = vectors.column(src).into_owned();
        fix_phase(col.as_mut_slice());
        sorted_vecs.set_column(dst, &col);
    }
    Ok(EigenDecomposition {
        values: sorted_vals,
        vectors: sorted_vecs,
        phase: PhaseConvention::LargestComponentReal,
    })
}

fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        // ties resolved towards the lower index, with a small slack so that
        // equal-magnitude components do not flip with round-off
        let mag = z.norm();
        if mag > best_mag * (1.0 + 1e-10) {
            best = i;
            best_mag = mag;
        }
    }
    if best_mag <= 0.0 {
        return;
    }
    let phase = v[best].conj() / best_mag;
    v.iter_mut().for_each(|z| *z *= phase);
}

/// Re-expresses `next` so that it continues `prev` smoothly.
///
/// With `track_branches` the columns of `next` are permuted greedily to
/// maximise `|<prev_k|next_k>|` (used where levels may cross); otherwise
/// the energy ordering is kept. Every column is then rephased so that its
/// overlap with the matching column of `prev` is real and non-negative.
pub fn align_eigenbasis(
    prev: &EigenDecomposition,
    next: &EigenDecomposition,
    track_branches: bool,
) -> EigenDecomposition {
    let n = next.dim();
    let overlaps = prev.vectors.adjoint() * &next.vectors;
    let mut assignment: Vec<usize> = (0..n).collect();
    if track_branches {
        let mut used = vec![false; n];
        let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                pairs.push((i, j, overlaps[(i, j)].norm()));
            }
        }
        pairs.sort_by(|a, b| b.2.total_cmp(&a.2));
        let mut done = vec![false; n];
        for (i, j, _) in pairs {
            if !done[i] && !used[j] {
                assignment[i] = j;
                done[i] = true;
                used[j] = true;
            }
        }
    }
    let mut values = Vec::with_capacity(n);
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &src) in assignment.iter().enumerate() {
        values.push(next.values[src]);
        let ov = overlaps[(k, src)];
        let mut col = next.vectors.column(src).into_owned();
        if ov.norm() > 1e-14 {
            let phase = ov.conj() / ov.norm();
            col.iter_mut().for_each(|z| *z *= phase);
        }
        vectors.set_column(k, &col);
    }
    EigenDecomposition { values, vectors, phase: PhaseConvention::AlignedToPrevious }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{pauli, Axis};

    #[test]
    fn pauli_z_spectrum() {
        let e = hermitian_eig(&pauli(Axis::Z)).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
        // |1> then |0>
        assert!((e.vectors[(1, 0)].re - 1.0).abs() < 1e-14);
        assert!((e.vectors[(0, 1)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_x_spectrum_and_phase() {
        let e = hermitian_eig(&pauli(Axis::X)).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // (|0> - |1>)/sqrt2 up to the real-positive largest component
        let v0 = e.vector(0);
        assert!((v0.amplitudes()[0].re.abs() - s).abs() < 1e-12);
        assert!((v0.amplitudes()[0] + v0.amplitudes()[1]).norm() < 1e-12);
        let v1 = e.vector(1);
        assert!((v1.amplitudes()[0] - c(s, 0.0)).norm() < 1e-12);
        assert!((v1.amplitudes()[1] - c(s, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn complex_matrix_uses_complex_solver() {
        let e = hermitian_eig(&pauli(Axis::Y)).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-13);
        let r = e.reconstruct();
        assert!(crate::qcore::max_abs_diff(&r, pauli(Axis::Y).matrix()) < 1e-13);
    }

    #[test]
    fn degenerate_ground_space() {
        let h = HermitianOperator::from_real_diagonal(&[-1.0, -1.0, 0.5]);
        let e = hermitian_eig(&h).unwrap();
        assert_eq!(e.ground_space_dim(), 2);
        assert!((e.ground_gap().unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn alignment_tracks_crossing_levels() {
        let a = hermitian_eig(&HermitianOperator::from_real_diagonal(&[-1.0, 1.0])).unwrap();
        let b = hermitian_eig(&HermitianOperator::from_real_diagonal(&[1.0, -1.0])).unwrap();
        let aligned = align_eigenbasis(&a, &b, true);
        assert_eq!(aligned.values, vec![1.0, -1.0]);
        let kept = align_eigenbasis(&a, &b, false);
        assert_eq!(kept.values, vec![-1.0, 1.0]);
    }
}
