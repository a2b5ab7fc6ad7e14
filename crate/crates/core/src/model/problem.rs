use serde::{Deserialize, Serialize};

use crate::qcore::{pauli, tensor, Axis, HermitianOperator};
use crate::{Error, Result};

/// `y(x) = sum_ij Q_ij x_i x_j` over binary `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuboProblem {
    pub n_vars: usize,
    pub q: Vec<Vec<f64>>,
}

impl QuboProblem {
    pub fn new(q: Vec<Vec<f64>>) -> Result<Self> {
        let n = q.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty QUBO matrix".into()));
        }
        if let Some(row) = q.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, actual: row.len() });
        }
        Ok(Self { n_vars: n, q })
    }

    pub fn value(&self, x: &[u8]) -> f64 {
        let mut y = 0.0;
        for i in 0..self.n_vars {
            for j in 0..self.n_vars {
                y += self.q[i][j] * f64::from(x[i]) * f64::from(x[j]);
            }
        }
        y
    }
}

/// Coefficient `c` of `sigma_z^a sigma_z^b sigma_z^c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeBodyTerm {
    pub sites: [usize; 3],
    pub c: f64,
}

/// `H = sum_{i != j} J_ij z_i z_j + sum_i h_i z_i + sum c z_a z_b z_c`.
///
/// The pair sum runs over ordered pairs, so each unordered pair carries
/// `2 J_ij`. `offset` is a constant that is not part of the operator; it is
/// recorded by [`qubo_to_ising`] so that `energy + offset` reproduces the
/// QUBO value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingProblem {
    pub n_qubits: usize,
    pub j: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    #[serde(default)]
    pub three_body: Vec<ThreeBodyTerm>,
    #[serde(default)]
    pub offset: f64,
}

impl IsingProblem {
    /// Validates shapes, symmetrises `J` and checks its diagonal is zero.
    pub fn new(j: Vec<Vec<f64>>, h: Vec<f64>) -> Result<Self> {
        let n = h.len();
        if j.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: j.len() });
        }
        if let Some(row) = j.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, actual: row.len() });
        }
        for (i, row) in j.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(Error::InvalidArgument(format!("J[{i}][{i}] must be zero")));
            }
        }
        let mut sym = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in 0..n {
                sym[a][b] = 0.5 * (j[a][b] + j[b][a]);
            }
        }
        Ok(Self { n_qubits: n, j: sym, h, three_body: Vec::new(), offset: 0.0 })
    }

    pub fn with_three_body(mut self, terms: Vec<ThreeBodyTerm>) -> Result<Self> {
        for t in &terms {
            let [a, b, c] = t.sites;
            if a == b || b == c || a == c {
                return Err(Error::DuplicateSite(if a == b { a } else { c }));
            }
            for &s in &t.sites {
                if s >= self.n_qubits {
                    return Err(Error::SiteOutOfRange { site: s, n_qubits: self.n_qubits });
                }
            }
        }
        self.three_body = terms;
        Ok(self)
    }

    /// Classical energy for spins `z_i` in `{-1, +1}` (offset excluded).
    pub fn energy(&self, z: &[i8]) -> f64 {
        let n = self.n_qubits;
        let mut e = 0.0;
        for i in 0..n {
            let zi = f64::from(z[i]);
            e += self.h[i] * zi;
            for jj in (i + 1)..n {
                e += 2.0 * self.j[i][jj] * zi * f64::from(z[jj]);
            }
        }
        for t in &self.three_body {
            let [a, b, c] = t.sites;
            e += t.c * f64::from(z[a] * z[b] * z[c]);
        }
        e
    }

    /// Spins of computational basis state `index`: bit value 0 is `z = +1`.
    pub fn spins_of(&self, index: usize) -> Vec<i8> {
        spins_of(self.n_qubits, index)
    }

    /// Minimum classical energy by enumeration, with the minimising indices.
    pub fn brute_force_ground(&self) -> (f64, Vec<usize>) {
        let dim = 1usize << self.n_qubits;
        let energies: Vec<f64> = (0..dim).map(|k| self.energy(&self.spins_of(k))).collect();
        let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let scale = energies.iter().fold(1.0_f64, |a, e| a.max(e.abs()));
        let ground = (0..dim).filter(|&k| energies[k] - min <= 1e-9 * scale).collect();
        (min, ground)
    }
}

pub(crate) fn spins_of(n_qubits: usize, index: usize) -> Vec<i8> {
    (0..n_qubits)
        .map(|site| if (index >> (n_qubits - 1 - site)) & 1 == 0 { 1 } else { -1 })
        .collect()
}

/// Maps `y(x)` onto an Ising problem via `z_i = 2 x_i - 1`.
///
/// `Q` is symmetrised first; `J_ij = Q_ij / 4` off the diagonal,
/// `h_i = sum_j Q_ij / 2`, and the diagonal `Q_ii` (with `x_i^2 = x_i`)
/// feeds `h` and the constant offset.
pub fn qubo_to_ising(q: &QuboProblem) -> IsingProblem {
    let n = q.n_vars;
    let sym = |i: usize, j: usize| 0.5 * (q.q[i][j] + q.q[j][i]);
    let mut j = vec![vec![0.0; n]; n];
    let mut h = vec![0.0; n];
    let mut offset = 0.0;
    for a in 0..n {
        for b in 0..n {
            let s = sym(a, b);
            h[a] += s / 2.0;
            if a == b {
                // Q_aa x_a = Q_aa (z_a + 1) / 2
                offset += s / 2.0;
            } else {
                j[a][b] = s / 4.0;
                offset += s / 4.0;
            }
        }
    }
    IsingProblem { n_qubits: n, j, h, three_body: Vec::new(), offset }
}

/// Diagonal Ising operator; the offset is not included.
pub fn ising_hamiltonian(p: &IsingProblem) -> HermitianOperator {
    let dim = 1usize << p.n_qubits;
    let diag: Vec<f64> = (0..dim).map(|k| p.energy(&p.spins_of(k))).collect();
    HermitianOperator::from_real_diagonal(&diag)
}

/// `sum_i sigma_x^i`; its ground state is `|->^n` with energy `-n`.
pub fn transverse_hamiltonian(n: usize) -> HermitianOperator {
    let mut total = HermitianOperator::zeros(1 << n);
    for site in 0..n {
        let mut term = HermitianOperator::identity(1);
        for k in 0..n {
            let f = if k == site { pauli(Axis::X) } else { HermitianOperator::identity(2) };
            term = tensor(&term, &f);
        }
        total = total + term;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::hermitian_eig;

    #[test]
    fn two_variable_qubo() {
        let p = qubo_to_ising(&QuboProblem::new(vec![vec![0.0, 4.0], vec![4.0, 0.0]]).unwrap());
        assert_eq!(p.j[0][1], 1.0);
        assert_eq!(p.j[1][0], 1.0);
        assert_eq!(p.h, vec![2.0, 2.0]);
    }

    #[test]
    fn zero_qubo() {
        let p = qubo_to_ising(&QuboProblem::new(vec![vec![0.0; 3]; 3]).unwrap());
        assert!(p.j.iter().flatten().all(|&x| x == 0.0));
        assert!(p.h.iter().all(|&x| x == 0.0));
        assert_eq!(p.offset, 0.0);
    }

    #[test]
    fn asymmetric_qubo_with_diagonal_round_trips() {
        let q = QuboProblem::new(vec![
            vec![1.5, -2.0, 0.25],
            vec![3.0, -0.5, 1.0],
            vec![0.0, 2.0, 0.75],
        ])
        .unwrap();
        let p = qubo_to_ising(&q);
        for k in 0..8usize {
            let x: Vec<u8> = (0..3).map(|i| ((k >> (2 - i)) & 1) as u8).collect();
            let z: Vec<i8> = x.iter().map(|&b| 2 * b as i8 - 1).collect();
            assert!((q.value(&x) - (p.energy(&z) + p.offset)).abs() < 1e-12);
        }
    }

    #[test]
    fn ising_operator_examples() {
        let p = IsingProblem::new(vec![vec![0.0]], vec![1.0]).unwrap();
        assert_eq!(ising_hamiltonian(&p).diagonal(), vec![1.0, -1.0]);
        let p = IsingProblem::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.0, 0.0]).unwrap();
        assert_eq!(ising_hamiltonian(&p).diagonal(), vec![2.0, -2.0, -2.0, 2.0]);
    }

    #[test]
    fn nonzero_j_diagonal_rejected() {
        assert!(IsingProblem::new(vec![vec![1.0]], vec![0.0]).is_err());
    }

    #[test]
    fn transverse_field_spectra() {
        let e1 = hermitian_eig(&transverse_hamiltonian(1)).unwrap();
        assert!((e1.values[0] + 1.0).abs() < 1e-14);
        let g = e1.vector(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((g.amplitudes()[0].re.abs() - s).abs() < 1e-12);
        assert!((g.amplitudes()[0] + g.amplitudes()[1]).norm() < 1e-12);

        let e2 = hermitian_eig(&transverse_hamiltonian(2)).unwrap();
        assert!((e2.values[0] + 2.0).abs() < 1e-13);

        let e3 = hermitian_eig(&transverse_hamiltonian(3)).unwrap();
        let expected = [-3.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 3.0];
        for (a, b) in e3.values.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
