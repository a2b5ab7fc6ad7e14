use super::problem::IsingProblem;
use crate::Result;

/// Result of replacing every three-body term by two-body terms and one
/// ancilla qubit per term.
#[derive(Clone, Debug, PartialEq)]
pub struct GadgetDecomposition {
    pub problem: IsingProblem,
    /// Number of qubits of the original problem; ancillas follow them.
    pub system_qubits: usize,
    /// `(term index, ancilla site)` for each replaced term.
    pub ancillas: Vec<(usize, usize)>,
}

/// Replaces `c z_1 z_2 z_3` by
/// `c [z_1 z_2 + z_2 z_3 + z_1 z_3 - sum_i (2 z_i z_a - z_i) - 2 z_a]`.
///
/// Pair coefficients are stored as `J_ij = coefficient / 2` because the
/// Ising energy counts each pair twice.
pub fn gadget_decompose(p: &IsingProblem) -> Result<GadgetDecomposition> {
    let n = p.n_qubits;
    let total = n + p.three_body.len();
    let mut j = vec![vec![0.0; total]; total];
    let mut h = vec![0.0; total];
    for a in 0..n {
        h[a] = p.h[a];
        j[a][..n].copy_from_slice(&p.j[a]);
    }
    let mut ancillas = Vec::with_capacity(p.three_body.len());
    for (k, term) in p.three_body.iter().enumerate() {
        let anc = n + k;
        let c = term.c;
        let [s1, s2, s3] = term.sites;
        for (a, b) in [(s1, s2), (s2, s3), (s1, s3)] {
            j[a][b] += 0.5 * c;
            j[b][a] += 0.5 * c;
        }
        for s in term.sites {
            j[s][anc] -= c;
            j[anc][s] -= c;
            h[s] += c;
        }
        h[anc] -= 2.0 * c;
        ancillas.push((k, anc));
    }
    let mut problem = IsingProblem::new(j, h)?;
    problem.offset = p.offset;
    Ok(GadgetDecomposition { problem, system_qubits: n, ancillas })
}

impl GadgetDecomposition {
    /// System part of a decomposed basis index (ancilla bits dropped).
    pub fn system_index(&self, index: usize) -> usize {
        index >> self.ancillas.len()
    }
}
