use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{gadget_decompose, IsingProblem, ThreeBodyTerm};
use crate::Result;

/// Gap ratios within this of 1 count as preserved.
pub const GAP_RATIO_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetReport {
    pub original_ground_energy: f64,
    pub decomposed_ground_energy: f64,
    /// Ground basis states of the original problem.
    pub original_ground: Vec<usize>,
    /// Ground basis states of the decomposed problem (ancilla bits last).
    pub decomposed_ground: Vec<usize>,
    /// Original ground states with no decomposed ground state tracing to them.
    pub missing: Vec<usize>,
    /// Decomposed ground states tracing to a non-ground original state.
    pub spurious: Vec<usize>,
    pub manifold_ok: bool,
    pub original_gap: Option<f64>,
    pub decomposed_gap: Option<f64>,
    /// `None` when the original spectrum is flat.
    pub gap_ratio: Option<f64>,
}

impl GadgetReport {
    pub fn passed(&self) -> bool {
        let gap_ok = match (self.original_gap, self.decomposed_gap) {
            (None, None) => true,
            _ => self.gap_ratio.is_some_and(|r| (r - 1.0).abs() <= GAP_RATIO_TOL),
        };
        self.manifold_ok && gap_ok
    }
}

struct Levels {
    ground: f64,
    states: Vec<usize>,
    gap: Option<f64>,
}

fn enumerate(p: &IsingProblem) -> Levels {
    let dim = 1usize << p.n_qubits;
    let energies: Vec<f64> = (0..dim).map(|k| p.energy(&p.spins_of(k))).collect();
    let ground = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * energies.iter().fold(1.0_f64, |a, e| a.max(e.abs()));
    let states = (0..dim).filter(|&k| energies[k] - ground <= tol).collect();
    let gap = energies
        .iter()
        .map(|e| e - ground)
        .filter(|&d| d > tol)
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))));
    Levels { ground, states, gap }
}

/// Enumerates the original and the gadget-decomposed problem and compares
/// their ground manifolds (after tracing out the ancillas) and gaps.
pub fn gadget_verify_problem(p: &IsingProblem) -> Result<GadgetReport> {
    let dec = gadget_decompose(p)?;
    let orig = enumerate(p);
    let decomposed = enumerate(&dec.problem);
    let target: BTreeSet<usize> = orig.states.iter().copied().collect();
    let traced: BTreeSet<usize> = decomposed.states.iter().map(|&k| dec.system_index(k)).collect();
    let missing: Vec<usize> = target.difference(&traced).copied().collect();
    let spurious: Vec<usize> = decomposed
        .states
        .iter()
        .copied()
        .filter(|&k| !target.contains(&dec.system_index(k)))
        .collect();
    let gap_ratio = match (orig.gap, decomposed.gap) {
        (Some(a), Some(b)) => Some(b / a),
        _ => None,
    };
    Ok(GadgetReport {
        original_ground_energy: orig.ground,
        decomposed_ground_energy: decomposed.ground,
        original_ground: orig.states,
        decomposed_ground: decomposed.states,
        manifold_ok: missing.is_empty() && spurious.is_empty(),
        missing,
        spurious,
        original_gap: orig.gap,
        decomposed_gap: decomposed.gap,
        gap_ratio,
    })
}

/// Single term `c z_a z_b z_c` on `max(sites) + 1` otherwise free qubits.
pub fn gadget_verify(sites: [usize; 3], c: f64) -> Result<GadgetReport> {
    let n = sites.iter().max().map_or(0, |&m| m + 1);
    let p = IsingProblem::new(vec![vec![0.0; n]; n], vec![0.0; n])?.with_three_body(vec![ThreeBodyTerm { sites, c }])?;
    gadget_verify_problem(&p)
}
