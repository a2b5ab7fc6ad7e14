use serde::{Deserialize, Serialize};

use super::{reduced_trajectory, Route};
use crate::model::{cd_hamiltonian_lz, AnnealSetup};
use crate::qcore::{align_eigenbasis, hermitian_eig, DensityMatrix, EigenDecomposition, HermitianOperator, Integrator, DEGENERACY_TOL};
use crate::{Error, Result};

/// `|<psi_m(t)| rho_S(t) |psi_n(t)>|` in the instantaneous eigenbasis of
/// `H_S(t)` at every grid point.
pub fn coherence_trace(
    setup: &AnnealSetup,
    rho_s0: &DensityMatrix,
    grid: &[f64],
    levels: (usize, usize),
    integrator: &Integrator,
) -> Result<Vec<f64>> {
    let (m, n) = levels;
    let dim = setup.system_dim();
    if m >= dim || n >= dim || m == n {
        return Err(Error::InvalidArgument(format!("invalid level pair ({m}, {n}) for dimension {dim}")));
    }
    let traj = reduced_trajectory(setup, rho_s0, grid, integrator, Route::Auto)?;
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, rho)| {
            let eig = hermitian_eig(&setup.system_hamiltonian(t))?;
            check_isolated(&eig, m)?;
            check_isolated(&eig, n)?;
            let vm = eig.vectors.column(m);
            let vn = eig.vectors.column(n);
            Ok(vm.dotc(&(rho.matrix() * vn)).norm())
        })
        .collect()
}

fn check_isolated(eig: &EigenDecomposition, k: usize) -> Result<()> {
    let scale = eig.values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let tol = DEGENERACY_TOL * scale;
    for other in [k.checked_sub(1), Some(k + 1)].into_iter().flatten() {
        if let Some(&e) = eig.values.get(other) {
            let gap = (e - eig.values[k]).abs();
            if gap <= tol {
                return Err(Error::Degenerate { gap });
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMode {
    /// `H_S(t)` alone.
    Bare,
    /// Meter-coupled: the total Hamiltonian and, for a commuting meter, one
    /// block `H_S + m_j Y_S` per eigenvalue of `X_M`.
    Qnd,
    /// Landau-Zener Hamiltonian plus its counterdiabatic term.
    Cd,
}

/// Branch-tracked eigenvalues of one family of Hamiltonians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumBranch {
    pub label: String,
    /// Meter eigenvalue of a block, if this branch is one.
    pub m: Option<f64>,
    /// `levels[i][k]`: level `k` at `times[i]`.
    pub levels: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTrace {
    pub times: Vec<f64>,
    pub branches: Vec<SpectrumBranch>,
}

/// Instantaneous spectra across `grid`; levels are followed across
/// neighbouring points by eigenvector overlap.
pub fn spectrum_trace(setup: &AnnealSetup, grid: &[f64], mode: SpectrumMode) -> Result<SpectrumTrace> {
    let mut branches = Vec::new();
    match mode {
        SpectrumMode::Bare => {
            branches.push(track("bare", None, grid, |t| Ok(setup.system_hamiltonian(t)))?);
        }
        SpectrumMode::Qnd => {
            setup.validate()?;
            let meter = setup
                .meter
                .as_ref()
                .filter(|_| setup.coupled())
                .ok_or_else(|| Error::Setup("qnd spectrum needs a coupled meter".into()))?;
            branches.push(track("total", None, grid, |t| setup.total_hamiltonian(t))?);
            if meter.is_commuting() {
                let eig = meter.x_m_eigen()?;
                let mut values: Vec<f64> = Vec::new();
                for &m in &eig.values {
                    if values.last().is_none_or(|&p| (m - p).abs() > 1e-12) {
                        values.push(m);
                    }
                }
                for m in values {
                    let label = format!("m={m}");
                    branches.push(track(&label, Some(m), grid, |t| setup.branch_hamiltonian(t, m))?);
                }
            }
        }
        SpectrumMode::Cd => {
            let g = setup
                .problem
                .lz_gap()
                .ok_or_else(|| Error::Setup("counterdiabatic spectrum is defined for the Landau-Zener problem".into()))?;
            let v = setup.sweep_rate().expect("Landau-Zener setup has a sweep rate");
            branches.push(track("cd", None, grid, |t| cd_hamiltonian_lz(v, g, t))?);
        }
    }
    Ok(SpectrumTrace { times: grid.to_vec(), branches })
}

fn track<F>(label: &str, m: Option<f64>, grid: &[f64], hamiltonian: F) -> Result<SpectrumBranch>
where
    F: Fn(f64) -> Result<HermitianOperator>,
{
    let mut levels = Vec::with_capacity(grid.len());
    let mut prev: Option<EigenDecomposition> = None;
    for &t in grid {
        let eig = hermitian_eig(&hamiltonian(t)?)?;
        let eig = match &prev {
            Some(p) => align_eigenbasis(p, &eig, true),
            None => eig,
        };
        levels.push(eig.values.clone());
        prev = Some(eig);
    }
    Ok(SpectrumBranch { label: label.to_string(), m, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InteractionMode, MeterSpec, MeterState};
    use crate::qcore::StateVector;

    #[test]
    fn bare_lz_at_crossing() {
        let setup = AnnealSetup::landau_zener_rate(1.0, 1.0).unwrap();
        let tr = spectrum_trace(&setup, &[0.0], SpectrumMode::Bare).unwrap();
        let l = &tr.branches[0].levels[0];
        assert!((l[0] + 0.5).abs() < 1e-14 && (l[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn qnd_blocks_are_rescaled() {
        let setup = AnnealSetup::landau_zener_rate(1.0, 1.0)
            .unwrap()
            .with_meter(MeterSpec::qubit(2.0, 0.0, MeterState::Plus), InteractionMode::Full)
            .unwrap();
        let grid: Vec<f64> = (0..21).map(|k| -10.0 + k as f64).collect();
        let bare = spectrum_trace(&setup, &grid, SpectrumMode::Bare).unwrap();
        let qnd = spectrum_trace(&setup, &grid, SpectrumMode::Qnd).unwrap();
        let up = qnd.branches.iter().find(|b| b.m == Some(2.0)).unwrap();
        for (a, b) in up.levels.iter().zip(&bare.branches[0].levels) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - 3.0 * y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eigenstate_has_no_coherence_without_meter() {
        let setup = AnnealSetup::landau_zener_rate(1.0, 1.0).unwrap();
        let psi = setup.initial_system_state().unwrap();
        let grid: Vec<f64> = (0..11).map(|k| -10.0 + 2.0 * k as f64).collect();
        let coh = coherence_trace(&setup, &DensityMatrix::pure(&psi), &grid, (0, 1), &Integrator::new(40000)).unwrap();
        // adiabatic leakage stays small for this slow sweep
        assert!(coh[0] < 1e-12);
        assert!(coh.iter().all(|&c| c < 0.6));
        let plus = coherence_trace(&setup, &DensityMatrix::pure(&StateVector::plus()), &grid, (0, 1), &Integrator::new(4000)).unwrap();
        assert!(plus[0] > 0.49);
    }

    #[test]
    fn cd_requires_lz() {
        let ising = crate::model::IsingProblem::new(vec![vec![0.0]], vec![1.0]).unwrap();
        let setup = AnnealSetup::ising(ising, 1.0).unwrap();
        assert!(spectrum_trace(&setup, &[0.5], SpectrumMode::Cd).is_err());
    }
}
