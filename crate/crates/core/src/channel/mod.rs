//! Reduced system dynamics.
//!
//! When `[X_M, H_M] = 0` the total propagator is block diagonal over the
//! eigenspaces of `X_M`, and the system alone evolves through the Kraus
//! operators `K_j = sqrt(Tr(P_j rho_M)) U_j`, with `U_j` generated by
//! `H_S(t) + m_j Y_S(t)`. Otherwise the joint state is propagated and the
//! meter traced out.

mod correction;
mod diagnostics;

pub use correction::{correction_term_check, CorrectionCheck, CORRECTION_RATIO_MIN};
pub use diagnostics::{coherence_trace, spectrum_trace, SpectrumBranch, SpectrumMode, SpectrumTrace};

use crate::model::{AnnealSetup, InteractionMode, MeterSpec};
use crate::qcore::{
    c, max_abs, max_abs_diff, partial_trace_meter_matrix, partial_trace_system_matrix, tensor_state,
    CMatrix, DensityMatrix, Integrator, StateVector, Trajectory,
};
use crate::{Error, Result};

/// Completeness tolerance `||sum K^dag K - I||_max`.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Meter branches with smaller weight are dropped.
const BRANCH_WEIGHT_CUTOFF: f64 = 1e-14;
/// Ensemble members of a density matrix below this weight are dropped.
const ENSEMBLE_CUTOFF: f64 = 1e-14;

/// One eigenspace of `X_M`: eigenvalue `m` and initial weight `Tr(P rho_M)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeterBranch {
    pub m: f64,
    pub weight: f64,
}

/// Eigenspaces of `X_M` with non-negligible initial weight, ascending in `m`.
pub fn meter_branches(meter: &MeterSpec) -> Result<Vec<MeterBranch>> {
    let eig = meter.x_m_eigen()?;
    let scale = eig.values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let mut out: Vec<MeterBranch> = Vec::new();
    for k in 0..eig.dim() {
        let m = eig.values[k];
        let w = meter.initial.population(&eig.vector(k));
        match out.last_mut() {
            Some(b) if (m - b.m).abs() <= 1e-9 * scale => b.weight += w,
            _ => out.push(MeterBranch { m, weight: w }),
        }
    }
    out.retain(|b| b.weight > BRANCH_WEIGHT_CUTOFF);
    Ok(out)
}

/// Which propagation strategy produces the reduced state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Route {
    /// Kraus branches when the meter commutes, tensor propagation otherwise.
    #[default]
    Auto,
    Kraus,
    Tensor,
}

/// Kraus operators of the reduced channel together with their branches.
#[derive(Clone, Debug)]
pub struct KrausSet {
    pub operators: Vec<CMatrix>,
    pub branches: Vec<MeterBranch>,
}

impl KrausSet {
    /// `||sum_j K_j^dag K_j - I||_max`.
    pub fn completeness_error(&self) -> f64 {
        let n = self.operators.first().map_or(0, |k| k.nrows());
        let mut sum = CMatrix::zeros(n, n);
        for k in &self.operators {
            sum += k.adjoint() * k;
        }
        max_abs_diff(&sum, &CMatrix::identity(n, n))
    }

    /// `sum_j K_j rho K_j^dag`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let n = rho.dim();
        let mut out = CMatrix::zeros(n, n);
        for k in &self.operators {
            if k.nrows() != n {
                return Err(Error::DimensionMismatch { expected: k.nrows(), actual: n });
            }
            out += k * rho.matrix() * k.adjoint();
        }
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }
}

/// Propagator of `x H_S(t)` from `t0` to `t1`.
pub fn rescaled_propagator(setup: &AnnealSetup, x: f64, t0: f64, t1: f64, integrator: &Integrator) -> Result<CMatrix> {
    integrator.propagator(|t| setup.system_hamiltonian(t) * x, setup.system_dim(), t0, t1)
}

/// Propagator of `H_S(t) + m Y_S(t)` from `t0` to `t1`.
pub fn branch_propagator(setup: &AnnealSetup, m: f64, t0: f64, t1: f64, integrator: &Integrator) -> Result<CMatrix> {
    setup.validate()?;
    integrator.propagator(|t| setup.branch_unchecked(t, m), setup.system_dim(), t0, t1)
}

fn commuting_meter(setup: &AnnealSetup) -> Result<Option<&MeterSpec>> {
    setup.validate()?;
    match (&setup.meter, setup.coupled()) {
        (Some(meter), true) => {
            if !meter.is_commuting() {
                return Err(Error::NonCommutingMeter { norm: meter.commutator_norm() });
            }
            Ok(Some(meter))
        }
        _ => Ok(None),
    }
}

/// Kraus operators for evolution from the start of the window to `t`.
///
/// Refused when `[X_M, H_M] != 0`; use [`Route::Tensor`] evolution then.
pub fn kraus_operators(setup: &AnnealSetup, t: f64, integrator: &Integrator) -> Result<KrausSet> {
    let t0 = setup.window().0;
    let branches = match commuting_meter(setup)? {
        Some(meter) => meter_branches(meter)?,
        None => vec![MeterBranch { m: 0.0, weight: 1.0 }],
    };
    let operators = branches
        .iter()
        .map(|b| Ok(branch_propagator(setup, b.m, t0, t, integrator)? * c(b.weight.sqrt(), 0.0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(KrausSet { operators, branches })
}

/// `(K_{++}, K_{-+}) = ((U_+ + U_-)/2, (U_+ - U_-)/2)` for the qubit meter
/// `X_M = x0 sigma_z` prepared in `|+>`, where `U_pm` is generated by
/// `(1 pm x0) H_S(t)`.
pub fn plus_state_kraus_pair(setup: &AnnealSetup, t: f64, integrator: &Integrator) -> Result<(CMatrix, CMatrix)> {
    let x0 = plus_meter_x0(setup)?;
    let t0 = setup.window().0;
    let up = rescaled_propagator(setup, 1.0 + x0, t0, t, integrator)?;
    let um = rescaled_propagator(setup, 1.0 - x0, t0, t, integrator)?;
    let half = c(0.5, 0.0);
    Ok(((&up + &um) * half, (&up - &um) * half))
}

/// `x0` of a full-coupling qubit meter prepared in `|+>`.
pub(crate) fn plus_meter_x0(setup: &AnnealSetup) -> Result<f64> {
    let meter = commuting_meter(setup)?
        .ok_or_else(|| Error::Setup("a coupled qubit meter is required".into()))?;
    let x0 = meter.x0.ok_or_else(|| Error::Setup("meter is not the x0 sigma_z qubit preset".into()))?;
    if setup.mode != InteractionMode::Full {
        return Err(Error::Setup("full coupling required".into()));
    }
    if meter.initial.population(&StateVector::plus()) < 1.0 - 1e-10 {
        return Err(Error::Setup("meter must be prepared in |+>".into()));
    }
    Ok(x0)
}

/// Reduced states at every point of `grid`, starting from `rho_s0` at
/// `grid[0]` with the meter in its initial state.
pub fn reduced_trajectory(
    setup: &AnnealSetup,
    rho_s0: &DensityMatrix,
    grid: &[f64],
    integrator: &Integrator,
    route: Route,
) -> Result<Trajectory<DensityMatrix>> {
    setup.validate()?;
    let ds = setup.system_dim();
    if rho_s0.dim() != ds {
        return Err(Error::DimensionMismatch { expected: ds, actual: rho_s0.dim() });
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("time grid must be ascending".into()));
    }
    let members = rho_s0.ensemble(ENSEMBLE_CUTOFF)?;
    let mut acc = vec![CMatrix::zeros(ds, ds); grid.len()];

    let meter = match (&setup.meter, setup.coupled()) {
        (Some(m), true) => Some(m),
        _ => None,
    };
    let use_tensor = match (route, meter) {
        (_, None) => false,
        (Route::Tensor, Some(_)) => true,
        (Route::Kraus, Some(m)) => {
            if !m.is_commuting() {
                return Err(Error::NonCommutingMeter { norm: m.commutator_norm() });
            }
            false
        }
        (Route::Auto, Some(m)) => !m.is_commuting(),
    };

    if use_tensor {
        let meter = meter.expect("tensor route implies a meter");
        let dm = meter.dim();
        let meter_members = meter.initial.ensemble(ENSEMBLE_CUTOFF)?;
        for (ws, psi) in &members {
            for (wm, chi) in &meter_members {
                let joint = tensor_state(psi, chi);
                let states = integrator.states_on_grid(|t| setup.total_unchecked(t), &joint, grid)?;
                for (a, state) in acc.iter_mut().zip(&states) {
                    let v = state.amplitudes();
                    let outer = v * v.adjoint();
                    *a += partial_trace_meter_matrix(&outer, ds, dm)? * c(ws * wm, 0.0);
                }
            }
        }
    } else {
        let branches = match meter {
            Some(m) => meter_branches(m)?,
            None => vec![MeterBranch { m: 0.0, weight: 1.0 }],
        };
        for b in &branches {
            for (ws, psi) in &members {
                let states = integrator.states_on_grid(|t| setup.branch_unchecked(t, b.m), psi, grid)?;
                for (a, state) in acc.iter_mut().zip(&states) {
                    let v = state.amplitudes();
                    *a += v * v.adjoint() * c(ws * b.weight, 0.0);
                }
            }
        }
    }
    let mut states: Vec<DensityMatrix> = acc.into_iter().map(DensityMatrix::from_matrix_unchecked).collect();
    if let Some(first) = states.first_mut() {
        *first = rho_s0.clone();
    }
    Ok(Trajectory { times: grid.to_vec(), states, steps: integrator.steps })
}

/// `rho_S(t)` for evolution from the start of the window to `t`.
pub fn reduced_evolution(
    setup: &AnnealSetup,
    rho_s0: &DensityMatrix,
    t: f64,
    integrator: &Integrator,
    route: Route,
) -> Result<DensityMatrix> {
    let t0 = setup.window().0;
    if t < t0 {
        return Err(Error::InvalidArgument(format!("t = {t} precedes the start of the window {t0}")));
    }
    let traj = reduced_trajectory(setup, rho_s0, &[t0, t], integrator, route)?;
    Ok(traj.states.into_iter().last().expect("two grid points"))
}

/// Like [`reduced_evolution`] but starting from a joint system-meter state,
/// which must be a product `rho_S ⊗ rho_M`; `rho_M` replaces the meter's
/// configured initial state.
pub fn reduced_evolution_joint(
    setup: &AnnealSetup,
    rho_joint: &DensityMatrix,
    t: f64,
    integrator: &Integrator,
    route: Route,
) -> Result<DensityMatrix> {
    let meter = setup
        .meter
        .as_ref()
        .ok_or_else(|| Error::Setup("joint evolution needs a meter".into()))?;
    let (ds, dm) = (setup.system_dim(), meter.dim());
    let rho_s = partial_trace_meter_matrix(rho_joint.matrix(), ds, dm)?;
    let rho_m = partial_trace_system_matrix(rho_joint.matrix(), ds, dm)?;
    let deviation = max_abs_diff(rho_joint.matrix(), &rho_s.kronecker(&rho_m));
    if deviation > 1e-10 * max_abs(rho_joint.matrix()).max(1.0) {
        return Err(Error::NotProductState { deviation });
    }
    let mut local = setup.clone();
    if let Some(m) = local.meter.as_mut() {
        m.initial = DensityMatrix::new(rho_m)?;
    }
    reduced_evolution(&local, &DensityMatrix::new(rho_s)?, t, integrator, route)
}
