use crate::qcore::{pauli, Axis, EigenDecomposition, HermitianOperator};
use crate::{Error, Result};

/// `d theta / dt` of the Landau-Zener mixing angle, `theta = atan2(g, v t)`.
pub fn lz_mixing_rate(v: f64, g: f64, t: f64) -> Result<f64> {
    let denom = v * v * t * t + g * g;
    if denom == 0.0 {
        return Err(Error::InvalidArgument(
            "counterdiabatic term is singular for g = 0 at the crossing".into(),
        ));
    }
    Ok(-g * v / denom)
}

/// `(v t / 2) sigma_z + (g / 2) sigma_x + (theta_dot / 2) sigma_y`.
pub fn cd_hamiltonian_lz(v: f64, g: f64, t: f64) -> Result<HermitianOperator> {
    let rate = lz_mixing_rate(v, g, t)?;
    Ok(&(&(pauli(Axis::Z) * (0.5 * v * t)) + &(pauli(Axis::X) * (0.5 * g))) + &(pauli(Axis::Y) * (0.5 * rate)))
}

/// `Delta (|psi_1><psi_1| - |psi_0><psi_0|)` with `Delta = E_1 - E_0`,
/// built from the two lowest instantaneous eigenstates.
pub fn gap_targeting_interaction(eig: &EigenDecomposition) -> Result<HermitianOperator> {
    if eig.dim() < 2 {
        return Err(Error::InvalidArgument("need at least two levels".into()));
    }
    let delta = eig.values[1] - eig.values[0];
    let scale = eig.values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    if delta < 1e-9 * scale {
        return Err(Error::Degenerate { gap: delta });
    }
    let p1 = HermitianOperator::projector(&eig.vector(1));
    let p0 = HermitianOperator::projector(&eig.vector(0));
    Ok(&(&p1 - &p0) * delta)
}
