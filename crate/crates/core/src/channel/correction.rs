use super::plus_meter_x0;
use crate::model::AnnealSetup;
use crate::qcore::{c, expm_unitary, hermitian_eig, max_abs, CMatrix, DensityMatrix, Integrator};
use crate::{Error, Result};

/// Minimum residual ratio between steps `h` and `h/2` accepted as second
/// order convergence.
pub const CORRECTION_RATIO_MIN: f64 = 3.5;
/// Residuals below this are pure round-off and need no convergence check.
const RESIDUAL_FLOOR: f64 = 1e-12;

/// Outcome of checking the dephasing-corrected equation of motion against
/// a central finite difference of the reduced state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectionCheck {
    pub t: f64,
    pub h: f64,
    /// Max-norm residual with step `h`.
    pub residual: f64,
    /// Residual with step `h / 2`.
    pub residual_half: f64,
    /// Max-norm of the correction term itself.
    pub correction_norm: f64,
    /// Residual when the correction term is dropped (plain von Neumann).
    pub residual_without_correction: f64,
}

impl CorrectionCheck {
    pub fn ratio(&self) -> f64 {
        self.residual / self.residual_half
    }

    /// `true` when the finite difference is in its `O(h^2)` regime (or the
    /// residual is already at round-off level).
    pub fn quadratic(&self) -> bool {
        self.residual <= RESIDUAL_FLOOR || self.ratio() >= CORRECTION_RATIO_MIN
    }
}

/// Compares `d rho_S / dt` (central difference) in the instantaneous
/// eigenbasis of `H_S(t)` with
///
/// `-i [H_S, rho_S]_mn - (i x0 / 2) (E_m - E_n) (rho^[1+x0] - rho^[1-x0])_mn`
///
/// where elements are `<m| . |n>` and evolution is `exp(-i H t)`.
///
/// Requires the full-coupling qubit meter `x0 sigma_z` in `|+>` with
/// `H_M = 0`. The branch states are propagated to `t` with `integrator`;
/// `t +- h` are reached by one midpoint slice each.
pub fn correction_term_check(
    setup: &AnnealSetup,
    rho_s0: &DensityMatrix,
    t: f64,
    h: f64,
    integrator: &Integrator,
) -> Result<CorrectionCheck> {
    let x0 = plus_meter_x0(setup)?;
    let meter = setup.meter.as_ref().expect("checked by plus_meter_x0");
    if meter.h_m.max_abs() != 0.0 {
        return Err(Error::Setup("the correction check assumes H_M = 0".into()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    let (t0, t1) = setup.window();
    if t - h < t0 || t + h > t1 {
        return Err(Error::InvalidArgument(format!("t = {t} +- {h} leaves the window [{t0}, {t1}]")));
    }
    let rho0 = rho_s0.matrix();
    let branch_state = |x: f64| -> Result<CMatrix> {
        let u = super::rescaled_propagator(setup, x, t0, t, integrator)?;
        Ok(&u * rho0 * u.adjoint())
    };
    let rho_plus = branch_state(1.0 + x0)?;
    let rho_minus = branch_state(1.0 - x0)?;
    let rho = (&rho_plus + &rho_minus) * c(0.5, 0.0);

    let hs = setup.system_hamiltonian(t);
    let eig = hermitian_eig(&hs)?;
    let to_basis = |a: &CMatrix| eig.to_eigenbasis(a);

    // model right-hand side in the eigenbasis
    let von_neumann = to_basis(&((hs.matrix() * &rho - &rho * hs.matrix()) * c(0.0, -1.0)));
    let diff = to_basis(&(&rho_plus - &rho_minus));
    let n = rho.nrows();
    let correction = CMatrix::from_fn(n, n, |m, k| {
        c(0.0, -0.5 * x0) * (eig.values[m] - eig.values[k]) * diff[(m, k)]
    });
    let model = &von_neumann + &correction;

    let advance = |x: f64, state: &CMatrix, dt: f64| -> Result<CMatrix> {
        let u = expm_unitary(&(setup.system_hamiltonian(t + 0.5 * dt) * x), dt)?;
        Ok(&u * state * u.adjoint())
    };
    let reduced_at = |dt: f64| -> Result<CMatrix> {
        Ok((advance(1.0 + x0, &rho_plus, dt)? + advance(1.0 - x0, &rho_minus, dt)?) * c(0.5, 0.0))
    };
    let derivative = |step: f64| -> Result<CMatrix> {
        let central = (reduced_at(step)? - reduced_at(-step)?) * c(1.0 / (2.0 * step), 0.0);
        Ok(to_basis(&central))
    };
    let d_h = derivative(h)?;
    let d_half = derivative(0.5 * h)?;

    Ok(CorrectionCheck {
        t,
        h,
        residual: max_abs(&(&d_h - &model)),
        residual_half: max_abs(&(&d_half - &model)),
        correction_norm: max_abs(&correction),
        residual_without_correction: max_abs(&(&d_h - &von_neumann)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InteractionMode, MeterSpec, MeterState};
    use crate::qcore::StateVector;

    fn lz(x0: f64) -> AnnealSetup {
        AnnealSetup::landau_zener_rate(1.0, 1.0)
            .unwrap()
            .with_meter(MeterSpec::qubit(x0, 0.0, MeterState::Plus), InteractionMode::Full)
            .unwrap()
    }

    #[test]
    fn corrected_equation_holds_to_second_order() {
        let setup = lz(2.0);
        let rho0 = DensityMatrix::pure(&setup.initial_system_state().unwrap());
        let chk = correction_term_check(&setup, &rho0, 1.0, 1e-4, &Integrator::new(2000)).unwrap();
        assert!(chk.residual <= 1e-6, "{chk:?}");
        assert!(chk.quadratic(), "{chk:?}");
        assert!(chk.residual_without_correction > 1e-3, "{chk:?}");
    }

    #[test]
    fn zero_coupling_is_von_neumann() {
        let setup = lz(0.0);
        let rho0 = DensityMatrix::pure(&StateVector::plus());
        let chk = correction_term_check(&setup, &rho0, -2.0, 1e-4, &Integrator::new(500)).unwrap();
        assert_eq!(chk.correction_norm, 0.0);
        assert!(chk.residual <= 1e-6);
    }

    #[test]
    fn requires_plus_meter() {
        let setup = AnnealSetup::landau_zener_rate(1.0, 1.0)
            .unwrap()
            .with_meter(MeterSpec::qubit(2.0, 0.0, MeterState::Zero), InteractionMode::Full)
            .unwrap();
        let rho0 = DensityMatrix::pure(&StateVector::plus());
        assert!(correction_term_check(&setup, &rho0, 0.0, 1e-4, &Integrator::new(10)).is_err());
    }
}
