mod common;

use std::sync::Arc;

use common::{c, M};
use qndanneal::anneal::{adiabaticity_factor, local_adiabatic_schedule, lz_infidelity, run_anneal, AnnealOptions};
use qndanneal::bench::{random_ising, time_to_solution, tts_from_probabilities};
use qndanneal::channel::{kraus_operators, plus_state_kraus_pair, reduced_evolution, reduced_evolution_joint, Route};
use qndanneal::model::{
    cd_hamiltonian_lz, gap_targeting_interaction, ising_hamiltonian, qubo_to_ising, HamiltonianPath, MeterState, Problem,
};
use qndanneal::qcore::{hermitian_eig, pauli, tensor_density, Axis, Integrator};
use qndanneal::{AnnealSetup, DensityMatrix, HermitianOperator, InteractionMode, MeterSpec, QuboProblem, Schedule, StateVector};

fn op(m: &M) -> HermitianOperator {
    HermitianOperator::new(m.clone()).unwrap()
}

#[test]
fn ising_diagonal_matches_enumeration() {
    let p = random_ising(4, 11);
    let h = ising_hamiltonian(&p);
    for k in 0..16 {
        let z = common::spins(4, k);
        let mut e = 0.0;
        for a in 0..4 {
            e += p.h[a] * z[a];
            for b in 0..4 {
                if a != b {
                    e += p.j[a][b] * z[a] * z[b];
                }
            }
        }
        assert!((h.matrix()[(k, k)].re - e).abs() < 1e-12);
    }
}

#[test]
fn qubo_values_survive_the_mapping() {
    let q = QuboProblem::new(vec![vec![1.0, -2.0, 0.5], vec![0.0, -1.0, 3.0], vec![0.0, 0.0, 2.0]]).unwrap();
    let p = qubo_to_ising(&q);
    for k in 0..8usize {
        let x: Vec<u8> = (0..3).map(|s| ((k >> (2 - s)) & 1) as u8).collect();
        let z: Vec<i8> = x.iter().map(|&b| 2 * b as i8 - 1).collect();
        let brute: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| q.q[i][j] * f64::from(x[i] * x[j])).sum();
        assert!((p.energy(&z) + p.offset - brute).abs() < 1e-12, "{x:?}");
    }
}

#[test]
fn integrator_matches_reference_propagator() {
    let setup = AnnealSetup::ising(random_ising(3, 5), 4.0).unwrap();
    let psi = setup.initial_system_state().unwrap();
    let lib = Integrator::new(300).final_state(|t| setup.system_hamiltonian(t), &psi, 0.0, 4.0).unwrap();
    let reference = common::propagate(|t| setup.system_hamiltonian(t).matrix().clone(), psi.amplitudes(), 0.0, 4.0, 300);
    let diff = (lib.amplitudes() - reference).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(diff < 1e-12, "{diff}");
}

#[test]
fn total_hamiltonian_is_tensor_sum() {
    let setup = AnnealSetup::ising(random_ising(2, 2), 3.0)
        .unwrap()
        .with_meter(MeterSpec::qubit(1.5, 0.7, MeterState::Plus), InteractionMode::Constrained)
        .unwrap();
    let t = 1.2;
    let s = t / 3.0;
    let hf = ising_hamiltonian(setup.problem.ising_problem().unwrap()).matrix().clone();
    let hs = setup.system_hamiltonian(t).matrix().clone();
    let expected = common::kron(&hs, &common::eye(2))
        + common::kron(&(hf * c(s, 0.0)), &(common::sz() * c(1.5, 0.0)))
        + common::kron(&common::eye(4), &(common::sx() * c(0.7, 0.0)));
    let total = setup.total_hamiltonian(t).unwrap();
    assert!(common::max_abs(&(total.matrix() - expected)) < 1e-14);
}

#[test]
fn plus_meter_kraus_pair_is_half_sum_and_difference() {
    let x0 = 1.3;
    let setup = AnnealSetup::landau_zener_rate(2.0, 1.0)
        .unwrap()
        .with_meter(MeterSpec::qubit(x0, 0.0, MeterState::Plus), InteractionMode::Full)
        .unwrap();
    let (t0, t1) = setup.window();
    let steps = 400;
    let (kp, km) = plus_state_kraus_pair(&setup, t1, &Integrator::new(steps)).unwrap();
    let unitary = |x: f64| {
        let cols: Vec<_> = [common::zero(), common::one()]
            .iter()
            .map(|e| common::propagate(|t| common::lz(2.0, 1.0, t) * c(x, 0.0), e, t0, t1, steps))
            .collect();
        M::from_columns(&cols)
    };
    let (up, um) = (unitary(1.0 + x0), unitary(1.0 - x0));
    assert!(common::max_abs(&(kp - (&up + &um) * c(0.5, 0.0))) < 1e-11);
    assert!(common::max_abs(&(km - (&up - &um) * c(0.5, 0.0))) < 1e-11);

    let set = kraus_operators(&setup, t1, &Integrator::new(steps)).unwrap();
    assert_eq!(set.operators.len(), 2);
    assert!(set.completeness_error() < 1e-12);
}

#[test]
fn joint_product_start_matches_configured_meter() {
    let setup = AnnealSetup::ising(random_ising(2, 4), 5.0)
        .unwrap()
        .with_meter(MeterSpec::qubit(2.0, 0.0, MeterState::Plus), InteractionMode::Full)
        .unwrap();
    let rho_s = DensityMatrix::pure(&setup.initial_system_state().unwrap());
    let rho_m = DensityMatrix::pure(&StateVector::plus());
    let integ = Integrator::new(500);
    let a = reduced_evolution(&setup, &rho_s, 5.0, &integ, Route::Kraus).unwrap();
    let b = reduced_evolution_joint(&setup, &tensor_density(&rho_s, &rho_m), 5.0, &integ, Route::Tensor).unwrap();
    assert!(common::max_abs(&(a.matrix() - b.matrix())) < 1e-10);
}

#[test]
fn entangled_joint_start_is_refused() {
    let setup = AnnealSetup::landau_zener_rate(1.0, 1.0)
        .unwrap()
        .with_meter(MeterSpec::qubit(1.0, 0.0, MeterState::Zero), InteractionMode::Full)
        .unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let bell = StateVector::from_real(&[r, 0.0, 0.0, r]).unwrap();
    let res = reduced_evolution_joint(&setup, &DensityMatrix::pure(&bell), 0.0, &Integrator::new(10), Route::Auto);
    assert!(res.is_err());
}

#[test]
fn counterdiabatic_drive_is_exact_for_fast_sweep() {
    // T = 0.5 with ramp +-10 means v = 40
    let (v, g, t_half) = (40.0, 1.0, 0.25);
    let ground = |t: f64| {
        let (_, vecs) = common::eigh(&common::lz(v, g, t));
        vecs.column(0).into_owned()
    };
    let psi0 = ground(-t_half);
    let cd = common::propagate(|t| cd_hamiltonian_lz(v, g, t).unwrap().matrix().clone(), &psi0, -t_half, t_half, 4000);
    let bare = common::propagate(|t| common::lz(v, g, t), &psi0, -t_half, t_half, 4000);
    let target = ground(t_half);
    let fid = |x: &common::V| target.dotc(x).norm_sqr();
    assert!(fid(&cd) >= 0.999, "{}", fid(&cd));
    assert!(fid(&bare) < 0.5);
}

#[test]
fn gap_targeting_coupling_triples_the_gap() {
    let hs = op(&common::lz(1.0, 0.8, 0.3));
    let eig = hermitian_eig(&hs).unwrap();
    let delta = eig.values[1] - eig.values[0];
    let y = gap_targeting_interaction(&eig).unwrap();
    // meter |0>: sigma_z eigenvalue +1
    let block = &hs + &y;
    let e = hermitian_eig(&block).unwrap();
    assert!((e.values[1] - e.values[0] - 3.0 * delta).abs() < 1e-12);
}

#[test]
fn lz_run_follows_closed_form() {
    let v = 0.5;
    let setup = AnnealSetup::landau_zener_rate(v, 1.0).unwrap();
    let r = run_anneal(&setup, &AnnealOptions::fixed(20000)).unwrap();
    let expected = common::lz_closed_form(v, 1.0);
    assert!((lz_infidelity(v, 1.0).unwrap() - expected).abs() < 1e-15);
    assert!(((1.0 - r.fidelity) - expected).abs() / expected < 0.05);
}

/// `cos(pi s / 2) sigma_x + sin(pi s / 2) sigma_z`: gap 2 and
/// `|<0| dH/ds |1>| = pi / 2` for every `s`.
#[derive(Debug)]
struct RotatingField;

impl HamiltonianPath for RotatingField {
    fn dim(&self) -> usize {
        2
    }

    fn at(&self, s: f64) -> HermitianOperator {
        let a = 0.5 * std::f64::consts::PI * s;
        &(pauli(Axis::X) * a.cos()) + &(pauli(Axis::Z) * a.sin())
    }

    fn derivative(&self, s: f64) -> HermitianOperator {
        let a = 0.5 * std::f64::consts::PI * s;
        let k = 0.5 * std::f64::consts::PI;
        &(pauli(Axis::X) * (-k * a.sin())) + &(pauli(Axis::Z) * (k * a.cos()))
    }
}

#[test]
fn constant_gap_path_has_linear_adiabatic_schedule() {
    let setup = AnnealSetup::new(Problem::Custom(Arc::new(RotatingField)), Schedule::linear(1.0).unwrap());
    let pi = std::f64::consts::PI;
    for s in [0.0, 0.3, 1.0] {
        let a = adiabaticity_factor(&setup, s).unwrap();
        assert!((a.gap - 2.0).abs() < 1e-12);
        assert!((a.matrix_element - 0.5 * pi).abs() < 1e-12);
    }
    let schedule = local_adiabatic_schedule(&setup, 0.1, 51).unwrap();
    assert!((schedule.duration - pi / 8.0 / 0.1).abs() < 1e-12);
    for k in 0..=10 {
        let t = schedule.duration * k as f64 / 10.0;
        assert!((schedule.value(t) - k as f64 / 10.0).abs() < 1e-12);
    }
}

#[test]
fn qnd_tts_ratio_on_aligned_grids() {
    // p_single^QND(T) = p_single^coh(3T), so a coherent grid 3x the
    // protocol grid gives a ratio of exactly 1/3
    let ising = random_ising(3, 8);
    let grid: Vec<f64> = (0..6).map(|k| 0.5 * 1.6f64.powi(k)).collect();
    let grid3: Vec<f64> = grid.iter().map(|t| 3.0 * t).collect();
    let options = AnnealOptions::fixed(2000);
    let coherent = AnnealSetup::ising(ising.clone(), 1.0).unwrap();
    let qnd = coherent
        .clone()
        .with_meter(MeterSpec::qubit(2.0, 0.0, MeterState::Zero), InteractionMode::Full)
        .unwrap();
    let a = time_to_solution(&qnd, 0.95, &grid, &options).unwrap();
    let b = time_to_solution(&coherent, 0.95, &grid3, &options).unwrap();
    assert!((a.tts / b.tts - 1.0 / 3.0).abs() < 1e-9, "{} {}", a.tts, b.tts);
    let direct = tts_from_probabilities(&grid, &b.p_single, 0.95).unwrap();
    assert!((direct.tts * 3.0 - b.tts).abs() < 1e-9 * b.tts);
}
