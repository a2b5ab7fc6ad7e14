//! Exact-diagonalization simulator for quantum annealing protocols in which
//! the annealer is coupled to an auxiliary "meter" through an interaction
//! that commutes with the instantaneous system Hamiltonian.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcore`]: dense complex linear algebra (Hermitian eigensolver,
//!   exponentials, time-sliced propagation, tensor products, partial traces).
//! * [`model`]: Hamiltonian construction (QUBO/Ising, transverse field,
//!   Landau-Zener, system-meter totals, counterdiabatic comparator, the
//!   three-body gadget).
//! * [`channel`]: reduced system dynamics through rescaled propagators and
//!   Kraus operators, plus coherence/spectrum diagnostics.
//! * [`anneal`]: single protocol runs, the Landau-Zener closed form and the
//!   locally adiabatic schedule.
//! * [`bench`]: random instances, duration selection, time-to-solution and
//!   the parameter scans.
//!
//! Units have ħ = 1 and all evolution uses `exp(-i H t)`.

pub mod anneal;
pub mod bench;
pub mod channel;
mod error;
pub mod model;
pub mod qcore;

pub use error::{Error, Result};
pub use model::{AnnealSetup, InteractionMode, IsingProblem, MeterSpec, Problem, QuboProblem, Schedule};
pub use anneal::{run_anneal, AnnealOptions, AnnealResult};
pub use qcore::{DensityMatrix, EigenDecomposition, HermitianOperator, StateVector};
