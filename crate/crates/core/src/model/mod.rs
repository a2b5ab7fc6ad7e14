//! Hamiltonian construction: QUBO/Ising problems, schedules, meters and the
//! system-meter protocol description.

mod cd;
mod gadget;
mod io;
mod meter;
mod problem;
mod schedule;
mod setup;

pub use cd::{cd_hamiltonian_lz, gap_targeting_interaction, lz_mixing_rate};
pub use gadget::{gadget_decompose, GadgetDecomposition};
pub use io::ProblemFile;
pub use meter::{MeterSpec, MeterState, COMMUTING_TOL};
pub use problem::{
    ising_hamiltonian, qubo_to_ising, transverse_hamiltonian, IsingProblem, QuboProblem, ThreeBodyTerm,
};
pub use schedule::{Schedule, ScheduleForm};
pub use setup::{AnnealSetup, HamiltonianPath, InteractionMode, IsingPath, Problem, LZ_RAMP};

