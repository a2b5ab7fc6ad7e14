//! Benchmark pipeline: random instances, duration selection, time to
//! solution, parameter scans and gadget checks.

mod gadget;
mod instances;
mod scans;
mod tts;

pub use gadget::{gadget_verify, gadget_verify_problem, GadgetReport, GAP_RATIO_TOL};
pub use instances::{random_ising, InstanceSet};
pub use scans::{
    fidelity_scan, interpolate_log, lz_check, meter_fidelity, omega_scan, x0_scan_constrained, FidelityScan, LzRow,
    OmegaScan, X0ScanConfig, X0ScanRow,
};
pub use tts::{
    duration_grid, extrapolate_duration, mean_and_error, select_duration, success_probabilities, time_to_solution,
    tts_from_probabilities, tts_ratio_sweep, tts_value, with_qubit_meter, ExcludedInstance, InstanceTts, TtsEntry,
    TtsReport, TtsSizeSummary, TtsSweepConfig, DEFAULT_GRID_POINTS, DEFAULT_P_TARGET, DEFAULT_T_GUESS, EXCLUSION_P,
};
