use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::instances::InstanceSet;
use crate::anneal::{run_anneal, AnnealOptions};
use crate::model::{AnnealSetup, InteractionMode, IsingProblem, MeterSpec, MeterState};
use crate::{Error, Result};

pub const DEFAULT_P_TARGET: f64 = 0.95;
/// Guess duration of the duration-selection procedure.
pub const DEFAULT_T_GUESS: f64 = 10.0;
pub const DEFAULT_GRID_POINTS: usize = 10;
/// Success probabilities at or above this count as certain in one run.
const P_CERTAIN: f64 = 1.0 - 1e-12;
/// Success probabilities at or below this make a duration useless.
const P_NEGLIGIBLE: f64 = 1e-12;
/// Instances whose every duration stays below this are excluded from means.
pub const EXCLUSION_P: f64 = 1e-6;
const P_GUESS_CLAMP: (f64, f64) = (0.01, 0.99);

/// `T_guess log(1 - p) / log(1/2)` with `p` clamped to `[0.01, 0.99]`.
pub fn extrapolate_duration(t_guess: f64, p_guess: f64) -> Result<f64> {
    if !(t_guess > 0.0 && t_guess.is_finite()) {
        return Err(Error::InvalidArgument(format!("guess duration must be positive, got {t_guess}")));
    }
    if p_guess.is_nan() {
        return Err(Error::InvalidArgument("guess probability is NaN".into()));
    }
    let p = p_guess.clamp(P_GUESS_CLAMP.0, P_GUESS_CLAMP.1);
    Ok(t_guess * (1.0 - p).ln() / 0.5f64.ln())
}

/// `n` durations evenly spaced in `log T` from `0.1 T_ext` to `10 T_ext`.
pub fn duration_grid(t_ext: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_ext > 0.0 && t_ext.is_finite()) {
        return Err(Error::InvalidArgument(format!("duration must be positive, got {t_ext}")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("a duration grid needs at least two points".into()));
    }
    let (lo, hi) = ((0.1 * t_ext).ln(), (10.0 * t_ext).ln());
    let mut grid: Vec<f64> = (0..n).map(|k| (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp()).collect();
    grid[0] = 0.1 * t_ext;
    grid[n - 1] = 10.0 * t_ext;
    Ok(grid)
}

/// `T log(1 - p) / log(1 - p_single)` for one duration; `T` itself when a
/// single run is certain and `+inf` when it never succeeds.
pub fn tts_value(duration: f64, p_single: f64, p_target: f64) -> f64 {
    if p_single >= P_CERTAIN {
        duration
    } else if p_single <= P_NEGLIGIBLE {
        f64::INFINITY
    } else {
        duration * (1.0 - p_target).ln() / (1.0 - p_single).ln()
    }
}

/// Time-to-solution minimised over a duration grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TtsEntry {
    pub durations: Vec<f64>,
    pub p_single: Vec<f64>,
    pub tts: f64,
    pub best_duration: f64,
}

pub fn tts_from_probabilities(durations: &[f64], p_single: &[f64], p_target: f64) -> Result<TtsEntry> {
    if !(p_target > 0.0 && p_target < 1.0) {
        return Err(Error::InvalidArgument(format!("target probability must lie in (0, 1), got {p_target}")));
    }
    if durations.is_empty() || durations.len() != p_single.len() {
        return Err(Error::InvalidArgument("durations and probabilities must be non-empty and equally long".into()));
    }
    let (best, tts) = durations
        .iter()
        .zip(p_single)
        .map(|(&t, &p)| (t, tts_value(t, p, p_target)))
        .fold((f64::NAN, f64::INFINITY), |acc, (t, v)| if v < acc.1 { (t, v) } else { acc });
    if !tts.is_finite() {
        return Err(Error::TtsUndefined);
    }
    Ok(TtsEntry { durations: durations.to_vec(), p_single: p_single.to_vec(), tts, best_duration: best })
}

/// Ground-space populations of `setup` run at each duration.
pub fn success_probabilities(setup: &AnnealSetup, durations: &[f64], options: &AnnealOptions) -> Result<Vec<f64>> {
    durations
        .par_iter()
        .map(|&t| Ok(run_anneal(&setup.with_duration(t)?, options)?.success_probability))
        .collect()
}

pub fn time_to_solution(
    setup: &AnnealSetup,
    p_target: f64,
    durations: &[f64],
    options: &AnnealOptions,
) -> Result<TtsEntry> {
    let p = success_probabilities(setup, durations, options)?;
    tts_from_probabilities(durations, &p, p_target)
}

/// Coherent success probability at `t_guess` and the extrapolated duration.
pub fn select_duration(ising: &IsingProblem, t_guess: f64, options: &AnnealOptions) -> Result<(f64, f64)> {
    let setup = AnnealSetup::ising(ising.clone(), t_guess)?;
    let p = run_anneal(&setup, options)?.success_probability;
    Ok((p, extrapolate_duration(t_guess, p)?))
}

/// Meter-coupled version of an annealing setup: qubit meter in `|0>` with
/// `X_M = x0 sigma_z` and `H_M = omega sigma_x`.
pub fn with_qubit_meter(setup: AnnealSetup, x0: f64, omega: f64, mode: InteractionMode) -> Result<AnnealSetup> {
    match mode {
        InteractionMode::None => Ok(setup.without_meter()),
        _ => setup.with_meter(MeterSpec::qubit(x0, omega, MeterState::Zero), mode),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TtsSweepConfig {
    pub n_qubits: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    pub x0: f64,
    pub mode: InteractionMode,
    pub p_target: f64,
    pub t_guess: f64,
    pub grid_points: usize,
    pub steps: usize,
}

impl Default for TtsSweepConfig {
    fn default() -> Self {
        Self {
            n_qubits: vec![4],
            instances: 20,
            seed: 0,
            x0: 2.0,
            mode: InteractionMode::Full,
            p_target: DEFAULT_P_TARGET,
            t_guess: DEFAULT_T_GUESS,
            grid_points: DEFAULT_GRID_POINTS,
            steps: crate::qcore::DEFAULT_STEPS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceTts {
    pub index: usize,
    pub p_guess: f64,
    pub t_ext: f64,
    pub coherent: TtsEntry,
    pub protocol: TtsEntry,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcludedInstance {
    pub index: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TtsSizeSummary {
    pub n_qubits: usize,
    pub mean_ratio: f64,
    pub std_error: f64,
    pub instances: Vec<InstanceTts>,
    pub excluded: Vec<ExcludedInstance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TtsReport {
    pub config: TtsSweepConfig,
    pub sizes: Vec<TtsSizeSummary>,
}

fn instance_tts(ising: &IsingProblem, index: usize, config: &TtsSweepConfig) -> Result<InstanceTts> {
    let options = AnnealOptions::fixed(config.steps);
    let (p_guess, t_ext) = select_duration(ising, config.t_guess, &options)?;
    let grid = duration_grid(t_ext, config.grid_points)?;
    let coherent_setup = AnnealSetup::ising(ising.clone(), t_ext)?;
    let p_coh = success_probabilities(&coherent_setup, &grid, &options)?;
    let p_prot = if config.mode == InteractionMode::None {
        p_coh.clone()
    } else {
        let setup = with_qubit_meter(coherent_setup, config.x0, 0.0, config.mode)?;
        success_probabilities(&setup, &grid, &options)?
    };
    for (label, p) in [("coherent", &p_coh), ("protocol", &p_prot)] {
        if p.iter().all(|&x| x < EXCLUSION_P) {
            return Err(Error::Setup(format!("{label} success probability below {EXCLUSION_P} on every duration")));
        }
    }
    let coherent = tts_from_probabilities(&grid, &p_coh, config.p_target)?;
    let protocol = tts_from_probabilities(&grid, &p_prot, config.p_target)?;
    let ratio = protocol.tts / coherent.tts;
    Ok(InstanceTts { index, p_guess, t_ext, coherent, protocol, ratio })
}

/// Mean `TTS(protocol) / TTS(coherent)` per problem size over seeded
/// random instances, with per-instance duration grids chosen from a
/// coherent guess run. Failing instances are excluded and listed.
pub fn tts_ratio_sweep(config: &TtsSweepConfig) -> Result<TtsReport> {
    if config.instances == 0 {
        return Err(Error::InvalidArgument("at least one instance is required".into()));
    }
    let mut sizes = Vec::with_capacity(config.n_qubits.len());
    for &n in &config.n_qubits {
        let set = InstanceSet::generate(n, config.instances, config.seed);
        let outcomes: Vec<Result<InstanceTts>> = set
            .instances
            .par_iter()
            .enumerate()
            .map(|(k, inst)| instance_tts(inst, k, config))
            .collect();
        let mut instances = Vec::new();
        let mut excluded = Vec::new();
        for (k, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok(r) => instances.push(r),
                Err(e) => excluded.push(ExcludedInstance { index: k, reason: e.to_string() }),
            }
        }
        let ratios: Vec<f64> = instances.iter().map(|r| r.ratio).collect();
        let (mean_ratio, std_error) = mean_and_error(&ratios);
        sizes.push(TtsSizeSummary { n_qubits: n, mean_ratio, std_error, instances, excluded });
    }
    Ok(TtsReport { config: config.clone(), sizes })
}

/// Sample mean and its standard error (`NaN` for empty input).
pub fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
