use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::instances::InstanceSet;
use super::tts::{mean_and_error, select_duration, with_qubit_meter};
use crate::anneal::{lz_infidelity, run_anneal, AnnealOptions};
use crate::model::{AnnealSetup, InteractionMode};
use crate::{Error, Result};

fn check_grid(name: &str, grid: &[f64], positive: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} grid is empty")));
    }
    if let Some(x) = grid.iter().find(|x| !x.is_finite() || (positive && **x <= 0.0) || **x < 0.0) {
        return Err(Error::InvalidArgument(format!("invalid {name} grid value {x}")));
    }
    Ok(())
}

/// Fidelity of `base` rescaled to `duration` with a qubit meter in `|0>`.
pub fn meter_fidelity(
    base: &AnnealSetup,
    duration: f64,
    x0: f64,
    omega: f64,
    mode: InteractionMode,
    options: &AnnealOptions,
) -> Result<f64> {
    let setup = base.with_duration(duration)?;
    let setup = if x0 == 0.0 && omega == 0.0 { setup.without_meter() } else { with_qubit_meter(setup, x0, omega, mode)? };
    Ok(run_anneal(&setup, options)?.fidelity)
}

fn fidelity_matrix(rows: usize, cols: usize, cell: impl Fn(usize, usize) -> Result<f64> + Sync) -> Result<Vec<Vec<f64>>> {
    let flat: Vec<f64> = (0..rows * cols)
        .into_par_iter()
        .map(|k| cell(k / cols, k % cols))
        .collect::<Result<_>>()?;
    Ok(flat.chunks(cols).map(<[f64]>::to_vec).collect())
}

/// `F(T, x0)` for a full-coupling meter in `|0>` and the residuals against
/// the uncoupled run at `(1 + x0) T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityScan {
    pub durations: Vec<f64>,
    pub x0: Vec<f64>,
    /// `fidelity[i][k]` at `x0[i]`, `durations[k]`.
    pub fidelity: Vec<Vec<f64>>,
    /// Uncoupled `F(T, 0)` on `durations`.
    pub baseline: Vec<f64>,
    /// `|F(T, x0) - F((1 + x0) T, 0)|` with the right-hand side evaluated
    /// directly at the rescaled duration.
    pub residual_aligned: Vec<Vec<f64>>,
    /// Same residual with the right-hand side interpolated (linear in
    /// `log T`) from `baseline`; `None` outside the duration range.
    pub residual_interpolated: Vec<Vec<Option<f64>>>,
}

impl FidelityScan {
    pub fn max_aligned_residual(&self) -> f64 {
        self.residual_aligned.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn max_interpolated_residual(&self) -> Option<f64> {
        self.residual_interpolated.iter().flatten().flatten().copied().reduce(f64::max)
    }
}

/// Linear interpolation of `values` in `log T`; `None` outside the grid.
pub fn interpolate_log(durations: &[f64], values: &[f64], t: f64) -> Option<f64> {
    let mut idx: Vec<usize> = (0..durations.len()).collect();
    idx.sort_by(|&a, &b| durations[a].total_cmp(&durations[b]));
    let first = *idx.first()?;
    let last = *idx.last()?;
    let tol = 1e-12 * t.abs();
    if t < durations[first] - tol || t > durations[last] + tol {
        return None;
    }
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        if t <= durations[b] + tol {
            let (la, lb) = (durations[a].ln(), durations[b].ln());
            if lb == la {
                return Some(values[b]);
            }
            let u = ((t.ln() - la) / (lb - la)).clamp(0.0, 1.0);
            return Some(values[a] + u * (values[b] - values[a]));
        }
    }
    Some(values[first])
}

pub fn fidelity_scan(base: &AnnealSetup, durations: &[f64], x0_grid: &[f64], options: &AnnealOptions) -> Result<FidelityScan> {
    check_grid("duration", durations, true)?;
    check_grid("x0", x0_grid, false)?;
    let nt = durations.len();
    let full = InteractionMode::Full;
    let baseline: Vec<f64> = durations
        .par_iter()
        .map(|&t| meter_fidelity(base, t, 0.0, 0.0, full, options))
        .collect::<Result<_>>()?;
    let fidelity = fidelity_matrix(x0_grid.len(), nt, |i, k| {
        if x0_grid[i] == 0.0 {
            Ok(baseline[k])
        } else {
            meter_fidelity(base, durations[k], x0_grid[i], 0.0, full, options)
        }
    })?;
    let rescaled = fidelity_matrix(x0_grid.len(), nt, |i, k| {
        if x0_grid[i] == 0.0 {
            Ok(baseline[k])
        } else {
            meter_fidelity(base, (1.0 + x0_grid[i]) * durations[k], 0.0, 0.0, full, options)
        }
    })?;
    let residual_aligned = fidelity
        .iter()
        .zip(&rescaled)
        .map(|(f, r)| f.iter().zip(r).map(|(a, b)| (a - b).abs()).collect())
        .collect();
    let residual_interpolated = x0_grid
        .iter()
        .zip(&fidelity)
        .map(|(&x0, row)| {
            durations
                .iter()
                .zip(row)
                .map(|(&t, f)| interpolate_log(durations, &baseline, (1.0 + x0) * t).map(|b| (f - b).abs()))
                .collect()
        })
        .collect();
    Ok(FidelityScan {
        durations: durations.to_vec(),
        x0: x0_grid.to_vec(),
        fidelity,
        baseline,
        residual_aligned,
        residual_interpolated,
    })
}

/// `q(T, omega) - q(T, 0)` for a meter in `|0>` with `X_M = x0 sigma_z`
/// and `H_M = omega sigma_x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaScan {
    pub durations: Vec<f64>,
    pub omega: Vec<f64>,
    pub x0: f64,
    /// `fidelity[i][k]` at `omega[i]`, `durations[k]`.
    pub fidelity: Vec<Vec<f64>>,
    /// Commuting (`omega = 0`) fidelity on `durations`.
    pub reference: Vec<f64>,
    pub difference: Vec<Vec<f64>>,
}

impl OmegaScan {
    pub fn max_difference(&self) -> f64 {
        self.difference.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn omega_scan(
    base: &AnnealSetup,
    durations: &[f64],
    omega_grid: &[f64],
    x0: f64,
    options: &AnnealOptions,
) -> Result<OmegaScan> {
    check_grid("duration", durations, true)?;
    if omega_grid.is_empty() || omega_grid.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidArgument("omega grid must be non-empty and finite".into()));
    }
    let full = InteractionMode::Full;
    let reference: Vec<f64> = durations
        .par_iter()
        .map(|&t| meter_fidelity(base, t, x0, 0.0, full, options))
        .collect::<Result<_>>()?;
    let fidelity = fidelity_matrix(omega_grid.len(), durations.len(), |i, k| {
        if omega_grid[i] == 0.0 {
            Ok(reference[k])
        } else {
            meter_fidelity(base, durations[k], x0, omega_grid[i], full, options)
        }
    })?;
    let difference = fidelity
        .iter()
        .map(|row| row.iter().zip(&reference).map(|(q, q0)| q - q0).collect())
        .collect();
    Ok(OmegaScan { durations: durations.to_vec(), omega: omega_grid.to_vec(), x0, fidelity, reference, difference })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct X0ScanConfig {
    pub n_qubits: Vec<usize>,
    pub x0: Vec<f64>,
    pub instances: usize,
    pub seed: u64,
    pub t_guess: f64,
    pub steps: usize,
}

impl Default for X0ScanConfig {
    fn default() -> Self {
        Self {
            n_qubits: vec![3, 4],
            x0: vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
            instances: 20,
            seed: 0,
            t_guess: super::tts::DEFAULT_T_GUESS,
            steps: crate::qcore::DEFAULT_STEPS,
        }
    }
}

/// Constrained-coupling fidelities averaged over instances for one size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct X0ScanRow {
    pub n_qubits: usize,
    pub x0: Vec<f64>,
    pub mean_fidelity: Vec<f64>,
    pub std_error: Vec<f64>,
    /// Mean uncoupled fidelity at the same durations.
    pub coherent_mean: f64,
    /// Per-instance durations from the guess-and-extrapolate procedure.
    pub durations: Vec<f64>,
    /// `fidelity[j][i]`: instance `j` at `x0[i]`.
    pub fidelity: Vec<Vec<f64>>,
}

/// Mean fidelity per `(N, x0)` of the constrained protocol (meter in
/// `|0>`, `H_M = 0`), each instance run at its extrapolated duration.
pub fn x0_scan_constrained(config: &X0ScanConfig) -> Result<Vec<X0ScanRow>> {
    check_grid("x0", &config.x0, false)?;
    if config.instances == 0 {
        return Err(Error::InvalidArgument("at least one instance is required".into()));
    }
    let options = AnnealOptions::fixed(config.steps);
    let mut rows = Vec::with_capacity(config.n_qubits.len());
    for &n in &config.n_qubits {
        let set = InstanceSet::generate(n, config.instances, config.seed);
        let per_instance: Vec<(f64, f64, Vec<f64>)> = set
            .instances
            .par_iter()
            .map(|ising| {
                let (_, t_ext) = select_duration(ising, config.t_guess, &options)?;
                let base = AnnealSetup::ising(ising.clone(), t_ext)?;
                let coherent = run_anneal(&base, &options)?.fidelity;
                let fid = config
                    .x0
                    .iter()
                    .map(|&x0| {
                        if x0 == 0.0 {
                            Ok(coherent)
                        } else {
                            meter_fidelity(&base, t_ext, x0, 0.0, InteractionMode::Constrained, &options)
                        }
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok((t_ext, coherent, fid))
            })
            .collect::<Result<_>>()?;
        let durations = per_instance.iter().map(|p| p.0).collect();
        let coherent: Vec<f64> = per_instance.iter().map(|p| p.1).collect();
        let fidelity: Vec<Vec<f64>> = per_instance.into_iter().map(|p| p.2).collect();
        let (mean_fidelity, std_error) = (0..config.x0.len())
            .map(|i| mean_and_error(&fidelity.iter().map(|f| f[i]).collect::<Vec<_>>()))
            .unzip();
        rows.push(X0ScanRow {
            n_qubits: n,
            x0: config.x0.clone(),
            mean_fidelity,
            std_error,
            coherent_mean: mean_and_error(&coherent).0,
            durations,
            fidelity,
        });
    }
    Ok(rows)
}

/// One Landau-Zener run against the closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LzRow {
    pub duration: f64,
    pub x0: f64,
    pub v: f64,
    /// `v / (1 + x0)`.
    pub v_eff: f64,
    pub infidelity: f64,
    pub closed_form: f64,
    pub relative_deviation: f64,
}

impl LzRow {
    /// Closed-form infidelity inside `[lo, hi]`.
    pub fn in_range(&self, lo: f64, hi: f64) -> bool {
        (lo..=hi).contains(&self.closed_form)
    }
}

/// Landau-Zener sweeps over `durations` (sweep rate `v = 2 R / T`) with a
/// full-coupling meter in `|0>`; one row per `(x0, T)`.
pub fn lz_check(g: f64, x0_grid: &[f64], durations: &[f64], options: &AnnealOptions) -> Result<Vec<LzRow>> {
    check_grid("duration", durations, true)?;
    check_grid("x0", x0_grid, false)?;
    let base = AnnealSetup::landau_zener(g, durations[0])?;
    let cells: Vec<(f64, f64)> = x0_grid.iter().flat_map(|&x| durations.iter().map(move |&t| (x, t))).collect();
    cells
        .par_iter()
        .map(|&(x0, t)| {
            let fidelity = meter_fidelity(&base, t, x0, 0.0, InteractionMode::Full, options)?;
            let v = 2.0 * crate::model::LZ_RAMP / t;
            let v_eff = v / (1.0 + x0);
            let closed_form = lz_infidelity(v_eff, g)?;
            let infidelity = 1.0 - fidelity;
            Ok(LzRow {
                duration: t,
                x0,
                v,
                v_eff,
                infidelity,
                closed_form,
                relative_deviation: (infidelity - closed_form).abs() / closed_form,
            })
        })
        .collect()
}
