use anyhow::{bail, Result};
use qndanneal::anneal::AnnealOptions;
use qndanneal::bench::{
    fidelity_scan, gadget_verify, gadget_verify_problem, lz_check, omega_scan, random_ising, tts_ratio_sweep,
    x0_scan_constrained, TtsSweepConfig, X0ScanConfig,
};
use qndanneal::channel::{coherence_trace, spectrum_trace, SpectrumMode};
use qndanneal::model::{gadget_decompose, IsingProblem, MeterState, ProblemFile, ThreeBodyTerm};
use qndanneal::qcore::{hermitian_eig, CVector, Integrator};
use qndanneal::{AnnealSetup, DensityMatrix, InteractionMode, MeterSpec, StateVector};

use crate::config::{Experiment, Preset, RunConfig};
use crate::output::{fmt_f, Check, OutputDir};

const RESCALING_TOL: f64 = 1e-6;
const LZ_RANGE: (f64, f64) = (1e-3, 0.5);
const LZ_REL_TOL: f64 = 0.05;
const OMEGA_TOL: f64 = 1e-9;
const SPECTRUM_TOL: f64 = 1e-10;
const TTS_BAND: f64 = 0.03;

pub fn run(cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<Check>> {
    match cfg.experiment {
        Experiment::Coherence => coherence(cfg, out),
        Experiment::Spectrum => spectrum(cfg, out),
        Experiment::FidelityScan => fidelity(cfg, out),
        Experiment::LzCheck => lz(cfg, out),
        Experiment::OmegaScan => omega(cfg, out),
        Experiment::Tts => tts(cfg, out),
        Experiment::X0Scan => x0_scan(cfg, out),
        Experiment::Gadget => gadget(cfg, out),
    }
}

fn ising_problem(cfg: &RunConfig) -> Result<IsingProblem> {
    Ok(match &cfg.problem {
        Some(path) => ProblemFile::load(path)?.to_ising()?,
        None => random_ising(cfg.n_qubits[0], cfg.seed),
    })
}

fn base_setup(cfg: &RunConfig, duration: f64) -> Result<AnnealSetup> {
    Ok(match cfg.preset {
        Preset::Lz => AnnealSetup::landau_zener(cfg.g, duration)?,
        Preset::Ising => AnnealSetup::ising(ising_problem(cfg)?, duration)?,
    })
}

fn attach_meter(setup: AnnealSetup, cfg: &RunConfig, state: MeterState) -> Result<AnnealSetup> {
    Ok(match cfg.mode {
        InteractionMode::None => setup,
        mode => setup.with_meter(MeterSpec::qubit(cfg.x0[0], cfg.omega[0], state), mode)?,
    })
}

/// Sample times as absolute times; the first entry is always the window start.
fn sample_grid(setup: &AnnealSetup, cfg: &RunConfig) -> (Vec<f64>, bool) {
    let t0 = setup.window().0;
    let elapsed = cfg.t_grid.values();
    let prepended = elapsed[0] > 0.0;
    let mut grid: Vec<f64> = Vec::with_capacity(elapsed.len() + 1);
    if prepended {
        grid.push(t0);
    }
    grid.extend(elapsed.iter().map(|e| t0 + e));
    (grid, prepended)
}

/// Lowest excited level separated from both neighbours. The transverse
/// field has a degenerate first excited level, so this is usually the top.
fn isolated_excited_level(values: &[f64]) -> Option<usize> {
    let tol = 1e-9 * values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    (1..values.len()).find(|&k| {
        let below = values[k] - values[k - 1] > tol;
        let above = values.get(k + 1).is_none_or(|e| e - values[k] > tol);
        below && above
    })
}

fn coherence(cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<Check>> {
    let duration = cfg.t_grid.max;
    if duration <= 0.0 {
        bail!("the time grid must extend past zero");
    }
    let bare = base_setup(cfg, duration)?;
    let coupled = attach_meter(bare.clone(), cfg, MeterState::Plus)?;
    let (rho0, levels) = match cfg.preset {
        Preset::Lz => (DensityMatrix::pure(&StateVector::plus()), (0, 1)),
        Preset::Ising => {
            let eig = hermitian_eig(&bare.system_hamiltonian(bare.window().0))?;
            let k = isolated_excited_level(&eig.values)
                .ok_or_else(|| anyhow::anyhow!("no non-degenerate excited level at the start of the anneal"))?;
            let v: CVector = (eig.vectors.column(0) + eig.vectors.column(k)).into_owned();
            (DensityMatrix::pure(&StateVector::normalized(v)?), (0, k))
        }
    };
    let (grid, prepended) = sample_grid(&bare, cfg);
    let integ = Integrator::new(cfg.steps);
    let with_meter = coherence_trace(&coupled, &rho0, &grid, levels, &integ)?;
    let without = coherence_trace(&bare, &rho0, &grid, levels, &integ)?;
    let skip = usize::from(prepended);
    let rows: Vec<Vec<String>> = (skip..grid.len())
        .map(|i| vec![fmt_f(grid[i]), fmt_f(with_meter[i]), fmt_f(without[i])])
        .collect();
    out.write_csv("coherence.csv", &["t", "coherence_meter", "coherence_coherent"], &rows)?;

    let mean = |v: &[f64]| v[skip..].iter().sum::<f64>() / (v.len() - skip) as f64;
    let (m, c) = (mean(&with_meter), mean(&without));
    let check = if cfg.x0[0] == 0.0 || cfg.mode == InteractionMode::None {
        let diff = with_meter.iter().zip(&without).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Check::new("series_identical", diff <= 1e-12, diff, "without coupling both series coincide")
    } else {
        Check::new(
            "meter_suppresses_coherence",
            m < c,
            m - c,
            format!("time-averaged coherence {m:.6} with meter vs {c:.6} without"),
        )
    };
    let pair = Check::informational("level_pair", levels.1 as f64, format!("coherence between levels 0 and {}", levels.1));
    Ok(vec![check, pair])
}

fn spectrum(cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<Check>> {
    let duration = cfg.t_grid.max;
    if duration <= 0.0 {
        bail!("the time grid must extend past zero");
    }
    let bare = base_setup(cfg, duration)?;
    let coupled = attach_meter(bare.clone(), cfg, MeterState::Plus)?;
    let (grid, prepended) = sample_grid(&bare, cfg);
    let grid = if prepended { grid[1..].to_vec() } else { grid };
    let mut traces = vec![spectrum_trace(&bare, &grid, SpectrumMode::Bare)?];
    if coupled.coupled() {
        traces.push(spectrum_trace(&coupled, &grid, SpectrumMode::Qnd)?);
    }
    if cfg.preset == Preset::Lz {
        traces.push(spectrum_trace(&bare, &grid, SpectrumMode::Cd)?);
    }
    let mut rows = Vec::new();
    for tr in &traces {
        for b in &tr.branches {
            for (i, levels) in b.levels.iter().enumerate() {
                for (k, e) in levels.iter().enumerate() {
                    let m = b.m.map(fmt_f).unwrap_or_default();
                    rows.push(vec![b.label.clone(), m, fmt_f(tr.times[i]), k.to_string(), fmt_f(*e)]);
                }
            }
        }
    }
    out.write_csv("spectrum.csv", &["branch", "m", "t", "level", "energy"], &rows)?;

    let mut checks = Vec::new();
    if coupled.coupled() && cfg.mode == InteractionMode::Full && cfg.omega[0] == 0.0 {
        let bare_levels = &traces[0].branches[0].levels;
        let mut worst: f64 = 0.0;
        for b in traces[1].branches.iter().filter(|b| b.m.is_some()) {
            let m = b.m.unwrap_or_default();
            for (lv, bl) in b.levels.iter().zip(bare_levels) {
                // a negative factor reverses the level order
                let mut scaled: Vec<f64> = bl.iter().map(|e0| (1.0 + m) * e0).collect();
                let mut got = lv.clone();
                scaled.sort_by(f64::total_cmp);
                got.sort_by(f64::total_cmp);
                for (e, e0) in got.iter().zip(&scaled) {
                    worst = worst.max((e - e0).abs());
                }
            }
        }
        checks.push(Check::new(
            "branch_rescaling",
            worst <= SPECTRUM_TOL,
            worst,
            format!("each meter branch equals (1 + m) times the bare spectrum (tol {SPECTRUM_TOL:e})"),
        ));
    }
    Ok(checks)
}

fn fidelity(cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<Check>> {
    let durations = cfg.t_grid.values();
    let base = base_setup(cfg, durations[0])?;
    let scan = fidelity_scan(&base, &durations, &cfg.x0, &AnnealOptions::fixed(cfg.steps))?;
    let mut rows = Vec::new();
    for (i, x0) in scan.x0.iter().enumerate() {
        for (k, t) in scan.durations.iter().enumerate() {
            rows.push(vec![
                fmt_f(*t),
                fmt_f(*x0),
                fmt_f(scan.fidelity[i][k]),
                fmt_f(scan.residual_aligned[i][k]),
                scan.residual_interpolated[i][k].map(fmt_f).unwrap_or_default(),
            ]);
        }
    }
    out.write_csv("fidelity.csv", &["T", "x0", "fidelity", "residual_aligned", "residual_interpolated"], &rows)?;
    let worst = scan.max_aligned_residual();
    let mut checks = vec![Check::new(
        "rescaling_law",
        worst <= RESCALING_TOL,
        worst,
        format!("max |F(T, x0) - F((1 + x0) T, 0)| at grid-aligned points (tol {RESCALING_TOL:e})"),
    )];
    if let Some(r) = scan.max_interpolated_residual() {
        checks.push(Check::informational("interpolated_residual", r, "same residual with log-T interpolation"));
    }
    Ok(checks)
}

fn lz(cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<Check>> {
    let rows = lz_check(cfg.g, &cfg.x0, &cfg.t_grid.values(), &AnnealOptions::fixed(cfg.steps))?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f(r.duration),
                fmt_f(r.x0),
                fmt_f(r.v),
                fmt_f(r.v_eff),
                fmt_f(r.infidelity),
                fmt_f(r.closed_form),
                fmt_f(r.relative_deviation),
                r.in_range(LZ_RANGE.0, LZ_RANGE.1).to_string(),
            ]
        })
        .collect();
    out.write_csv(
        "lz.csv",
        &["T", "x0", "v", "v_eff", "infidelity", "closed_form", "relative_deviation", "in_range"],
        &table,
    )?;
    let used: Vec<f64> = rows
        .iter()
        .filter(|r| r.in_range(LZ_RANGE.0, LZ_RANGE.1))
        .map(|r| r.relative_deviation)
        .collect();
    if used.is_empty() {
        return Ok(vec![Check::informational("closed_form", f64::NAN, "no row has closed-form infidelity in [1e-3, 0.5]")]);
    }
    let worst = used.iter().copied().fold(0.0, f64::max);
    Ok(vec![Check::new(
        "closed_form",
        worst <= LZ_REL_TOL,
        worst,
        format!("max relative deviation over {} rows with closed form in [1e-3, 0.5] (tol 5%)", used.len()),
    )])
}

fn omega(cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<Check>> {
    let durations = cfg.t_grid.values();
    let base = base_setup(cfg, durations[0])?;
    let scan = omega_scan(&base, &durations, &cfg.omega, cfg.x0[0], &AnnealOptions::fixed(cfg.steps))?;
    let mut rows = Vec::new();
    for (i, w) in scan.omega.iter().enumerate() {
        for (k, t) in scan.durations.iter().enumerate() {
            rows.push(vec![
                fmt_f(*t),
                fmt_f(*w),
                fmt_f(scan.fidelity[i][k]),
                fmt_f(scan.reference[k]),
                fmt_f(scan.difference[i][k]),
            ]);
        }
    }
    out.write_csv("omega.csv", &["T", "omega", "fidelity", "fidelity_omega0", "difference"], &rows)?;
    let worst = scan.max_difference();
    Ok(vec![Check::new(
        "noncommuting_bound",
        worst <= OMEGA_TOL,
        worst,
        format!("max q(T, omega) - q(T, 0) (tol {OMEGA_TOL:e})"),
    )])
}

fn tts(cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<Check>> {
    let x0 = cfg.x0[0];
    let sweep = TtsSweepConfig {
        n_qubits: cfg.n_qubits.clone(),
        instances: cfg.instances,
        seed: cfg.seed,
        x0,
        mode: cfg.mode,
        p_target: cfg.p_target,
        t_guess: cfg.t_guess,
        grid_points: cfg.grid_points,
        steps: cfg.steps,
    };
    let report = tts_ratio_sweep(&sweep)?;
    let mut summary = Vec::new();
    let mut per_instance = Vec::new();
    let mut grid_rows = Vec::new();
    let mut excluded = Vec::new();
    for s in &report.sizes {
        summary.push(vec![
            s.n_qubits.to_string(),
            fmt_f(s.mean_ratio),
            fmt_f(s.std_error),
            s.instances.len().to_string(),
            s.excluded.len().to_string(),
        ]);
        for i in &s.instances {
            per_instance.push(vec![
                s.n_qubits.to_string(),
                i.index.to_string(),
                fmt_f(i.p_guess),
                fmt_f(i.t_ext),
                fmt_f(i.coherent.tts),
                fmt_f(i.coherent.best_duration),
                fmt_f(i.protocol.tts),
                fmt_f(i.protocol.best_duration),
                fmt_f(i.ratio),
            ]);
            for k in 0..i.coherent.durations.len() {
                grid_rows.push(vec![
                    s.n_qubits.to_string(),
                    i.index.to_string(),
                    fmt_f(i.coherent.durations[k]),
                    fmt_f(i.coherent.p_single[k]),
                    fmt_f(i.protocol.p_single[k]),
                ]);
            }
        }
        for e in &s.excluded {
            excluded.push(vec![s.n_qubits.to_string(), e.index.to_string(), e.reason.clone()]);
        }
    }
    out.write_csv("tts_summary.csv", &["n_qubits", "mean_ratio", "std_error", "included", "excluded"], &summary)?;
    out.write_csv(
        "tts_instances.csv",
        &["n_qubits", "instance", "p_guess", "t_ext", "tts_coherent", "best_T_coherent", "tts_protocol", "best_T_protocol", "ratio"],
        &per_instance,
    )?;
    out.write_csv("tts_grid.csv", &["n_qubits", "instance", "T", "p_coherent", "p_protocol"], &grid_rows)?;
    out.write_csv("tts_excluded.csv", &["n_qubits", "instance", "reason"], &excluded)?;

    let predicted = 1.0 / (1.0 + x0);
    let mut checks = Vec::new();
    for s in &report.sizes {
        let name = format!("tts_ratio_n{}", s.n_qubits);
        let r = s.mean_ratio;
        checks.push(match cfg.mode {
            InteractionMode::Full => Check::new(
                &name,
                (r - predicted).abs() <= TTS_BAND,
                r,
                format!("mean ratio {r:.4} vs 1/(1 + x0) = {predicted:.4} +- {TTS_BAND}"),
            ),
            InteractionMode::Constrained => {
                Check::new(&name, r > predicted, r, format!("mean ratio {r:.4} must exceed 1/(1 + x0) = {predicted:.4}"))
            }
            InteractionMode::None => {
                Check::new(&name, (r - 1.0).abs() <= 1e-12, r, "uncoupled protocol has ratio 1")
            }
        });
    }
    Ok(checks)
}

fn x0_scan(cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<Check>> {
    let rows = x0_scan_constrained(&X0ScanConfig {
        n_qubits: cfg.n_qubits.clone(),
        x0: cfg.x0.clone(),
        instances: cfg.instances,
        seed: cfg.seed,
        t_guess: cfg.t_guess,
        steps: cfg.steps,
    })?;
    let mut table = Vec::new();
    let mut inst = Vec::new();
    let mut checks = Vec::new();
    for r in &rows {
        for (i, x0) in r.x0.iter().enumerate() {
            table.push(vec![r.n_qubits.to_string(), fmt_f(*x0), fmt_f(r.mean_fidelity[i]), fmt_f(r.std_error[i])]);
        }
        for (j, f) in r.fidelity.iter().enumerate() {
            for (i, x0) in r.x0.iter().enumerate() {
                inst.push(vec![r.n_qubits.to_string(), j.to_string(), fmt_f(r.durations[j]), fmt_f(*x0), fmt_f(f[i])]);
            }
        }
        if let Some(i) = r.x0.iter().position(|&x| x == 0.0) {
            let d = (r.mean_fidelity[i] - r.coherent_mean).abs();
            checks.push(Check::new(&format!("zero_coupling_n{}", r.n_qubits), d <= 1e-12, d, "x0 = 0 equals the coherent run"));
        }
        let best = r.mean_fidelity.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::new(&format!("below_one_n{}", r.n_qubits), best < 1.0, best, "mean fidelity stays below 1"));
    }
    out.write_csv("x0_scan.csv", &["n_qubits", "x0", "mean_fidelity", "std_error"], &table)?;
    out.write_csv("x0_scan_instances.csv", &["n_qubits", "instance", "T", "x0", "fidelity"], &inst)?;
    Ok(checks)
}

fn gadget(cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<Check>> {
    let problem = match &cfg.problem {
        Some(path) => ProblemFile::load(path)?.to_ising()?,
        None => IsingProblem::new(vec![vec![0.0; 3]; 3], vec![0.0; 3])?
            .with_three_body(vec![ThreeBodyTerm { sites: [0, 1, 2], c: cfg.coefficient }])?,
    };
    if problem.three_body.is_empty() {
        bail!("the problem has no three-body terms");
    }
    let report = match &cfg.problem {
        Some(_) => gadget_verify_problem(&problem)?,
        None => gadget_verify([0, 1, 2], cfg.coefficient)?,
    };
    let dec = gadget_decompose(&problem)?;
    let bits = |k: usize, n: usize| format!("{k:0n$b}");
    let orig_rows: Vec<Vec<String>> = (0..1usize << problem.n_qubits)
        .map(|k| {
            vec![
                k.to_string(),
                bits(k, problem.n_qubits),
                fmt_f(problem.energy(&problem.spins_of(k))),
                report.original_ground.contains(&k).to_string(),
            ]
        })
        .collect();
    let p = &dec.problem;
    let dec_rows: Vec<Vec<String>> = (0..1usize << p.n_qubits)
        .map(|k| {
            vec![
                k.to_string(),
                bits(k, p.n_qubits),
                fmt_f(p.energy(&p.spins_of(k))),
                dec.system_index(k).to_string(),
                report.decomposed_ground.contains(&k).to_string(),
            ]
        })
        .collect();
    out.write_csv("gadget_original.csv", &["index", "bits", "energy", "ground"], &orig_rows)?;
    out.write_csv("gadget_decomposed.csv", &["index", "bits", "energy", "system_index", "ground"], &dec_rows)?;
    out.write_json("gadget_report.json", &report)?;

    let ratio = report.gap_ratio.unwrap_or(f64::NAN);
    let detail = format!(
        "missing {:?}, spurious {:?}, gap ratio {:?}",
        report.missing, report.spurious, report.gap_ratio
    );
    // the decomposition is only claimed for positive coefficients
    if problem.three_body.iter().all(|t| t.c >= 0.0) {
        Ok(vec![
            Check::new("ground_manifold", report.manifold_ok, f64::from(u8::from(report.manifold_ok)), detail),
            Check::new("gap_ratio", report.passed(), ratio, "decomposed gap equals the original gap"),
        ])
    } else {
        Ok(vec![
            Check::informational("ground_manifold", f64::from(u8::from(report.manifold_ok)), detail),
            Check::informational("gap_ratio", ratio, "negative coefficient: reported, not asserted"),
        ])
    }
}
