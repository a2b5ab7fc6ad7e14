//! Experiment runner behind the `qndanneal` binary.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};
use qndanneal::InteractionMode;

use config::{read_config_file, ConfigPatch, Experiment, Preset, RunConfig, TimeGrid};
use output::OutputDir;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "qndanneal", version, about = "Annealing with a QND-coupled meter: simulations and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Off-diagonal coherence of the reduced state, with and without the meter.
    Coherence(RunArgs),
    /// Instantaneous spectra: bare, per meter branch and counterdiabatic.
    Spectrum(RunArgs),
    /// Final fidelity over a duration grid for several coupling strengths.
    FidelityScan(RunArgs),
    /// Landau-Zener infidelity against the closed form with rescaled sweep rate.
    LzCheck(RunArgs),
    /// Effect of a non-commuting meter Hamiltonian on the final fidelity.
    OmegaScan(RunArgs),
    /// Time-to-solution ratio between the meter protocol and coherent annealing.
    Tts(RunArgs),
    /// Constrained-coupling fidelity as a function of the coupling strength.
    X0Scan(RunArgs),
    /// Ground-manifold and gap check of the three-body gadget.
    Gadget(RunArgs),
}

impl Command {
    fn split(&self) -> (Experiment, &RunArgs) {
        match self {
            Command::Coherence(a) => (Experiment::Coherence, a),
            Command::Spectrum(a) => (Experiment::Spectrum, a),
            Command::FidelityScan(a) => (Experiment::FidelityScan, a),
            Command::LzCheck(a) => (Experiment::LzCheck, a),
            Command::OmegaScan(a) => (Experiment::OmegaScan, a),
            Command::Tts(a) => (Experiment::Tts, a),
            Command::X0Scan(a) => (Experiment::X0Scan, a),
            Command::Gadget(a) => (Experiment::Gadget, a),
        }
    }
}

fn parse_mode(s: &str) -> Result<InteractionMode, String> {
    match s {
        "none" => Ok(InteractionMode::None),
        "full" => Ok(InteractionMode::Full),
        "constrained" => Ok(InteractionMode::Constrained),
        _ => Err(format!("expected none, full or constrained, got '{s}'")),
    }
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// JSON config (or a previous meta.json); flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Problem sizes; repeat or list for several.
    #[arg(long, num_args = 1.., action = ArgAction::Append)]
    pub n_qubits: Option<Vec<usize>>,
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Meter coupling strength; repeatable.
    #[arg(long, num_args = 1.., action = ArgAction::Append, allow_negative_numbers = true)]
    pub x0: Option<Vec<f64>>,
    /// Meter frequency; repeatable.
    #[arg(long, num_args = 1.., action = ArgAction::Append, allow_negative_numbers = true)]
    pub omega: Option<Vec<f64>>,
    /// `min:max:count[:log|lin]`.
    #[arg(long, value_name = "GRID")]
    pub t_grid: Option<TimeGrid>,
    /// Propagation slices per run.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_parser = parse_mode, value_name = "none|full|constrained")]
    pub mode: Option<InteractionMode>,
    #[arg(long)]
    pub p_target: Option<f64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Problem file used instead of a random instance.
    #[arg(long, value_name = "FILE")]
    pub problem: Option<PathBuf>,
    /// Landau-Zener minimum gap.
    #[arg(long)]
    pub g: Option<f64>,
    /// Initial duration of the duration-selection step.
    #[arg(long)]
    pub t_guess: Option<f64>,
    /// Points of the time-to-solution duration grid.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Three-body coefficient for `gadget` without a problem file.
    #[arg(long, allow_negative_numbers = true)]
    pub coefficient: Option<f64>,
}

impl RunArgs {
    fn patch(&self) -> ConfigPatch {
        ConfigPatch {
            experiment: None,
            preset: self.preset,
            n_qubits: self.n_qubits.clone(),
            instances: self.instances,
            seed: self.seed,
            x0: self.x0.clone(),
            omega: self.omega.clone(),
            t_grid: self.t_grid,
            steps: self.steps,
            mode: self.mode,
            p_target: self.p_target,
            out: self.out.clone(),
            problem: self.problem.clone(),
            g: self.g,
            t_guess: self.t_guess,
            grid_points: self.grid_points,
            coefficient: self.coefficient,
        }
    }
}

/// Defaults, then the config file, then flags.
pub fn resolve(experiment: Experiment, args: &RunArgs) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::defaults(experiment);
    if let Some(path) = &args.config {
        let file = read_config_file(path)?;
        if let Some(e) = file.experiment {
            if e != experiment {
                return Err(format!("{} is a config for '{}', not '{}'", path.display(), e.name(), experiment.name()));
            }
        }
        cfg.apply(&file);
    }
    cfg.apply(&args.patch());
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `argv`, runs the experiment and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (experiment, args) = cli.command.split();
    let cfg = match resolve(experiment, args) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    match execute(&cfg) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_RUNTIME
        }
    }
}

/// Runs a resolved config, writes all outputs and prints the check lines.
pub fn execute(cfg: &RunConfig) -> anyhow::Result<bool> {
    let mut out = OutputDir::create(&cfg.out)?;
    let checks = commands::run(cfg, &mut out)?;
    for c in &checks {
        let tag = match (c.applicable, c.passed) {
            (false, _) => "INFO",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        println!("{tag} {}: {:.6e} ({})", c.name, c.value, c.detail);
    }
    let dir = out.path().display().to_string();
    let passed = out.finish(cfg, &checks)?;
    println!("wrote {dir}");
    Ok(passed)
}
