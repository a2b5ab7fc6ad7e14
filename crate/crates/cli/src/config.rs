use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qndanneal::InteractionMode;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Two-level Landau-Zener sweep.
    Lz,
    /// Transverse-field annealing of an Ising problem.
    Ising,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Coherence,
    Spectrum,
    FidelityScan,
    LzCheck,
    OmegaScan,
    Tts,
    X0Scan,
    Gadget,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Coherence => "coherence",
            Experiment::Spectrum => "spectrum",
            Experiment::FidelityScan => "fidelity-scan",
            Experiment::LzCheck => "lz-check",
            Experiment::OmegaScan => "omega-scan",
            Experiment::Tts => "tts",
            Experiment::X0Scan => "x0-scan",
            Experiment::Gadget => "gadget",
        }
    }
}

/// `min:max:count[:log|lin]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl TimeGrid {
    pub fn log(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count, log: true }
    }

    pub fn linear(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count, log: false }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        let mut v: Vec<f64> = (0..self.count)
            .map(|k| {
                let u = k as f64 / last;
                if self.log {
                    (self.min.ln() + u * (self.max / self.min).ln()).exp()
                } else {
                    self.min + u * (self.max - self.min)
                }
            })
            .collect();
        v[0] = self.min;
        v[self.count - 1] = self.max;
        v
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.count == 0 || self.max < self.min {
            return Err(format!("invalid time grid {self}"));
        }
        if self.count > 1 && self.max == self.min {
            return Err(format!("time grid {self} has several points but zero width"));
        }
        if self.log && self.min <= 0.0 {
            return Err(format!("log time grid {self} needs a positive minimum"));
        }
        if self.min < 0.0 {
            return Err(format!("time grid {self} has negative times"));
        }
        Ok(())
    }
}

impl fmt::Display for TimeGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.min, self.max, self.count, if self.log { "log" } else { "lin" })
    }
}

impl FromStr for TimeGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("expected min:max:count[:log|lin], got '{s}'"));
        }
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("bad number '{x}': {e}"));
        let min = num(parts[0])?;
        let max = num(parts[1])?;
        let count = parts[2].trim().parse::<usize>().map_err(|e| format!("bad count '{}': {e}", parts[2]))?;
        let log = match parts.get(3).map(|x| x.trim()) {
            None | Some("log") => true,
            Some("lin") | Some("linear") => false,
            Some(other) => return Err(format!("grid spacing must be 'log' or 'lin', got '{other}'")),
        };
        let grid = Self { min, max, count, log };
        grid.validate()?;
        Ok(grid)
    }
}

/// Fully resolved parameters of one run. Serialises to the same field
/// names that a config file (or the `config` block of `meta.json`) uses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub preset: Preset,
    pub n_qubits: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    pub x0: Vec<f64>,
    pub omega: Vec<f64>,
    pub t_grid: TimeGrid,
    pub steps: usize,
    pub mode: InteractionMode,
    pub p_target: f64,
    pub out: PathBuf,
    /// Problem file used instead of a random Ising instance.
    pub problem: Option<PathBuf>,
    /// Landau-Zener minimum gap.
    pub g: f64,
    pub t_guess: f64,
    pub grid_points: usize,
    /// Three-body coefficient for the gadget check.
    pub coefficient: f64,
}

/// Optional overrides, from a config file or from flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigPatch {
    pub experiment: Option<Experiment>,
    pub preset: Option<Preset>,
    pub n_qubits: Option<Vec<usize>>,
    pub instances: Option<usize>,
    pub seed: Option<u64>,
    pub x0: Option<Vec<f64>>,
    pub omega: Option<Vec<f64>>,
    pub t_grid: Option<TimeGrid>,
    pub steps: Option<usize>,
    pub mode: Option<InteractionMode>,
    pub p_target: Option<f64>,
    pub out: Option<PathBuf>,
    pub problem: Option<PathBuf>,
    pub g: Option<f64>,
    pub t_guess: Option<f64>,
    pub grid_points: Option<usize>,
    pub coefficient: Option<f64>,
}

impl RunConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            preset: Preset::Lz,
            n_qubits: vec![3],
            instances: 20,
            seed: 0,
            x0: vec![2.0],
            omega: vec![0.0],
            t_grid: TimeGrid::log(1.0, 40.0, 12),
            steps: qndanneal::qcore::DEFAULT_STEPS,
            mode: InteractionMode::Full,
            p_target: qndanneal::bench::DEFAULT_P_TARGET,
            out: PathBuf::from("out").join(experiment.name()),
            problem: None,
            g: 1.0,
            t_guess: qndanneal::bench::DEFAULT_T_GUESS,
            grid_points: qndanneal::bench::DEFAULT_GRID_POINTS,
            coefficient: 1.0,
        };
        match experiment {
            Experiment::Coherence | Experiment::Spectrum => c.t_grid = TimeGrid::linear(0.0, 20.0, 201),
            Experiment::FidelityScan => c.x0 = vec![0.0, 1.0, 2.0, 3.0],
            Experiment::LzCheck => {
                c.x0 = vec![0.0, 1.0, 2.0, 3.0];
                c.t_grid = TimeGrid::log(2.0, 100.0, 24);
                c.steps = 20000;
            }
            Experiment::OmegaScan => {
                c.x0 = vec![1.0];
                c.omega = vec![0.0, 0.25, 0.5, 1.0, 2.0];
                c.t_grid = TimeGrid::log(1.0, 40.0, 10);
            }
            Experiment::Tts => {
                c.preset = Preset::Ising;
                c.n_qubits = vec![4];
            }
            Experiment::X0Scan => {
                c.preset = Preset::Ising;
                c.n_qubits = vec![3, 4];
                c.x0 = vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
                c.mode = InteractionMode::Constrained;
            }
            Experiment::Gadget => {}
        }
        c
    }

    pub fn apply(&mut self, p: &ConfigPatch) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = &p.$f { self.$f = v.clone(); } )* };
        }
        set!(preset, n_qubits, instances, seed, x0, omega, t_grid, steps, mode, p_target, out, g, t_guess, grid_points, coefficient);
        if p.problem.is_some() {
            self.problem = p.problem.clone();
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.t_grid.validate()?;
        if self.steps == 0 {
            return Err("--steps must be positive".into());
        }
        if self.n_qubits.is_empty() || self.n_qubits.iter().any(|&n| n == 0 || n > 12) {
            return Err("--n-qubits values must lie in 1..=12".into());
        }
        if self.instances == 0 {
            return Err("--instances must be positive".into());
        }
        if self.x0.is_empty() || self.x0.iter().any(|x| !x.is_finite()) {
            return Err("--x0 needs at least one finite value".into());
        }
        if self.omega.is_empty() || self.omega.iter().any(|x| !x.is_finite()) {
            return Err("--omega needs at least one finite value".into());
        }
        if !(self.p_target > 0.0 && self.p_target < 1.0) {
            return Err("--p-target must lie in (0, 1)".into());
        }
        if self.t_guess.is_nan() || self.t_guess <= 0.0 || self.grid_points < 2 || !self.g.is_finite() || !self.coefficient.is_finite() {
            return Err("invalid t_guess, grid_points, g or coefficient".into());
        }
        if self.mode == InteractionMode::Constrained && self.preset == Preset::Lz && self.experiment != Experiment::Gadget {
            return Err("--mode constrained needs --preset ising".into());
        }
        if matches!(self.experiment, Experiment::Tts | Experiment::X0Scan)
            && (self.preset != Preset::Ising || self.problem.is_some())
        {
            return Err(format!("{} runs on seeded random instances: use --preset ising without --problem", self.experiment.name()));
        }
        if self.experiment == Experiment::X0Scan && self.mode != InteractionMode::Constrained {
            return Err("x0-scan scans the constrained coupling (--mode constrained)".into());
        }
        if matches!(self.experiment, Experiment::FidelityScan | Experiment::LzCheck | Experiment::OmegaScan)
            && self.mode != InteractionMode::Full
        {
            return Err(format!("{} always uses full coupling (--mode full)", self.experiment.name()));
        }
        if self.problem.is_some() && self.preset == Preset::Lz && self.experiment != Experiment::Gadget {
            return Err("--problem needs --preset ising".into());
        }
        if matches!(self.experiment, Experiment::Tts | Experiment::OmegaScan) && self.x0.len() != 1 {
            return Err(format!("{} takes exactly one --x0 value", self.experiment.name()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}

/// Reads a config file: either a bare config object or a `meta.json`
/// with the config under `"config"`.
pub fn read_config_file(path: &Path) -> Result<ConfigPatch, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("{} is not valid JSON: {e}", path.display()))?;
    let inner = match value.get("config") {
        Some(c) if value.get("content_hash").is_some() => c.clone(),
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| format!("invalid config in {}: {e}", path.display()))
}
