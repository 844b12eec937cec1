//! Run configuration: a JSON document overlaid with command-line flags,
//! resolved into validated jobs before any computation starts.

use std::fs;
use std::path::{Path, PathBuf};

use cdwork::analysis::{log_spaced, validate_log_spaced, Flank, KzExperiment, Sweep, MIN_FIT_POINTS, MIN_GRID_POINTS};
use cdwork::control::DegeneracyPolicy;
use cdwork::models::{ModelSpec, RampKind, RampProfile};
use cdwork::workstats::MergeTolerance;
use clap::Args;
use serde::Deserialize;

use crate::Failure;

pub const WORKERS_ENV: &str = "CDWORK_WORKERS";

/// Every setting a run can take. Each field is optional in both the JSON
/// file and on the command line; flags win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub command: Option<String>,
    pub model: Option<String>,
    pub delta: Option<f64>,
    pub length: Option<usize>,
    pub length_list: Option<Vec<usize>>,
    pub ramp: Option<String>,
    pub g0: Option<f64>,
    pub gd: Option<f64>,
    pub tau_q: Option<f64>,
    pub tau_list: Option<Vec<f64>>,
    pub tau_min: Option<f64>,
    pub tau_max: Option<f64>,
    pub tau_count: Option<usize>,
    pub grid_points: Option<usize>,
    pub merge_tol: Option<f64>,
    pub gap_tol: Option<f64>,
    pub coupling_tol: Option<f64>,
    pub alpha: Option<f64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub kz_lines: Option<bool>,
    pub exit_flank: Option<bool>,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON config file; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// lz, ising or lmg
    #[arg(long)]
    pub model: Option<String>,
    /// Landau-Zener gap
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of spins
    #[arg(long)]
    pub length: Option<usize>,
    /// Comma-separated system sizes (LMG comparison)
    #[arg(long, value_delimiter = ',')]
    pub length_list: Option<Vec<usize>>,
    /// linear or sine
    #[arg(long)]
    pub ramp: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub g0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gd: Option<f64>,
    /// Ramp duration
    #[arg(long, allow_hyphen_values = true)]
    pub tau_q: Option<f64>,
    /// Comma-separated ramp durations
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub tau_list: Option<Vec<f64>>,
    /// Lower end of a log-spaced duration grid
    #[arg(long, allow_hyphen_values = true)]
    pub tau_min: Option<f64>,
    /// Upper end of a log-spaced duration grid
    #[arg(long, allow_hyphen_values = true)]
    pub tau_max: Option<f64>,
    /// Points in a log-spaced duration grid
    #[arg(long)]
    pub tau_count: Option<usize>,
    /// Time samples per ramp
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Outcome merge tolerance, relative to the spectral range
    #[arg(long, allow_hyphen_values = true)]
    pub merge_tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gap_tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub coupling_tol: Option<f64>,
    /// Constant in the adiabatic-impulse condition
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Worker threads (also CDWORK_WORKERS)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output CSV path; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add adiabatic-impulse times to the entropy map
    #[arg(long)]
    pub kz_lines: bool,
    /// Measure the crossover on the exit flank
    #[arg(long)]
    pub exit_flank: bool,
}

impl Flags {
    fn into_settings(self) -> Settings {
        Settings {
            command: None,
            model: self.model,
            delta: self.delta,
            length: self.length,
            length_list: self.length_list,
            ramp: self.ramp,
            g0: self.g0,
            gd: self.gd,
            tau_q: self.tau_q,
            tau_list: self.tau_list,
            tau_min: self.tau_min,
            tau_max: self.tau_max,
            tau_count: self.tau_count,
            grid_points: self.grid_points,
            merge_tol: self.merge_tol,
            gap_tol: self.gap_tol,
            coupling_tol: self.coupling_tol,
            alpha: self.alpha,
            workers: self.workers,
            out: self.out,
            kz_lines: self.kz_lines.then_some(true),
            exit_flank: self.exit_flank.then_some(true),
        }
    }
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("config {}: {e}", path.display())))
    }

    /// `top` wins field by field.
    fn overlay(self, top: Settings) -> Settings {
        Settings {
            command: top.command.or(self.command),
            model: top.model.or(self.model),
            delta: top.delta.or(self.delta),
            length: top.length.or(self.length),
            length_list: top.length_list.or(self.length_list),
            ramp: top.ramp.or(self.ramp),
            g0: top.g0.or(self.g0),
            gd: top.gd.or(self.gd),
            tau_q: top.tau_q.or(self.tau_q),
            tau_list: top.tau_list.or(self.tau_list),
            tau_min: top.tau_min.or(self.tau_min),
            tau_max: top.tau_max.or(self.tau_max),
            tau_count: top.tau_count.or(self.tau_count),
            grid_points: top.grid_points.or(self.grid_points),
            merge_tol: top.merge_tol.or(self.merge_tol),
            gap_tol: top.gap_tol.or(self.gap_tol),
            coupling_tol: top.coupling_tol.or(self.coupling_tol),
            alpha: top.alpha.or(self.alpha),
            workers: top.workers.or(self.workers),
            out: top.out.or(self.out),
            kz_lines: top.kz_lines.or(self.kz_lines),
            exit_flank: top.exit_flank.or(self.exit_flank),
        }
    }
}

/// Config file (if any) overlaid with flags.
pub fn gather(flags: Flags) -> Result<Settings, Failure> {
    let base = match &flags.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    Ok(base.overlay(flags.into_settings()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    LzDist,
    EntropyMap,
    KzScaling,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::LzDist => "lz-dist",
            Command::EntropyMap => "entropy-map",
            Command::KzScaling => "kz-scaling",
            Command::Compare => "compare",
        }
    }

    fn default_grid_points(self) -> usize {
        match self {
            Command::LzDist => 201,
            Command::EntropyMap => 401,
            Command::KzScaling => 2001,
            Command::Compare => 101,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Job {
    LzDist { model: ModelSpec, ramp: RampProfile, grid_points: usize },
    EntropyMap { model: ModelSpec, ramps: Vec<RampProfile>, grid_points: usize, kz_alpha: Option<f64> },
    KzScaling(KzExperiment),
    Compare { model: ModelSpec, ramp: RampProfile, sweep: Sweep, grid_points: usize },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub job: Job,
    pub merge: MergeTolerance,
    pub policy: DegeneracyPolicy,
    pub workers: usize,
    pub out: Option<PathBuf>,
}

fn config_err(field: &str, reason: impl std::fmt::Display) -> Failure {
    Failure::Config(format!("{field}: {reason}"))
}

fn core_err(e: cdwork::Error) -> Failure {
    Failure::Config(e.to_string())
}

fn parse_model(s: &Settings) -> Result<ModelSpec, Failure> {
    let name = s.model.as_deref().unwrap_or("lz");
    let model = match name {
        "lz" => ModelSpec::landau_zener(s.delta.unwrap_or(0.5)),
        "ising" => ModelSpec::ising(s.length.unwrap_or(5)),
        "lmg" => ModelSpec::lmg(s.length.unwrap_or(4)),
        other => return Err(config_err("model", format!("expected lz, ising or lmg, got {other:?}"))),
    };
    model.map_err(core_err)
}

fn is_lz(model: &ModelSpec) -> bool {
    matches!(model, ModelSpec::LandauZener { .. })
}

/// Ramp kind and endpoints; the defaults follow the model family.
fn ramp_shape(s: &Settings, model: &ModelSpec) -> Result<(RampKind, f64, f64), Failure> {
    let (kind, g0, gd) = if is_lz(model) { (RampKind::Linear, -10.0, 20.0) } else { (RampKind::Sine, 2.0, -1.2) };
    let kind = match s.ramp.as_deref() {
        None => kind,
        Some("linear") => RampKind::Linear,
        Some("sine") => RampKind::Sine,
        Some(other) => return Err(config_err("ramp", format!("expected linear or sine, got {other:?}"))),
    };
    Ok((kind, s.g0.unwrap_or(g0), s.gd.unwrap_or(gd)))
}

/// Duration grid: explicit list, then a single `tau_q`, then a log-spaced
/// range with the given defaults.
fn tau_grid(s: &Settings, lo: f64, hi: f64, count: usize) -> Result<Vec<f64>, Failure> {
    if let Some(list) = &s.tau_list {
        if list.is_empty() {
            return Err(config_err("tau_list", "empty"));
        }
        return Ok(list.clone());
    }
    if let Some(t) = s.tau_q {
        return Ok(vec![t]);
    }
    let (lo, hi, n) = (s.tau_min.unwrap_or(lo), s.tau_max.unwrap_or(hi), s.tau_count.unwrap_or(count));
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(config_err("tau_min/tau_max", format!("need 0 < tau_min < tau_max, got {lo} and {hi}")));
    }
    if n == 0 {
        return Err(config_err("tau_count", "must be positive"));
    }
    Ok(log_spaced(lo, hi, n))
}

fn ramps(kind: RampKind, g0: f64, gd: f64, taus: &[f64]) -> Result<Vec<RampProfile>, Failure> {
    taus.iter().map(|&t| RampProfile::new(kind, g0, gd, t).map_err(core_err)).collect()
}

/// `--workers` beats `CDWORK_WORKERS`, which beats the config file.
fn resolve_workers(flag: Option<usize>, env: Option<String>, file: Option<usize>) -> Result<usize, Failure> {
    let from_env = match env {
        Some(v) => {
            Some(v.trim().parse::<usize>().map_err(|_| config_err(WORKERS_ENV, format!("not a count: {v:?}")))?)
        }
        None => None,
    };
    let workers = flag
        .or(from_env)
        .or(file)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(config_err("workers", "must be at least 1"));
    }
    Ok(workers)
}

fn check_out(out: &Option<PathBuf>) -> Result<(), Failure> {
    if let Some(path) = out {
        if path.is_dir() {
            return Err(config_err("out", format!("{} is a directory", path.display())));
        }
        let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(config_err("out", format!("directory {} does not exist", parent.display())));
        }
    }
    Ok(())
}

/// Validates everything and builds the job. `flag_workers` is kept apart
/// from the file value so the environment can sit between them.
pub fn resolve(command: Command, s: Settings, flag_workers: Option<usize>) -> Result<RunConfig, Failure> {
    if let Some(c) = &s.command {
        if c != command.name() {
            return Err(config_err("command", format!("config is for {c:?} but {} was invoked", command.name())));
        }
    }
    let merge_tol = s.merge_tol.unwrap_or(1e-9);
    let merge = MergeTolerance::Relative(merge_tol);
    merge.validate().map_err(core_err)?;
    let policy = DegeneracyPolicy::new(s.gap_tol.unwrap_or(1e-9), s.coupling_tol.unwrap_or(1e-9)).map_err(core_err)?;
    let workers = resolve_workers(flag_workers, std::env::var(WORKERS_ENV).ok(), s.workers)?;
    check_out(&s.out)?;
    let grid_points = s.grid_points.unwrap_or(command.default_grid_points());

    let model = parse_model(&s)?;
    let (kind, g0, gd) = ramp_shape(&s, &model)?;

    let job = match command {
        Command::LzDist => {
            if !is_lz(&model) {
                return Err(config_err("model", "lz-dist needs the lz model"));
            }
            if grid_points < 2 {
                return Err(config_err("grid_points", "need at least 2"));
            }
            let ramp = RampProfile::new(kind, g0, gd, s.tau_q.unwrap_or(1.0)).map_err(core_err)?;
            Job::LzDist { model, ramp, grid_points }
        }
        Command::EntropyMap => {
            if grid_points < MIN_GRID_POINTS {
                return Err(config_err("grid_points", format!("need at least {MIN_GRID_POINTS}")));
            }
            let taus = tau_grid(&s, 0.05, 5.0, 16)?;
            let ramps = ramps(kind, g0, gd, &taus)?;
            let kz_alpha = if s.kz_lines.unwrap_or(false) {
                if !(is_lz(&model) && kind == RampKind::Linear) {
                    return Err(config_err("kz_lines", "needs the lz model with a linear ramp"));
                }
                let alpha = s.alpha.unwrap_or(1.0);
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(config_err("alpha", format!("must be positive, got {alpha}")));
                }
                Some(alpha)
            } else {
                None
            };
            Job::EntropyMap { model, ramps, grid_points, kz_alpha }
        }
        Command::KzScaling => {
            let ModelSpec::LandauZener { delta } = model else {
                return Err(config_err("model", "kz-scaling needs the lz model"));
            };
            if kind != RampKind::Linear {
                return Err(config_err("ramp", "kz-scaling needs a linear ramp"));
            }
            let taus = tau_grid(&s, 0.01, 1.0, 16)?;
            if taus.len() < MIN_FIT_POINTS {
                return Err(config_err("tau grid", format!("need at least {MIN_FIT_POINTS} durations, got {}", taus.len())));
            }
            validate_log_spaced(&taus).map_err(core_err)?;
            let mut exp = KzExperiment::new(delta, g0, gd, taus, grid_points);
            exp.policy = policy;
            exp.merge = merge;
            if s.exit_flank.unwrap_or(false) {
                exp.flank = Flank::Exit;
            }
            exp.validate().map_err(core_err)?;
            Job::KzScaling(exp)
        }
        Command::Compare => {
            if grid_points < 2 {
                return Err(config_err("grid_points", "need at least 2"));
            }
            match model {
                ModelSpec::LandauZener { .. } => {
                    return Err(config_err("model", "compare needs the ising or lmg model"));
                }
                ModelSpec::IsingChain { .. } => {
                    let taus = tau_grid(&s, 0.05, 2.0, 16)?;
                    ramps(kind, g0, gd, &taus)?;
                    let ramp = RampProfile::new(kind, g0, gd, taus[0]).map_err(core_err)?;
                    Job::Compare { model, ramp, sweep: Sweep::TauQ(taus), grid_points }
                }
                ModelSpec::Lmg { .. } => {
                    let lengths = s.length_list.clone().unwrap_or_else(|| vec![4, 8, 16, 32, 64]);
                    if lengths.is_empty() {
                        return Err(config_err("length_list", "empty"));
                    }
                    for &l in &lengths {
                        ModelSpec::lmg(l).map_err(core_err)?;
                    }
                    let ramp = RampProfile::new(kind, g0, gd, s.tau_q.unwrap_or(1.0)).map_err(core_err)?;
                    Job::Compare { model, ramp, sweep: Sweep::Length(lengths), grid_points }
                }
            }
        }
    };

    Ok(RunConfig { job, merge, policy, workers, out: s.out })
}
