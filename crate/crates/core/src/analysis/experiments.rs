//! Parameter sweeps: Kibble-Zurek scaling of the impulse width and the
//! full-versus-restricted control comparison.

use rayon::prelude::*;

use super::fit::{fit_power_law, PowerLawFit};
use super::{crossover_time_on, trace_with, EntropyTrace, Flank, MIN_GRID_POINTS};
use crate::control::{ControlScheme, ControlledDrive, DegeneracyPolicy};
use crate::models::{ModelSpec, RampProfile};
use crate::tolerances::MEAN_WORK_TOL;
use crate::workstats::{mean_work, shannon_entropy, MergeTolerance, WorkStatistics};
use crate::{Error, Result};

/// Refinement factor of the local grid around the crossing.
const REFINE_FACTOR: usize = 5;
/// Half-width of the refinement window in units of the coarse impulse width.
const REFINE_WINDOW: f64 = 5.0;

/// Checks a duration grid is positive, strictly increasing and evenly
/// spaced in log scale.
pub fn validate_log_spaced(taus: &[f64]) -> Result<()> {
    if taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::invalid("tau_list", "durations must be positive and finite"));
    }
    if taus.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("tau_list", "durations must be strictly increasing"));
    }
    if taus.len() >= 3 {
        let step = (taus[1] / taus[0]).ln();
        let uneven = taus.windows(2).any(|w| ((w[1] / w[0]).ln() - step).abs() > 1e-6 * step.abs());
        if uneven {
            return Err(Error::invalid("tau_list", "durations must be log-spaced"));
        }
    }
    Ok(())
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| match k {
            0 => lo,
            k if k == n - 1 => hi,
            k => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KzRow {
    pub tau_q: f64,
    pub t_star: f64,
    pub t_c: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KzScaling {
    pub rows: Vec<KzRow>,
    pub fit: PowerLawFit,
}

impl KzScaling {
    pub fn widths_strictly_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].width > w[0].width)
    }
}

/// Impulse-width scaling of the Landau-Zener model under full CD driving
/// along a linear ramp.
#[derive(Debug, Clone)]
pub struct KzExperiment {
    pub delta: f64,
    pub g0: f64,
    pub g_d: f64,
    pub taus: Vec<f64>,
    pub grid_points: usize,
    pub flank: Flank,
    pub policy: DegeneracyPolicy,
    pub merge: MergeTolerance,
}

impl KzExperiment {
    pub fn new(delta: f64, g0: f64, g_d: f64, taus: Vec<f64>, grid_points: usize) -> Self {
        KzExperiment {
            delta,
            g0,
            g_d,
            taus,
            grid_points,
            flank: Flank::Entry,
            policy: DegeneracyPolicy::default(),
            merge: MergeTolerance::default(),
        }
    }

    /// Checks everything that can be checked without running the sweep.
    pub fn validate(&self) -> Result<()> {
        ModelSpec::landau_zener(self.delta)?;
        validate_log_spaced(&self.taus)?;
        if self.grid_points < MIN_GRID_POINTS {
            return Err(Error::invalid("grid_points", format!("need at least {MIN_GRID_POINTS}")));
        }
        for &tau in &self.taus {
            RampProfile::linear(self.g0, self.g_d, tau)?.crossing_time().ok_or(Error::NoCrossing)?;
        }
        Ok(())
    }

    /// Entropy trace for one duration: uniform grid, then one pass of local
    /// refinement around the crossing.
    pub fn trace(&self, tau: f64) -> Result<EntropyTrace> {
        let model = ModelSpec::landau_zener(self.delta)?;
        let ramp = RampProfile::linear(self.g0, self.g_d, tau)?;
        let t_c = ramp.crossing_time().ok_or(Error::NoCrossing)?;
        let stats = WorkStatistics::new(ControlledDrive::new(model, ramp, ControlScheme::FullCd, self.policy)?, self.merge)?;
        let coarse = trace_with(&stats, self.grid_points)?;
        let t_star = crossover_time_on(&coarse, self.flank).map_err(|e| flat_at(e, tau))?;

        let dt = tau / (self.grid_points - 1) as f64;
        let half = REFINE_WINDOW * (t_c - t_star).abs().max(dt);
        let (lo, hi) = ((t_c - half).max(0.0), (t_c + half).min(tau));
        let fine_dt = dt / REFINE_FACTOR as f64;
        let count = ((hi - lo) / fine_dt).floor() as usize;
        let extra: Vec<f64> = (0..=count).map(|k| lo + k as f64 * fine_dt).filter(|&t| t <= hi).collect();
        coarse.refined(&stats, &extra)
    }

    pub fn row(&self, tau: f64) -> Result<KzRow> {
        let trace = self.trace(tau)?;
        let t_c = trace.ramp().crossing_time().ok_or(Error::NoCrossing)?;
        let t_star = crossover_time_on(&trace, self.flank).map_err(|e| flat_at(e, tau))?;
        Ok(KzRow { tau_q: tau, t_star, t_c, width: (t_c - t_star).abs() })
    }

    pub fn run(&self) -> Result<KzScaling> {
        validate_log_spaced(&self.taus)?;
        let rows: Vec<KzRow> = self.taus.par_iter().map(|&tau| self.row(tau)).collect::<Result<_>>()?;
        let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.tau_q, r.width)).collect();
        let fit = fit_power_law(&pairs)?;
        Ok(KzScaling { rows, fit })
    }
}

fn flat_at(e: Error, tau_q: f64) -> Error {
    match e {
        Error::FlatTrace => Error::FlatTraceAt { tau_q },
        other => other,
    }
}

/// Impulse widths over `tau_list` and their power-law fit.
pub fn kz_scaling_experiment(delta: f64, g0: f64, g_d: f64, tau_list: &[f64], grid_points: usize) -> Result<KzScaling> {
    KzExperiment::new(delta, g0, g_d, tau_list.to_vec(), grid_points).run()
}

/// Axis of a control comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// Fixed model, varying ramp duration.
    TauQ(Vec<f64>),
    /// Fixed ramp, varying system size.
    Length(Vec<usize>),
}

impl Sweep {
    fn len(&self) -> usize {
        match self {
            Sweep::TauQ(v) => v.len(),
            Sweep::Length(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareRow {
    pub axis_value: f64,
    pub t: f64,
    pub h_full: f64,
    pub h_restricted: f64,
    pub mean_work: f64,
    pub adiabatic_work: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlComparison {
    pub rows: Vec<CompareRow>,
}

impl ControlComparison {
    /// `(axis value, max_t H_full, max_t H_restricted)` per sweep cell.
    pub fn maxima(&self) -> Vec<(f64, f64, f64)> {
        let mut out: Vec<(f64, f64, f64)> = Vec::new();
        for r in &self.rows {
            match out.last_mut() {
                Some(last) if last.0 == r.axis_value => {
                    last.1 = last.1.max(r.h_full);
                    last.2 = last.2.max(r.h_restricted);
                }
                _ => out.push((r.axis_value, r.h_full, r.h_restricted)),
            }
        }
        out
    }
}

fn check_mean_work(t: f64, mean: f64, adiabatic: f64) -> Result<()> {
    if (mean - adiabatic).abs() > MEAN_WORK_TOL * (1.0 + adiabatic.abs()) {
        return Err(Error::MeanWorkMismatch { t, mean, adiabatic });
    }
    Ok(())
}

/// `H_W` under full and restricted (ground-state) control on a uniform time
/// grid for every sweep value; asserts mean-work equality in every cell.
pub fn compare_controls(
    model: &ModelSpec,
    ramp: &RampProfile,
    sweep: &Sweep,
    grid_points: usize,
    policy: &DegeneracyPolicy,
    merge: MergeTolerance,
) -> Result<ControlComparison> {
    if !matches!(model, ModelSpec::IsingChain { .. } | ModelSpec::Lmg { .. }) {
        return Err(Error::invalid("model", "control comparison needs the ising or lmg model"));
    }
    if grid_points < 2 {
        return Err(Error::invalid("grid_points", "need at least 2"));
    }
    if sweep.len() == 0 {
        return Err(Error::invalid("sweep", "empty sweep"));
    }

    let cells: Vec<(f64, ModelSpec, RampProfile)> = match sweep {
        Sweep::TauQ(taus) => taus
            .iter()
            .map(|&tau| Ok((tau, *model, ramp.with_tau_q(tau)?)))
            .collect::<Result<_>>()?,
        Sweep::Length(lengths) => lengths
            .iter()
            .map(|&l| {
                let m = match model {
                    ModelSpec::IsingChain { .. } => ModelSpec::ising(l)?,
                    _ => ModelSpec::lmg(l)?,
                };
                Ok((l as f64, m, *ramp))
            })
            .collect::<Result<_>>()?,
    };

    let per_cell: Vec<Vec<CompareRow>> = cells
        .par_iter()
        .map(|&(axis_value, m, r)| {
            let full = WorkStatistics::new(ControlledDrive::new(m, r, ControlScheme::FullCd, *policy)?, merge)?;
            let restricted =
                WorkStatistics::new(ControlledDrive::new(m, r, ControlScheme::RestrictedCd(0), *policy)?, merge)?;
            super::uniform_times(r.tau_q(), grid_points)
                .par_iter()
                .map(|&t| {
                    let a = full.sample(t)?;
                    let b = restricted.sample(t)?;
                    let mean_full = mean_work(&a.distribution);
                    check_mean_work(t, mean_full, a.adiabatic_work)?;
                    check_mean_work(t, mean_work(&b.distribution), b.adiabatic_work)?;
                    Ok(CompareRow {
                        axis_value,
                        t,
                        h_full: shannon_entropy(&a.distribution),
                        h_restricted: shannon_entropy(&b.distribution),
                        mean_work: mean_full,
                        adiabatic_work: a.adiabatic_work,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    Ok(ControlComparison { rows: per_cell.into_iter().flatten().collect() })
}
