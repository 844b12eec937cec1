//! Entropy traces along a controlled drive and the crossover quantities
//! derived from them.

mod experiments;
mod fit;

pub use experiments::{
    compare_controls, kz_scaling_experiment, log_spaced, validate_log_spaced, CompareRow, ControlComparison,
    KzExperiment, KzRow, KzScaling, Sweep,
};
pub use fit::{fit_power_law, PowerLawFit, MIN_FIT_POINTS};

use rayon::prelude::*;

use crate::control::{ControlScheme, ControlledDrive, DegeneracyPolicy};
use crate::models::{ModelSpec, RampKind, RampProfile};
use crate::tolerances::FLAT_TRACE_TOL;
use crate::workstats::{shannon_entropy, MergeTolerance, WorkStatistics};
use crate::{Error, Result};

/// Smallest grid accepted by [`entropy_trace`].
pub const MIN_GRID_POINTS: usize = 100;

/// Which side of the crossing `t*` is searched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Flank {
    /// `t < t_c`, largest increase of the entropy.
    #[default]
    Entry,
    /// `t > t_c`, largest decrease of the entropy.
    Exit,
}

/// `H_W(t)` sampled on a strictly increasing time grid over `[0, tau_q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyTrace {
    samples: Vec<(f64, f64)>,
    model: ModelSpec,
    ramp: RampProfile,
    scheme: ControlScheme,
}

impl EntropyTrace {
    /// Wraps externally computed samples; times must increase strictly and
    /// lie in the ramp window.
    pub fn from_samples(
        samples: Vec<(f64, f64)>,
        model: ModelSpec,
        ramp: RampProfile,
        scheme: ControlScheme,
    ) -> Result<Self> {
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::invalid("samples", "times must be strictly increasing"));
        }
        if samples.iter().any(|&(t, h)| !(0.0..=ramp.tau_q()).contains(&t) || !h.is_finite()) {
            return Err(Error::invalid("samples", "time outside ramp window or non-finite entropy"));
        }
        Ok(EntropyTrace { samples, model, ramp, scheme })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn tau_q(&self) -> f64 {
        self.ramp.tau_q()
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn ramp(&self) -> &RampProfile {
        &self.ramp
    }

    pub fn scheme(&self) -> ControlScheme {
        self.scheme
    }

    pub fn max_entropy(&self) -> f64 {
        self.samples.iter().map(|s| s.1).fold(0.0, f64::max)
    }

    /// Trace with extra sample times merged in (existing times are kept).
    fn refined(&self, stats: &WorkStatistics, extra: &[f64]) -> Result<Self> {
        let mut new_times: Vec<f64> = extra
            .iter()
            .copied()
            .filter(|t| self.samples.binary_search_by(|s| s.0.total_cmp(t)).is_err())
            .collect();
        new_times.sort_by(f64::total_cmp);
        new_times.dedup();
        let fresh = evaluate(stats, &new_times)?;
        let mut samples = self.samples.clone();
        samples.extend(fresh);
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(EntropyTrace { samples, ..*self })
    }
}

/// `n` equally spaced times from 0 to `tau` inclusive; the last is exactly `tau`.
pub fn uniform_times(tau: f64, n: usize) -> Vec<f64> {
    let last = n - 1;
    (0..n)
        .map(|k| if k == last { tau } else { tau * k as f64 / last as f64 })
        .collect()
}

fn evaluate(stats: &WorkStatistics, times: &[f64]) -> Result<Vec<(f64, f64)>> {
    times
        .par_iter()
        .map(|&t| Ok((t, shannon_entropy(&stats.distribution(t)?))))
        .collect()
}

/// `H_W` on `grid_points` uniform times including both endpoints.
pub fn entropy_trace(
    model: &ModelSpec,
    ramp: &RampProfile,
    scheme: ControlScheme,
    grid_points: usize,
    policy: &DegeneracyPolicy,
    merge: MergeTolerance,
) -> Result<EntropyTrace> {
    if grid_points < MIN_GRID_POINTS {
        return Err(Error::invalid("grid_points", format!("need at least {MIN_GRID_POINTS}, got {grid_points}")));
    }
    let stats = WorkStatistics::new(ControlledDrive::new(*model, *ramp, scheme, *policy)?, merge)?;
    trace_with(&stats, grid_points)
}

fn trace_with(stats: &WorkStatistics, grid_points: usize) -> Result<EntropyTrace> {
    let drive = stats.drive();
    let samples = evaluate(stats, &uniform_times(drive.ramp().tau_q(), grid_points))?;
    Ok(EntropyTrace { samples, model: *drive.model(), ramp: *drive.ramp(), scheme: drive.scheme() })
}

/// Time of the steepest entropy rise before the crossing.
pub fn crossover_time(trace: &EntropyTrace) -> Result<f64> {
    crossover_time_on(trace, Flank::Entry)
}

/// Time of the steepest entropy change on the given side of the crossing
/// (the whole trace when the ramp never crosses zero).
///
/// Uses centered differences `(h[i+1] - h[i-1]) / (t[i+1] - t[i-1])` and
/// refines the discrete extremum with a parabola through its neighbours.
/// Stencils touching `t = 0` or `t = tau_q` are skipped: the control term is
/// switched off exactly there, so the entropy jumps at the ends of a fast
/// ramp.
pub fn crossover_time_on(trace: &EntropyTrace, flank: Flank) -> Result<f64> {
    let s = &trace.samples;
    if s.len() < 3 {
        return Err(Error::invalid("trace", "need at least 3 samples"));
    }
    let sign = match flank {
        Flank::Entry => 1.0,
        Flank::Exit => -1.0,
    };
    let t_c = trace.ramp.crossing_time();
    let on_flank = |t: f64| match (t_c, flank) {
        (None, _) => true,
        (Some(tc), Flank::Entry) => t < tc,
        (Some(tc), Flank::Exit) => t > tc,
    };
    let rate = |i: usize| (s[i + 1].1 - s[i - 1].1) / (s[i + 1].0 - s[i - 1].0);

    let tau = trace.ramp.tau_q();
    let interior = |i: usize| i >= 1 && i + 1 < s.len() && s[i - 1].0 > 0.0 && s[i + 1].0 < tau;

    let mut best: Option<(usize, f64)> = None;
    for i in 1..s.len() - 1 {
        if !on_flank(s[i].0) || !interior(i) {
            continue;
        }
        let r = sign * rate(i);
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((i, r));
        }
    }
    let (i, peak) = match best {
        Some(b) if b.1 >= FLAT_TRACE_TOL => b,
        _ => return Err(Error::FlatTrace),
    };

    if !interior(i - 1) || !interior(i + 1) {
        return Ok(s[i].0);
    }
    let (x0, x1, x2) = (s[i - 1].0, s[i].0, s[i + 1].0);
    let (y0, y1, y2) = (sign * rate(i - 1), peak, sign * rate(i + 1));
    Ok(parabola_vertex((x0, y0), (x1, y1), (x2, y2)).unwrap_or(x1))
}

/// Vertex of the parabola through three points when it is a maximum inside
/// `[x0, x2]`.
fn parabola_vertex((x0, y0): (f64, f64), (x1, y1): (f64, f64), (x2, y2): (f64, f64)) -> Option<f64> {
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if !(curvature < 0.0) || !curvature.is_finite() {
        return None;
    }
    // y = y0 + d01 (x - x0) + curvature (x - x0)(x - x1)
    let vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
    vertex.is_finite().then(|| vertex.clamp(x0, x2))
}

/// `|t_c - t*|` with `t_c` the zero of the ramp.
pub fn impulse_width(trace: &EntropyTrace, ramp: &RampProfile) -> Result<f64> {
    impulse_width_on(trace, ramp, Flank::Entry)
}

pub fn impulse_width_on(trace: &EntropyTrace, ramp: &RampProfile, flank: Flank) -> Result<f64> {
    let t_c = ramp.crossing_time().ok_or(Error::NoCrossing)?;
    Ok((t_c - crossover_time_on(trace, flank)?).abs())
}

/// Landau-Zener gap `sqrt(delta^2 + g(t)^2)`.
pub fn lz_gap(delta: f64, ramp: &RampProfile, t: f64) -> Result<f64> {
    let g = ramp.value(t)?;
    Ok(delta.hypot(g))
}

/// Adiabatic-impulse boundaries: the times on either side of the crossing
/// where `gap(t) |t - t_c| = alpha`.
pub fn adiabatic_impulse_times(delta: f64, ramp: &RampProfile, alpha: f64) -> Result<(f64, f64)> {
    if ramp.kind() != RampKind::Linear {
        return Err(Error::invalid("ramp", "adiabatic-impulse times need a linear ramp"));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid("alpha", "must be positive"));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::invalid("delta", "must be finite and >= 0"));
    }
    let t_c = ramp.crossing_time().ok_or(Error::NoCrossing)?;
    let solve = |direction: f64, reach: f64| -> Result<f64> {
        let residual = |s: f64| -> Result<f64> { Ok(lz_gap(delta, ramp, t_c + direction * s)? * s - alpha) };
        if reach <= 0.0 || residual(reach)? < 0.0 {
            return Err(Error::NoRoot { alpha });
        }
        let (mut lo, mut hi) = (0.0f64, reach);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if residual(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(t_c + direction * 0.5 * (lo + hi))
    };
    let minus = solve(-1.0, t_c)?;
    let plus = solve(1.0, ramp.tau_q() - t_c)?;
    Ok((minus, plus))
}
