use cdwork::analysis::{adiabatic_impulse_times, compare_controls, entropy_trace, uniform_times, KzScaling};
use cdwork::control::{ControlScheme, ControlledDrive};
use cdwork::workstats::WorkStatistics;
use cdwork::Error;
use rayon::prelude::*;

use crate::config::{Job, RunConfig};
use crate::output::{fmt_float, Table};
use crate::Failure;

/// Band the fitted exponent is expected in; outside it a warning is printed.
const KZ_EXPONENT: f64 = 2.0 / 3.0;
const KZ_BAND: f64 = 0.07;

fn numerical(e: Error) -> Failure {
    Failure::Numerical(e.to_string())
}

pub struct Outcome {
    pub table: Table,
    /// Printed on standard output after the table.
    pub summary: Option<String>,
    pub warnings: Vec<String>,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, Failure> {
    match &cfg.job {
        Job::LzDist { model, ramp, grid_points } => {
            let drive = ControlledDrive::new(*model, *ramp, ControlScheme::FullCd, cfg.policy).map_err(numerical)?;
            let stats = WorkStatistics::new(drive, cfg.merge).map_err(numerical)?;
            let times = uniform_times(ramp.tau_q(), *grid_points);
            let dists = times
                .par_iter()
                .map(|&t| stats.distribution(t).map(|d| (t, d)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(numerical)?;
            let mut table = Table::new(vec!["t", "W", "p"]);
            for (t, d) in dists {
                for o in d.outcomes() {
                    table.rows.push(vec![fmt_float(t), fmt_float(o.work), fmt_float(o.probability)]);
                }
            }
            Ok(Outcome { table, summary: None, warnings: Vec::new() })
        }

        Job::EntropyMap { model, ramps, grid_points, kz_alpha } => {
            let traces = ramps
                .par_iter()
                .map(|r| entropy_trace(model, r, ControlScheme::FullCd, *grid_points, &cfg.policy, cfg.merge))
                .collect::<Result<Vec<_>, _>>()
                .map_err(numerical)?;
            let mut header = vec!["tau_q", "t", "h_w"];
            if kz_alpha.is_some() {
                header.extend(["t_hat_minus", "t_hat_plus"]);
            }
            let mut table = Table::new(header);
            let mut warnings = Vec::new();
            for (ramp, trace) in ramps.iter().zip(&traces) {
                let lines = match (kz_alpha, model) {
                    (Some(alpha), cdwork::models::ModelSpec::LandauZener { delta }) => {
                        match adiabatic_impulse_times(*delta, ramp, *alpha) {
                            Ok((lo, hi)) => Some((fmt_float(lo), fmt_float(hi))),
                            Err(e @ (Error::NoRoot { .. } | Error::NoCrossing)) => {
                                warnings.push(format!("tau_q = {}: {e}", fmt_float(ramp.tau_q())));
                                Some((String::new(), String::new()))
                            }
                            Err(e) => return Err(numerical(e)),
                        }
                    }
                    _ => None,
                };
                for &(t, h) in trace.samples() {
                    let mut row = vec![fmt_float(ramp.tau_q()), fmt_float(t), fmt_float(h)];
                    if let Some((lo, hi)) = &lines {
                        row.push(lo.clone());
                        row.push(hi.clone());
                    }
                    table.rows.push(row);
                }
            }
            Ok(Outcome { table, summary: None, warnings })
        }

        Job::KzScaling(exp) => {
            let KzScaling { rows, fit } = exp.run().map_err(numerical)?;
            let mut table = Table::new(vec!["tau_q", "t_star", "t_c", "width"]);
            for r in &rows {
                table.rows.push(vec![fmt_float(r.tau_q), fmt_float(r.t_star), fmt_float(r.t_c), fmt_float(r.width)]);
            }
            let mut warnings = Vec::new();
            if (fit.exponent - KZ_EXPONENT).abs() > KZ_BAND {
                warnings.push(format!(
                    "regime discrepancy: fitted exponent {} lies outside {} +/- {KZ_BAND}",
                    fmt_float(fit.exponent),
                    fmt_float(KZ_EXPONENT)
                ));
            }
            let summary = format!("exponent={} r2={}", fmt_float(fit.exponent), fmt_float(fit.r_squared));
            Ok(Outcome { table, summary: Some(summary), warnings })
        }

        Job::Compare { model, ramp, sweep, grid_points } => {
            let cmp = compare_controls(model, ramp, sweep, *grid_points, &cfg.policy, cfg.merge).map_err(numerical)?;
            let mut table =
                Table::new(vec!["axis_value", "t", "h_w_full", "h_w_restricted", "mean_w", "adiabatic_w"]);
            for r in &cmp.rows {
                table.rows.push(vec![
                    fmt_float(r.axis_value),
                    fmt_float(r.t),
                    fmt_float(r.h_full),
                    fmt_float(r.h_restricted),
                    fmt_float(r.mean_work),
                    fmt_float(r.adiabatic_work),
                ]);
            }
            Ok(Outcome { table, summary: None, warnings: Vec::new() })
        }
    }
}
