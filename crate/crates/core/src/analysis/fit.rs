use crate::{Error, Result};

/// Minimum number of points for a scaling fit.
pub const MIN_FIT_POINTS: usize = 5;

/// `y = prefactor * x^exponent` fitted by least squares in log-log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares on `(ln x, ln y)`.
pub fn fit_power_law(pairs: &[(f64, f64)]) -> Result<PowerLawFit> {
    if pairs.iter().any(|&(x, y)| !(x.is_finite() && y.is_finite() && x > 0.0 && y > 0.0)) {
        return Err(Error::invalid("pairs", "all x and y must be positive and finite"));
    }
    if pairs.is_empty() || pairs.iter().all(|p| p.0 == pairs[0].0) {
        return Err(Error::DegenerateInput("all x values are equal".into()));
    }
    if pairs.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateInput(format!(
            "need at least {MIN_FIT_POINTS} points, got {}",
            pairs.len()
        )));
    }

    let n = pairs.len() as f64;
    let logs: Vec<(f64, f64)> = pairs.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(lx, ly) in &logs {
        let (dx, dy) = (lx - mx, ly - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = logs
        .iter()
        .map(|&(lx, ly)| {
            let r = ly - (intercept + slope * lx);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };

    Ok(PowerLawFit { exponent: slope, prefactor: intercept.exp(), r_squared, points: pairs.len() })
}
