//! Power-law and exponential rate fits on logarithmic axes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this coefficient of determination a power law is a poor model.
pub const LOW_R_SQUARED: f64 = 0.99;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitAxis {
    /// Abscissa `1 + t`.
    Time,
    /// Abscissa used as given (e.g. `eps`).
    Plain,
    /// `log y` against `t` itself: the slope is an exponential rate.
    SemiLog,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    pub window: [f64; 2],
    pub r_squared: f64,
    pub stderr: f64,
    pub points: usize,
    pub low_r_squared: bool,
}

/// Least squares of `log y` against `log x~` over the samples with
/// `x` in `window`; at least 5 points.
pub fn fit_rate(x: &[f64], y: &[f64], window: [f64; 2], axis: FitAxis) -> Result<RateFit> {
    fit_rate_with(x, y, window, axis, 5)
}

pub fn fit_rate_with(x: &[f64], y: &[f64], window: [f64; 2], axis: FitAxis, min_points: usize) -> Result<RateFit> {
    if x.len() != y.len() {
        return Err(Error::DegenerateFit(format!("{} abscissae but {} values", x.len(), y.len())));
    }
    if !(window[0] <= window[1]) {
        return Err(Error::DegenerateFit(format!("empty window [{}, {}]", window[0], window[1])));
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&xi, &yi) in x.iter().zip(y) {
        if xi < window[0] || xi > window[1] {
            continue;
        }
        if !(yi > 0.0 && yi.is_finite()) {
            return Err(Error::DegenerateFit(format!("nonpositive value {yi} at x = {xi}")));
        }
        let xt = match axis {
            FitAxis::Time => 1.0 + xi,
            FitAxis::Plain | FitAxis::SemiLog => xi,
        };
        if axis == FitAxis::SemiLog {
            lx.push(xt);
        } else if xt > 0.0 {
            lx.push(xt.ln());
        } else {
            return Err(Error::DegenerateFit(format!("abscissa {xt} has no logarithm")));
        }
        ly.push(yi.ln());
    }
    let n = lx.len();
    if n < min_points.max(3) {
        return Err(Error::DegenerateFit(format!("need at least {} points in the window, found {n}", min_points.max(3))));
    }
    let nf = n as f64;
    let mx = lx.iter().sum::<f64>() / nf;
    let my = ly.iter().sum::<f64>() / nf;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - ssr / syy).clamp(0.0, 1.0) } else { 1.0 };
    let stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok(RateFit {
        exponent: slope,
        intercept,
        window,
        r_squared,
        stderr,
        points: n,
        low_r_squared: r_squared < LOW_R_SQUARED,
    })
}

/// `n` geometrically spaced points on `[lo, hi]`.
pub fn geometric_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let r = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|k| lo * r.powi(k as i32)).collect()
}
