//! Ordinary least squares for the log-log and log-linear fits.

use crate::error::{invalid, Result};

/// `y = slope * x + intercept` with the standard error of the slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// Coefficient of determination; 1 for exact fits and for constant `y`.
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares line through `(xs[i], ys[i])`. Needs at least three points
/// and at least two distinct `x`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return invalid(format!("{} x values but {} y values", xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 3 {
        return invalid(format!("a slope fit needs at least 3 points, got {n}"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return invalid("fit data must be finite");
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) * nf {
        return invalid("x values are all equal");
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let stderr = (sse / (nf - 2.0) / sxx).sqrt();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    Ok(LinearFit {
        slope,
        intercept,
        stderr,
        r_squared,
        points: n,
    })
}
