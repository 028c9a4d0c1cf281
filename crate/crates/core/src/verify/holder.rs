use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::flow::TracedCurve;

/// Fewest samples accepted in a fitting window.
pub const MIN_HOLDER_SAMPLES: usize = 32;

/// Dyadic lags needed: four octaves means five lags.
const MIN_LAGS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero for two points.
    pub stderr: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 paired points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    if !slope.is_finite() {
        return Err(Error::Fit("non-finite slope".into()));
    }
    Ok(LineFit {
        slope,
        intercept,
        stderr,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    pub exponent: f64,
    pub stderr: f64,
    /// `(lag, max increment)` pairs used in the fit.
    pub lags: Vec<(f64, f64)>,
}

/// Hölder exponent of the curve over `window = [a, b]`: the slope of
/// `log max_i |γ(t_i + s) − γ(t_i)|` against `log s` over dyadic lags
/// `s = 2^k h` (h the mean sample spacing).
///
/// Lags run up to `max(16, n/8)` samples: four octaves at least, but kept at
/// the small-scale end so that the curvature of smooth arcs does not bias the
/// slope.
pub fn estimate_holder(curve: &TracedCurve, window: (f64, f64)) -> Result<HolderFit> {
    let (a, b) = window;
    if !(a > 0.0) || !(b > a) {
        return Err(invalid(format!(
            "window must satisfy 0 < a < b, got [{a}, {b}]"
        )));
    }
    let slack = 1e-12 * b;
    let pts: Vec<_> = curve
        .samples
        .iter()
        .filter(|s| s.t >= a - slack && s.t <= b + slack)
        .collect();
    let n = pts.len();
    if n < MIN_HOLDER_SAMPLES {
        return Err(Error::Fit(format!(
            "window holds {n} samples, need at least {MIN_HOLDER_SAMPLES}"
        )));
    }
    let mut lags = Vec::new();
    let mut lag = 1;
    let max_lag = (n / 8).max(16).min(n / 2);
    while lag <= max_lag {
        let mut inc: f64 = 0.0;
        let mut span = 0.0;
        for i in 0..n - lag {
            inc = inc.max((pts[i + lag].gamma - pts[i].gamma).norm());
            span += pts[i + lag].t - pts[i].t;
        }
        lags.push((span / (n - lag) as f64, inc));
        lag *= 2;
    }
    if lags.len() < MIN_LAGS {
        return Err(Error::Fit(format!(
            "only {} dyadic lags available",
            lags.len()
        )));
    }
    if lags.iter().any(|&(_, inc)| !(inc > 0.0)) {
        return Err(Error::Fit("curve is constant over the window".into()));
    }
    let x: Vec<f64> = lags.iter().map(|l| l.0.ln()).collect();
    let y: Vec<f64> = lags.iter().map(|l| l.1.ln()).collect();
    let fit = fit_line(&x, &y)?;
    Ok(HolderFit {
        exponent: fit.slope,
        stderr: fit.stderr,
        lags,
    })
}
