use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fmt_f64, reverse_endpoint, SolverOptions};
use crate::driving::DrivingFunction;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub t: f64,
    pub gamma: Complex64,
    /// Tip height of the first reverse solve.
    pub y_tip: f64,
    pub err: f64,
}

impl CurveSample {
    pub fn ratio(&self) -> f64 {
        self.gamma.re / self.gamma.im
    }
}

/// Curve samples in the capacity parametrization, ordered in `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracedCurve {
    pub samples: Vec<CurveSample>,
}

impl TracedCurve {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.samples.iter().map(|s| s.gamma).collect()
    }

    pub fn max_err(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.err))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "re", "im", "ratio", "err"])?;
        for s in &self.samples {
            w.write_record(&[
                fmt_f64(s.t),
                fmt_f64(s.gamma.re),
                fmt_f64(s.gamma.im),
                fmt_f64(s.ratio()),
                fmt_f64(s.err),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `γ(t) ≈ ĥ_t(i·y_tip)` with one independent reverse solve per call.
///
/// With extrapolation, a second solve from `y_tip/2` is combined with the
/// first assuming `ĥ_t(iy) − γ(t) ∝ y^p`, where the local order `p` is read
/// off the ratio of the two accumulated derivatives
/// (`|ĥ′(iy)| ∝ y^{p−1}`). Without it, the error estimate is `y·|ĥ′(iy)|`.
pub fn trace_point<D: DrivingFunction + ?Sized>(
    d: &D,
    t: f64,
    opts: &SolverOptions,
) -> Result<CurveSample> {
    let y = opts.tip_height(t);
    if !(y > 0.0) {
        return Err(invalid(format!("tip height must be positive, got {y}")));
    }
    let first = reverse_endpoint(d, t, Complex64::new(0.0, y), opts)?;
    if !opts.richardson {
        return Ok(CurveSample {
            t,
            gamma: first.h(),
            y_tip: y,
            err: y * first.log_abs_deriv.exp(),
        });
    }
    let second = reverse_endpoint(d, t, Complex64::new(0.0, 0.5 * y), opts)?;
    let (v1, v2) = (first.h(), second.h());
    let order = (1.0 + (first.log_abs_deriv - second.log_abs_deriv) / std::f64::consts::LN_2)
        .clamp(0.25, 3.0);
    let gamma = v2 + (v2 - v1) / (2f64.powf(order) - 1.0);
    Ok(CurveSample {
        t,
        gamma,
        y_tip: y,
        err: (v1 - v2).norm(),
    })
}

/// Trace the curve at the given increasing times in `(0, T]`.
pub fn trace_curve<D: DrivingFunction + ?Sized>(
    d: &D,
    times: &[f64],
    opts: &SolverOptions,
) -> Result<TracedCurve> {
    opts.validate()?;
    if times.is_empty() {
        return Err(invalid("no times to trace"));
    }
    let horizon = d.horizon();
    for (i, &t) in times.iter().enumerate() {
        if !(t > 0.0) || t > horizon * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain { t, horizon });
        }
        if i > 0 && !(t > times[i - 1]) {
            return Err(invalid("trace times must be strictly increasing"));
        }
    }
    let samples = times
        .par_iter()
        .map(|&t| trace_point(d, t, opts).map_err(|e| e.context(format!("tracing t = {t}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(TracedCurve { samples })
}
