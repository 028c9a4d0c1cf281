//! Forward and reverse chordal Loewner flows.
//!
//! The reverse flow `dĥ = dβ − 2/ĥ ds` is integrated by composing exact
//! conformal maps: on each substep the driver is frozen, which turns the
//! equation into `ĥ ↦ √(ĥ² − 4δs)`, and the driver increment is applied as a
//! horizontal shift split evenly before and after the map. Every substep is
//! therefore an exact self-map of the upper half-plane and the spatial
//! derivative of the composition is accumulated exactly.

mod forward;
mod reparam;
mod trace;

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::driving::{reverse_driver, DrivingFunction};
use crate::error::{invalid, Error, Result};

pub use forward::solve_forward;
pub use reparam::{reparametrize, ReparamSample, ReparamTrajectory};
pub use trace::{trace_curve, trace_point, CurveSample, TracedCurve};

/// Seminorm at and above which drivers may fail to generate simple curves.
pub const CRITICAL_SEMINORM: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// Multiply the exact derivative of every elementary map.
    #[default]
    ExactPerSubstep,
    /// Trapezoidal quadrature of the `d log Y` integral formulas.
    IntegralQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Substeps satisfy `δs ≤ tol · Y² / 4`.
    pub tol: f64,
    pub max_substeps: usize,
    /// Absolute tip height; `None` means `1e-4 · √t` for each traced time.
    pub y_tip: Option<f64>,
    pub richardson: bool,
    pub derivative: DerivativeMode,
    /// Integrate drivers with nominal seminorm `≥ 4`.
    pub allow_supercritical: bool,
    pub forward_rtol: f64,
    pub forward_atol: f64,
    /// Forward points closer than `swallow_tol · (1 + |z|)` to the driver, or
    /// ending within about `swallow_tol` of their swallowing time, are
    /// reported as swallowed.
    pub swallow_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-3,
            max_substeps: 50_000_000,
            y_tip: None,
            richardson: true,
            derivative: DerivativeMode::ExactPerSubstep,
            allow_supercritical: false,
            forward_rtol: 1e-11,
            forward_atol: 1e-13,
            swallow_tol: 1e-7,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.forward_rtol > 0.0) || !(self.forward_atol > 0.0) {
            return Err(invalid("solver tolerances must be positive"));
        }
        if !(self.swallow_tol > 0.0) {
            return Err(invalid("swallow tolerance must be positive"));
        }
        if let Some(y) = self.y_tip {
            if !(y > 0.0) {
                return Err(invalid(format!("tip height must be positive, got {y}")));
            }
        }
        if self.max_substeps == 0 {
            return Err(invalid("substep budget must be positive"));
        }
        Ok(())
    }

    /// Tip height used when tracing time `t`.
    pub fn tip_height(&self, t: f64) -> f64 {
        self.y_tip.unwrap_or(1e-4 * t.sqrt())
    }
}

/// One point of a reverse trajectory started at `iy₀` (or `z₀`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub log_abs_deriv: f64,
    /// Continuously accumulated, never reduced mod 2π.
    pub arg_deriv: f64,
}

impl FlowState {
    pub fn start(z: Complex64) -> Self {
        FlowState {
            s: 0.0,
            x: z.re,
            y: z.im,
            log_abs_deriv: 0.0,
            arg_deriv: 0.0,
        }
    }

    pub fn h(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn w(&self) -> f64 {
        self.x / self.y
    }

    pub fn derivative(&self) -> Complex64 {
        Complex64::from_polar(self.log_abs_deriv.exp(), self.arg_deriv)
    }
}

/// Outcome of one elementary map: new point and `ln` of the derivative factor.
#[derive(Debug, Clone, Copy)]
struct Elementary {
    h: Complex64,
    log_factor: Complex64,
}

/// `ĥ ↦ √(ĥ² − 4δs)` on the branch with positive imaginary part.
#[inline]
fn elementary_map(h: Complex64, ds: f64) -> Elementary {
    let q = 4.0 * ds / (h * h);
    let one_minus_q = Complex64::new(1.0 - q.re, -q.im);
    let mut r = h * one_minus_q.sqrt();
    if r.im < 0.0 {
        r = -r;
        let factor = h / r;
        return Elementary {
            h: r,
            log_factor: Complex64::new(factor.norm().ln(), factor.arg()),
        };
    }
    // ln(h / r) = −½ ln(1 − q), written to stay accurate for tiny q.
    let ln_abs = 0.5 * (-2.0 * q.re + q.norm_sqr()).ln_1p();
    Elementary {
        h: r,
        log_factor: Complex64::new(-0.5 * ln_abs, -0.5 * one_minus_q.arg()),
    }
}

/// Apply one exact flow piece of duration `ds` with frozen driver, then shift
/// by `dbeta`. The derivative accumulators pick up `ĥ / √(ĥ² − 4δs)`.
pub fn step_elementary(state: &FlowState, dbeta: f64, ds: f64) -> Result<FlowState> {
    if !(ds > 0.0) {
        return Err(invalid(format!(
            "flow time step must be positive, got {ds}"
        )));
    }
    if !(state.y > 0.0) {
        return Err(invalid(format!(
            "state must lie in the upper half-plane, got Y = {}",
            state.y
        )));
    }
    let e = elementary_map(state.h(), ds);
    Ok(FlowState {
        s: state.s + ds,
        x: e.h.re + dbeta,
        y: e.h.im,
        log_abs_deriv: state.log_abs_deriv + e.log_factor.re,
        arg_deriv: state.arg_deriv + e.log_factor.im,
    })
}

/// Reverse-flow record from `z₀` over `[0, t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrajectory {
    pub start: Complex64,
    pub horizon: f64,
    pub states: Vec<FlowState>,
}

impl FlowTrajectory {
    pub fn y0(&self) -> f64 {
        self.start.im
    }

    pub fn last(&self) -> &FlowState {
        self.states
            .last()
            .expect("trajectory has at least one state")
    }

    pub fn w(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(FlowState::w)
    }

    pub fn sup_abs_w(&self) -> f64 {
        self.w().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// Substep grid (the flow times of all recorded states after the first).
    pub fn grid(&self) -> Vec<f64> {
        self.states[1..].iter().map(|s| s.s).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "x", "y", "w", "logderiv", "argderiv"])?;
        for st in &self.states {
            w.write_record(&[
                fmt_f64(st.s),
                fmt_f64(st.x),
                fmt_f64(st.y),
                fmt_f64(st.w()),
                fmt_f64(st.log_abs_deriv),
                fmt_f64(st.arg_deriv),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

fn check_driver<D: DrivingFunction + ?Sized>(d: &D, opts: &SolverOptions) -> Result<()> {
    opts.validate()?;
    let sigma = d.nominal_seminorm();
    if sigma >= CRITICAL_SEMINORM && !opts.allow_supercritical {
        return Err(Error::Supercritical { sigma });
    }
    Ok(())
}

/// Where the substep boundaries come from.
enum Schedule<'a> {
    Adaptive { tol: f64 },
    Fixed(&'a [f64]),
}

/// Core reverse integrator shared by all public entry points.
fn integrate_reverse<D, F>(
    d: &D,
    t: f64,
    z0: Complex64,
    opts: &SolverOptions,
    schedule: Schedule<'_>,
    mut record: F,
) -> Result<FlowState>
where
    D: DrivingFunction + ?Sized,
    F: FnMut(&FlowState),
{
    check_driver(d, opts)?;
    if !(z0.im > 0.0) || !z0.re.is_finite() {
        return Err(invalid(format!(
            "start point must lie in the upper half-plane, got {z0}"
        )));
    }
    let beta = reverse_driver(d, t).map_err(|e| e.context("reverse flow horizon"))?;
    let t = beta.horizon();

    let mut state = FlowState::start(z0);
    record(&state);
    let mut beta_prev = 0.0;
    let mut h = z0;
    let mut substeps = 0usize;
    let mut fixed_index = 0usize;

    while state.s < t {
        if substeps >= opts.max_substeps {
            return Err(Error::StepBudget {
                limit: opts.max_substeps,
                s: state.s,
            });
        }
        substeps += 1;
        let s_next = match schedule {
            Schedule::Adaptive { tol } => {
                let ds = tol * h.im * h.im / 4.0;
                if state.s + ds >= t || t - (state.s + ds) < 1e-3 * ds {
                    t
                } else {
                    state.s + ds
                }
            }
            Schedule::Fixed(grid) => {
                let next = grid.get(fixed_index).copied().unwrap_or(t);
                fixed_index += 1;
                if next <= state.s {
                    return Err(invalid("fixed substep grid must be strictly increasing"));
                }
                next.min(t)
            }
        };
        let ds = s_next - state.s;
        let beta_next = beta.value(s_next);
        let half = 0.5 * (beta_next - beta_prev);

        h.re += half;
        let e = elementary_map(h, ds);
        let (lr, li) = match opts.derivative {
            DerivativeMode::ExactPerSubstep => (e.log_factor.re, e.log_factor.im),
            DerivativeMode::IntegralQuadrature => quadrature_increment(h, e.h),
        };
        h = e.h;
        h.re += half;

        state = FlowState {
            s: s_next,
            x: h.re,
            y: h.im,
            log_abs_deriv: state.log_abs_deriv + lr,
            arg_deriv: state.arg_deriv + li,
        };
        beta_prev = beta_next;
        record(&state);
    }
    Ok(state)
}

/// Trapezoidal increments of `∫ (W²−1)/(W²+1) d log Y` and
/// `−2 ∫ W/(W²+1) d log Y` across one frozen-driver piece.
fn quadrature_increment(before: Complex64, after: Complex64) -> (f64, f64) {
    let dlog_y = (after.im / before.im).ln();
    let integrands = |h: Complex64| {
        let w = h.re / h.im;
        let d = w * w + 1.0;
        ((w * w - 1.0) / d, -2.0 * w / d)
    };
    let (a0, b0) = integrands(before);
    let (a1, b1) = integrands(after);
    (0.5 * (a0 + a1) * dlog_y, 0.5 * (b0 + b1) * dlog_y)
}

/// Integrate the reverse flow from `iy₀` up to flow time `t`, recording every
/// substep.
pub fn solve_reverse<D: DrivingFunction + ?Sized>(
    d: &D,
    t: f64,
    y0: f64,
    opts: &SolverOptions,
) -> Result<FlowTrajectory> {
    if !(y0 > 0.0) {
        return Err(invalid(format!("start height must be positive, got {y0}")));
    }
    solve_reverse_from(d, t, Complex64::new(0.0, y0), opts)
}

/// As [`solve_reverse`] but from an arbitrary start point in the upper
/// half-plane.
pub fn solve_reverse_from<D: DrivingFunction + ?Sized>(
    d: &D,
    t: f64,
    z0: Complex64,
    opts: &SolverOptions,
) -> Result<FlowTrajectory> {
    let mut states = Vec::new();
    integrate_reverse(d, t, z0, opts, Schedule::Adaptive { tol: opts.tol }, |s| {
        states.push(*s)
    })?;
    Ok(FlowTrajectory {
        start: z0,
        horizon: t.min(d.horizon()),
        states,
    })
}

/// Final reverse-flow state only (no trajectory kept).
pub fn reverse_endpoint<D: DrivingFunction + ?Sized>(
    d: &D,
    t: f64,
    z0: Complex64,
    opts: &SolverOptions,
) -> Result<FlowState> {
    integrate_reverse(d, t, z0, opts, Schedule::Adaptive { tol: opts.tol }, |_| {})
}

/// Final reverse-flow state using a prescribed substep grid (interior
/// boundaries, strictly increasing; the horizon is appended if missing).
/// Flows from nearby start points on the same grid are the same composition
/// of maps, which is what finite-difference derivative checks need.
pub fn reverse_endpoint_on_grid<D: DrivingFunction + ?Sized>(
    d: &D,
    t: f64,
    z0: Complex64,
    grid: &[f64],
    opts: &SolverOptions,
) -> Result<FlowState> {
    integrate_reverse(d, t, z0, opts, Schedule::Fixed(grid), |_| {})
}

/// `ĥ_t′(iy) = f_t′(λ_t + iy)` from the accumulated derivative.
pub fn spatial_derivative<D: DrivingFunction + ?Sized>(
    d: &D,
    t: f64,
    y: f64,
    opts: &SolverOptions,
) -> Result<Complex64> {
    if !(y > 0.0) {
        return Err(invalid(format!("height must be positive, got {y}")));
    }
    Ok(reverse_endpoint(d, t, Complex64::new(0.0, y), opts)?.derivative())
}
