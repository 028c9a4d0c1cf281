//! Adaptive Dormand–Prince 5(4) integrator for small real systems.
//!
//! Complex equations are integrated as `[re, im]` pairs.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Initial step; zero picks one from the interval length.
    pub first_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 2_000_000,
            first_step: 0.0,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` (`t1 > t0`).
///
/// `guard` is called after every accepted step and may abort the
/// integration by returning an error (used for singularity detection).
/// Returns the state at `t1` and the last accepted step size.
pub fn integrate<const N: usize, F, G>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &OdeOptions,
    mut guard: G,
) -> Result<([f64; N], f64)>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    G: FnMut(f64, &[f64; N]) -> Result<()>,
{
    if !(t1 > t0) {
        return if t1 == t0 {
            Ok((y0, opts.first_step))
        } else {
            Err(Error::StepFailure {
                t: t0,
                reason: format!("backwards interval [{t0}, {t1}]"),
            })
        };
    }
    let span = t1 - t0;
    let mut h = if opts.first_step > 0.0 {
        opts.first_step.min(span)
    } else {
        (span * 1e-3).max(1e-14)
    };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut steps = 0usize;
    let mut last_h = h;

    while t < t1 {
        if steps >= opts.max_steps {
            return Err(Error::StepFailure {
                t,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        steps += 1;
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            t + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = f(t + h, &y_new);

        let mut err: f64 = 0.0;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.25;
            if h < 1e-300 {
                return Err(Error::StepFailure {
                    t,
                    reason: "non-finite derivative".into(),
                });
            }
            continue;
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            y = y_new;
            k1 = k7;
            last_h = h;
            guard(t, &y)?;
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= grow;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < f64::EPSILON * t.abs().max(1e-300) {
                return Err(Error::StepFailure {
                    t,
                    reason: "step size underflow".into(),
                });
            }
        }
    }
    Ok((y, last_h))
}

/// Integrate and report the state at each of the increasing `times`
/// (all `≥ t0`).
pub fn integrate_dense<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    times: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut out = Vec::with_capacity(times.len());
    let mut t = t0;
    let mut y = y0;
    let mut o = *opts;
    for &next in times {
        let (y_next, h) = integrate(&mut f, t, y, next, &o, |_, _| Ok(()))?;
        if h > 0.0 {
            o.first_step = h;
        }
        y = y_next;
        t = next;
        out.push(y);
    }
    Ok(out)
}
