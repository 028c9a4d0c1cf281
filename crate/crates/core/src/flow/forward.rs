use num_complex::Complex64;

use super::{check_driver, SolverOptions};
use crate::driving::DrivingFunction;
use crate::error::{invalid, Error, Result};
use crate::ode::{integrate, OdeOptions};

/// `g_t(z)` from `∂_t g = 2 / (g − λ_t)`, `g_0(z) = z`, by adaptive
/// Dormand–Prince integration.
///
/// Points that reach the driver (i.e. lie on the hull at or before `t`) are
/// reported as [`Error::Swallowed`]; a step-size collapse away from the
/// driver is reported as [`Error::StepFailure`].
pub fn solve_forward<D: DrivingFunction + ?Sized>(
    d: &D,
    z: Complex64,
    t: f64,
    opts: &SolverOptions,
) -> Result<Complex64> {
    check_driver(d, opts)?;
    if !(z.im > 0.0) || !z.re.is_finite() {
        return Err(invalid(format!(
            "start point must lie in the upper half-plane, got {z}"
        )));
    }
    let horizon = d.horizon();
    if !(t >= 0.0) || t > horizon * (1.0 + 1e-12) {
        return Err(Error::OutOfDomain { t, horizon });
    }
    let t = t.min(horizon);
    let threshold = opts.swallow_tol * (1.0 + z.norm());
    let ode = OdeOptions {
        rtol: opts.forward_rtol,
        atol: opts.forward_atol,
        ..OdeOptions::default()
    };
    let mut closest = (f64::INFINITY, 0.0);
    let rhs = |s: f64, g: &[f64; 2]| {
        let v = 2.0 / Complex64::new(g[0] - d.value(s), g[1]);
        [v.re, v.im]
    };
    let guard = |s: f64, g: &[f64; 2]| {
        let distance = Complex64::new(g[0] - d.value(s), g[1]).norm();
        if distance < closest.0 {
            closest = (distance, s);
        }
        if distance < threshold {
            Err(Error::Swallowed { t: s, distance })
        } else {
            Ok(())
        }
    };
    match integrate(rhs, 0.0, [z.re, z.im], t, &ode, guard) {
        Ok((g, _)) => {
            let g = Complex64::new(g[0], g[1]);
            // Near the driver |g − λ|² shrinks at rate ≈ 4, so a point whose
            // remaining time to swallowing is below tolerance is on the hull.
            let distance = (g - d.value(t)).norm();
            if 0.25 * distance * distance < opts.swallow_tol * t.max(1.0) {
                Err(Error::Swallowed { t, distance })
            } else {
                Ok(g)
            }
        }
        // A collapsing step next to the driver is the singularity, not a
        // solver breakdown.
        Err(Error::StepFailure { t: s, .. }) if closest.0 < 1e3 * threshold => {
            Err(Error::Swallowed {
                t: s,
                distance: closest.0,
            })
        }
        Err(e) => Err(e),
    }
}
