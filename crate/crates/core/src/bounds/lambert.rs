//! Principal branch of the Lambert W function on the nonnegative reals.

use crate::error::{invalid, Result};

/// `w ≥ 0` with `w·eʷ = x`, by Halley iteration from `ln(1 + x)`.
pub fn lambert_w(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(invalid(format!("Lambert W needs x ≥ 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = x.ln_1p();
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs() {
            break;
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn exact_points() {
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        assert!((lambert_w(E).unwrap() - 1.0).abs() < 1e-15);
        assert!(lambert_w(-1e-3).is_err());
        assert!(lambert_w(f64::NAN).is_err());
    }

    #[test]
    fn omega_constant() {
        // Fixed-point oracle: w = e^{−w} converges to W(1).
        let mut w = 0.5f64;
        for _ in 0..200 {
            w = (-w).exp();
        }
        let got = lambert_w(1.0).unwrap();
        assert!((got - w).abs() < 1e-14);
        assert!((got - 0.5671432904).abs() < 1e-10);
    }

    #[test]
    fn residual_on_log_grid() {
        let mut prev = 0.0;
        for k in 0..=240 {
            let x = 10f64.powf(-12.0 + 0.1 * k as f64);
            let w = lambert_w(x).unwrap();
            assert!(w >= prev, "not monotone at x = {x}");
            prev = w;
            let r = (w * w.exp() - x).abs();
            assert!(r <= 1e-14 * x.max(1.0), "x = {x}: residual {r}");
        }
    }
}
