//! Closed-form solutions of the scalar comparison equations that control the
//! real part and the time change of the reverse flow.

use serde::{Deserialize, Serialize};

use super::lambert_w;
use crate::error::{invalid, Result};
use crate::ode::{integrate_dense, OdeOptions};

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(format!(
            "{name} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 4.0) {
        return Err(invalid(format!("σ must lie in (0, 4), got {sigma}")));
    }
    Ok(())
}

fn check_kappa(sigma: f64, kappa: f64) -> Result<()> {
    if !(kappa > 0.25 * sigma * sigma && kappa < 4.0) {
        return Err(invalid(format!(
            "κ must lie in (σ²/4, 4) = ({}, 4), got {kappa}",
            0.25 * sigma * sigma
        )));
    }
    Ok(())
}

/// Solution of `dZ = σ d√s − (σ²/8)/Z ds`, `Z₀ = z₀`:
/// `Z_s = σ√s/2 + z₀·exp(W(σ√s/(2z₀)))`.
pub fn comparison_z(z0: f64, sigma: f64, s: f64) -> Result<f64> {
    check_positive("z₀", z0)?;
    check_sigma(sigma)?;
    if !(s >= 0.0) {
        return Err(invalid(format!("s must be nonnegative, got {s}")));
    }
    let half = 0.5 * sigma * s.sqrt();
    Ok(half + z0 * lambert_w(half / z0)?.exp())
}

/// `H_{x₀}(x) = (σ√x/2 + x₀·exp(W(σ√x/(2x₀))))²`, defined for `x ≥ 0`.
pub fn h_func(x0: f64, sigma: f64, x: f64) -> Result<f64> {
    check_positive("x₀", x0)?;
    if !(x >= 0.0) {
        return Err(invalid(format!("x must be nonnegative, got {x}")));
    }
    Ok(comparison_z(x0, sigma, x)?.powi(2))
}

/// `H_{x₀}(x) = σ²x/4 · (1 + 1/W(σ√x/(2x₀)))²`, for `x > 0`.
pub fn h_func_product_form(x0: f64, sigma: f64, x: f64) -> Result<f64> {
    check_positive("x₀", x0)?;
    check_positive("x", x)?;
    check_sigma(sigma)?;
    let w = lambert_w(0.5 * sigma * x.sqrt() / x0)?;
    Ok(0.25 * sigma * sigma * x * (1.0 + 1.0 / w).powi(2))
}

/// The `M` with `σ²/4 · (1 + 1/W(σ√M/(2x₀)))² = κ`, in closed form:
/// `M = (2x₀/σ · w eʷ)²` with `w = σ/(2√κ − σ)`.
pub fn m_of_kappa(x0: f64, sigma: f64, kappa: f64) -> Result<f64> {
    check_positive("x₀", x0)?;
    check_sigma(sigma)?;
    check_kappa(sigma, kappa)?;
    let w = sigma / (2.0 * kappa.sqrt() - sigma);
    Ok((2.0 * x0 / sigma * w * w.exp()).powi(2))
}

/// `|σ²/4 · (1 + 1/W(σ√M/(2x₀)))² − κ| / κ`.
pub fn mk_residual(x0: f64, sigma: f64, kappa: f64, m: f64) -> Result<f64> {
    check_positive("x₀", x0)?;
    check_positive("M", m)?;
    let w = lambert_w(0.5 * sigma * m.sqrt() / x0)?;
    Ok((0.25 * sigma * sigma * (1.0 + 1.0 / w).powi(2) - kappa).abs() / kappa)
}

/// `max(M/y₀², 1/(4 − κ)) · (y₀² + s)`: upper bound for the solution of
/// `dV/ds = ¼ H_{x₀}(V)/(y₀² + s) + ¼`, `V₀ = 0`.
pub fn v_envelope(x0: f64, y0: f64, sigma: f64, kappa: f64, s: f64) -> Result<f64> {
    check_positive("y₀", y0)?;
    if !(s >= 0.0) {
        return Err(invalid(format!("s must be nonnegative, got {s}")));
    }
    let m = m_of_kappa(x0, sigma, kappa)?;
    let y2 = y0 * y0;
    Ok((m / y2).max(1.0 / (4.0 - kappa)) * (y2 + s))
}

/// Parameters of the comparison argument at a cone-exit point `x₀ + iy₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonModel {
    pub x0: f64,
    pub y0: f64,
    pub sigma: f64,
    pub kappa: f64,
    pub m: f64,
}

impl ComparisonModel {
    pub fn new(x0: f64, y0: f64, sigma: f64, kappa: f64) -> Result<Self> {
        check_positive("y₀", y0)?;
        let m = m_of_kappa(x0, sigma, kappa)?;
        Ok(ComparisonModel {
            x0,
            y0,
            sigma,
            kappa,
            m,
        })
    }

    /// Drift constant `σ²/8`.
    pub fn c(&self) -> f64 {
        self.sigma * self.sigma / 8.0
    }

    pub fn z(&self, s: f64) -> Result<f64> {
        comparison_z(self.x0, self.sigma, s)
    }

    pub fn h(&self, x: f64) -> Result<f64> {
        h_func(self.x0, self.sigma, x)
    }

    pub fn envelope(&self, s: f64) -> Result<f64> {
        v_envelope(self.x0, self.y0, self.sigma, self.kappa, s)
    }

    /// `V` at increasing times `s ≥ 0`, by adaptive integration.
    pub fn integrate_v(&self, times: &[f64]) -> Result<Vec<f64>> {
        let (x0, sigma, y2) = (self.x0, self.sigma, self.y0 * self.y0);
        let rhs = |s: f64, v: &[f64; 1]| {
            let half = 0.5 * sigma * v[0].max(0.0).sqrt();
            let w = lambert_w(half / x0).unwrap_or(f64::NAN);
            let h = (half + x0 * w.exp()).powi(2);
            [0.25 * h / (y2 + s) + 0.25]
        };
        let out = integrate_dense(rhs, 0.0, [0.0], times, &OdeOptions::default())?;
        Ok(out.into_iter().map(|v| v[0]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn z_examples() {
        assert_eq!(comparison_z(1.3, 2.0, 0.0).unwrap(), 1.3);
        for s in [0.01, 0.5, 1.0, 10.0] {
            let z = comparison_z(1.0, 2.0, s).unwrap();
            assert!(z >= s.sqrt() + 1.0);
        }
        assert!(comparison_z(0.0, 1.0, 1.0).is_err());
        assert!(comparison_z(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn z_solves_comparison_equation() {
        let (z0, sigma, s) = (1.0, 2.0, 1.0);
        let h = 1e-5;
        let dz = (comparison_z(z0, sigma, s + h).unwrap()
            - comparison_z(z0, sigma, s - h).unwrap())
            / (2.0 * h);
        let z = comparison_z(z0, sigma, s).unwrap();
        let rhs = sigma / (2.0 * s.sqrt()) - sigma * sigma / 8.0 / z;
        assert!((dz - rhs).abs() <= 1e-8, "{}", (dz - rhs).abs());
    }

    #[test]
    fn h_forms_agree() {
        let a = h_func(1.0, 2.0, 1.0).unwrap();
        let b = h_func_product_form(1.0, 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        assert_eq!(h_func(1.5, 2.0, 0.0).unwrap(), 2.25);
    }

    #[test]
    fn m_relation() {
        let (x0, sigma, kappa) = (1.0, 2.0, 2.0);
        let m = m_of_kappa(x0, sigma, kappa).unwrap();
        assert!(m > 0.0);
        assert!(mk_residual(x0, sigma, kappa, m).unwrap() <= 1e-10);
        assert!((h_func(x0, sigma, m).unwrap() - kappa * m).abs() <= 1e-10 * kappa * m);
        for k in 0..=200 {
            let x = m * 100f64.powf(k as f64 / 200.0);
            assert!(h_func(x0, sigma, x).unwrap() <= kappa * x * (1.0 + 1e-12));
        }
    }

    #[test]
    fn kappa_domain() {
        assert!(m_of_kappa(1.0, 2.0, 1.0).is_err());
        assert!(m_of_kappa(1.0, 2.0, 4.0).is_err());
        assert!(m_of_kappa(-1.0, 2.0, 2.0).is_err());
        assert!(ComparisonModel::new(1.0, 0.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn envelope_examples() {
        let m = m_of_kappa(1.0, 2.0, 2.0).unwrap();
        assert_abs_diff_eq!(
            v_envelope(1.0, 1.0, 2.0, 2.0, 0.0).unwrap(),
            m.max(0.5),
            epsilon = 1e-15
        );
        let near = v_envelope(1.0, 1.0, 1.0, 4.0 - 1e-9, 1.0).unwrap();
        assert!(near > 1e8);
    }

    #[test]
    fn integrated_v_below_envelope() {
        let model = ComparisonModel::new(1.0, 1.0, 2.0, 2.0).unwrap();
        assert_eq!(model.c(), 0.5);
        let times = [0.1, 1.0, 10.0];
        let v = model.integrate_v(&times).unwrap();
        for (s, v) in times.iter().zip(v) {
            assert!(v > 0.0);
            assert!(v <= model.envelope(*s).unwrap(), "s = {s}: {v}");
        }
    }
}
