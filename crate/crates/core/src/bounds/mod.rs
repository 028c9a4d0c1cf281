//! σ-dependent bounds for curves driven by Lip-1/2 functions of seminorm σ:
//! cone constants, Hölder exponents, winding coefficients and the
//! quasiconformal dilatation, together with the comparison functions used to
//! derive the cone constant for the full range `σ < 4`.

mod comparison;
mod lambert;

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use comparison::{
    comparison_z, h_func, h_func_product_form, m_of_kappa, mk_residual, v_envelope, ComparisonModel,
};
pub use lambert::lambert_w;

/// `8/π`: upper end of the range where the sharp cone constant exists.
pub const SHARP_CONE_LIMIT: f64 = 8.0 / PI;

/// `4√2/π`: the sharp cone constant is below one exactly when σ is below this.
pub const SHARP_WINDING_LIMIT: f64 = 4.0 * std::f64::consts::SQRT_2 / PI;

/// σ below which the curve is known to be a `3σ`-quasiarc.
pub const QUASIARC_LIMIT: f64 = 1.0 / 3.0;

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 4.0) {
        return Err(invalid(format!("σ must lie in (0, 4), got {sigma}")));
    }
    Ok(())
}

/// `16 − σ²`, factored to keep precision near σ = 4.
fn sixteen_minus_sq(sigma: f64) -> f64 {
    (4.0 - sigma) * (4.0 + sigma)
}

/// `ln(lhs/rhs)` for `eˣ = √(16−σ²)/√(16x² − σ²(x+1)²)` at `x = σ/(4−σ) + d`.
///
/// Written in the offset `d` because `16x² − σ²(x+1)²` has the factor
/// `(4−σ)x − σ = (4−σ)d`, which cancels catastrophically in terms of `x`.
fn p_log_gap(sigma: f64, d: f64) -> f64 {
    if d <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let x = sigma / (4.0 - sigma) + d;
    let plus = x * (4.0 + sigma) + sigma;
    x + 0.5 * (((4.0 - sigma) * d).ln() + plus.ln()) - 0.5 * sixteen_minus_sq(sigma).ln()
}

fn p_log_gap_derivative(sigma: f64, d: f64) -> f64 {
    let x = sigma / (4.0 - sigma) + d;
    let plus = x * (4.0 + sigma) + sigma;
    1.0 + 0.5 * (1.0 / d + (4.0 + sigma) / plus)
}

/// Relative residual `|lhs − rhs| / rhs` of the defining equation of `p(σ)`
/// at `x`. Limited by the rounding of `x` to roughly `ε·x/(x − σ/(4−σ))`;
/// see [`p_offset_residual`] for the offset form.
pub fn p_residual(sigma: f64, x: f64) -> f64 {
    p_offset_residual(sigma, x - sigma / (4.0 - sigma))
}

/// Residual of the defining equation at `x = σ/(4−σ) + d`.
pub fn p_offset_residual(sigma: f64, d: f64) -> f64 {
    p_log_gap(sigma, d).exp_m1().abs()
}

/// `p(σ) − σ/(4−σ) > 0`, computed without cancellation. Underflows to zero
/// as σ → 4, where the offset decays like `e^{−2p}`.
pub fn p_offset(sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    let x0 = sigma / (4.0 - sigma);
    let gap = |d| p_log_gap(sigma, d);

    let mut lo = x0 * 1e-9;
    while gap(lo) >= 0.0 {
        lo /= 1024.0;
        if lo == 0.0 {
            return Ok(0.0);
        }
    }
    let mut hi = x0.max(1.0);
    while gap(hi) <= 0.0 {
        hi *= 2.0;
    }
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    let polished = mid - gap(mid) / p_log_gap_derivative(sigma, mid);
    let d = if polished > 0.0 && gap(polished).abs() <= gap(mid).abs() {
        polished
    } else {
        mid
    };
    // Subnormal offsets carry too few bits to mean anything.
    Ok(if d < f64::MIN_POSITIVE { 0.0 } else { d })
}

/// The unique root `x > σ/(4 − σ)` of `eˣ = √(16−σ²) / √(16x² − σ²(x+1)²)`.
///
/// The left side increases and the right side decreases from `∞` at the
/// singular endpoint, so the root is bracketed just right of `σ/(4−σ)` and at
/// a doubled upper point, then found by bisection and one Newton polish.
pub fn p_of_sigma(sigma: f64) -> Result<f64> {
    let d = p_offset(sigma)?;
    Ok(sigma / (4.0 - sigma) + d)
}

/// `K_σ = σ / √(16 − σ²)`.
pub fn k_sigma(sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(sigma / sixteen_minus_sq(sigma).sqrt())
}

/// `L_σ = σ/√(16−σ²) · (1 + p) eᵖ`, the cone constant valid for all σ < 4.
/// Overflows to `+∞` when σ is within about `1e-3` of 4.
pub fn big_l(sigma: f64) -> Result<f64> {
    let p = p_of_sigma(sigma)?;
    let log_l = sigma.ln() - 0.5 * sixteen_minus_sq(sigma).ln() + p.ln_1p() + p;
    Ok(log_l.exp())
}

/// `πσ/√(64 − π²σ²)` for σ < 8/π.
pub fn sharp_cone(sigma: f64) -> Option<f64> {
    (0.0..SHARP_CONE_LIMIT).contains(&sigma).then(|| {
        let ps = PI * sigma;
        ps / ((8.0 - ps) * (8.0 + ps)).sqrt()
    })
}

/// `tan(π/2 · σ/√(16 + σ²))`: the ratio realized by `λ = σ√t`.
pub fn cone_lower(sigma: f64) -> f64 {
    (0.5 * PI * sigma / (16.0 + sigma * sigma).sqrt()).tan()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeBound {
    /// `m_σ`: the best available cone constant.
    pub m: f64,
    pub k: f64,
    pub l: f64,
    pub part_ii: Option<f64>,
    pub cone_lower: f64,
}

pub fn cone_bound(sigma: f64) -> Result<ConeBound> {
    let l = big_l(sigma)?;
    let part_ii = sharp_cone(sigma);
    let m = part_ii.map_or(l, |b| b.min(l));
    Ok(ConeBound {
        m,
        k: k_sigma(sigma)?,
        l,
        part_ii,
        cone_lower: cone_lower(sigma),
    })
}

/// `1/(1 + m²)`, through logarithms once `m²` would overflow.
fn inverse_one_plus_square(m: f64) -> f64 {
    if m < 1e150 {
        1.0 / (1.0 + m * m)
    } else {
        (-2.0 * m.ln()).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderExponents {
    /// `1/(1 + m_σ²)`.
    pub alpha_cap: f64,
    /// `1 − π²σ²/64`, for σ < 8/π.
    pub alpha_cor2: Option<f64>,
    /// `1 − σ²/16`. Exponent of the spiral `σ√(1−t)`; conjectured optimal,
    /// not a proven bound.
    pub alpha_spiral_ref: f64,
}

pub fn holder_exponents(sigma: f64) -> Result<HolderExponents> {
    let cone = cone_bound(sigma)?;
    Ok(HolderExponents {
        alpha_cap: inverse_one_plus_square(cone.m),
        alpha_cor2: (sigma < SHARP_CONE_LIMIT).then(|| 1.0 - PI * PI * sigma * sigma / 64.0),
        alpha_spiral_ref: 1.0 - sigma * sigma / 16.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingBound {
    pub value: f64,
    pub a: f64,
    pub b: f64,
    /// Whether the sharp coefficients apply (σ < 4√2/π).
    pub sharp: bool,
}

/// Winding coefficients `(a, b)` without the point evaluation.
pub fn winding_coefficients(sigma: f64) -> (f64, f64, bool) {
    if (0.0..SHARP_WINDING_LIMIT).contains(&sigma) {
        let ps = PI * sigma;
        let a = ps * ((8.0 - ps) * (8.0 + ps)).sqrt() / 64.0;
        (a, 2.0 * a, true)
    } else {
        (1.0, 2.0, false)
    }
}

/// `|arg f_t′(λ_t + iy)| ≤ a·log(y² + 4t) + b·log(1/y)`.
pub fn winding_bound(sigma: f64, t: f64, y: f64) -> Result<WindingBound> {
    if !(sigma >= 0.0) {
        return Err(invalid(format!("σ must be nonnegative, got {sigma}")));
    }
    if !(y > 0.0) || !(t > 0.0) {
        return Err(invalid(format!(
            "winding bound needs y > 0 and t > 0, got y = {y}, t = {t}"
        )));
    }
    let (a, b, sharp) = winding_coefficients(sigma);
    Ok(WindingBound {
        value: a * (y * y + 4.0 * t).ln() + b * (1.0 / y).ln(),
        a,
        b,
        sharp,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiarcProfile {
    pub k: f64,
    /// Lower bound `1/(1 + k²)` on the best exponent over reparametrizations.
    pub alpha_reparam: f64,
}

/// Dilatation `k = 3σ` for σ < 1/3; `None` outside that range.
pub fn quasiarc_profile(sigma: f64) -> Result<Option<QuasiarcProfile>> {
    if !(sigma >= 0.0) {
        return Err(invalid(format!("σ must be nonnegative, got {sigma}")));
    }
    Ok((sigma < QUASIARC_LIMIT).then(|| {
        let k = 3.0 * sigma;
        QuasiarcProfile {
            k,
            alpha_reparam: 1.0 / (1.0 + k * k),
        }
    }))
}

/// Every closed-form quantity at one σ ∈ (0, 4).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundProfile {
    pub sigma: f64,
    pub p: f64,
    pub l: f64,
    pub k: f64,
    pub m: f64,
    pub xi: f64,
    pub part_ii: Option<f64>,
    pub cone_lower: f64,
    pub alpha_cap: f64,
    pub alpha_cor2: Option<f64>,
    pub alpha_spiral_ref: f64,
    pub wind_a: f64,
    pub wind_b: f64,
    pub wind_sharp: bool,
    pub k_quasiarc: Option<f64>,
    pub alpha_reparam: Option<f64>,
    /// `1 + π²σ²/64`, reported for σ < 8/π as the dimension bound implied by
    /// the exponent.
    pub dimension_upper: Option<f64>,
}

impl BoundProfile {
    pub fn new(sigma: f64) -> Result<Self> {
        let p = p_of_sigma(sigma)?;
        let cone = cone_bound(sigma)?;
        let exps = holder_exponents(sigma)?;
        let (wind_a, wind_b, wind_sharp) = winding_coefficients(sigma);
        let qa = quasiarc_profile(sigma)?;
        let m2 = cone.m * cone.m;
        Ok(BoundProfile {
            sigma,
            p,
            l: cone.l,
            k: cone.k,
            m: cone.m,
            xi: 1.0 - 2.0 / (m2 + 1.0),
            part_ii: cone.part_ii,
            cone_lower: cone.cone_lower,
            alpha_cap: exps.alpha_cap,
            alpha_cor2: exps.alpha_cor2,
            alpha_spiral_ref: exps.alpha_spiral_ref,
            wind_a,
            wind_b,
            wind_sharp,
            k_quasiarc: qa.map(|q| q.k),
            alpha_reparam: qa.map(|q| q.alpha_reparam),
            dimension_upper: exps.alpha_cor2.map(|a| 2.0 - a),
        })
    }
}

/// Write profiles as CSV with header
/// `sigma,p,L,K,m,alpha_cap,alpha_cor2,cone_lower,a_wind,b_wind,k`.
/// Absent values are left empty.
pub fn write_profiles_csv<W: Write>(profiles: &[BoundProfile], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "sigma",
        "p",
        "L",
        "K",
        "m",
        "alpha_cap",
        "alpha_cor2",
        "cone_lower",
        "a_wind",
        "b_wind",
        "k",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for p in profiles {
        w.write_record(&[
            format!("{}", p.sigma),
            format!("{}", p.p),
            format!("{}", p.l),
            format!("{}", p.k),
            format!("{}", p.m),
            format!("{}", p.alpha_cap),
            opt(p.alpha_cor2),
            format!("{}", p.cone_lower),
            format!("{}", p.wind_a),
            format!("{}", p.wind_b),
            opt(p.k_quasiarc),
        ])?;
    }
    w.flush()?;
    Ok(())
}
