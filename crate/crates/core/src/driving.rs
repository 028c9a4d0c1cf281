//! Lip-1/2 driving functions and their time reversals.
//!
//! Every driver is normalized so that `λ(0) = 0` and is defined on a closed
//! interval `[0, T]`. The seminorm
//!
//! ```text
//! ‖λ‖ = sup_{s ≠ t} |λ(t) − λ(s)| / |t − s|^{1/2}
//! ```
//!
//! is known in closed form for the square-root families and exactly on the
//! knots for piecewise-linear drivers (the supremum over a piecewise-linear
//! function is always attained at a pair of knots).

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Grid size up to which [`lip_seminorm`] inspects every pair of points.
pub const ALL_PAIRS_LIMIT: usize = 4096;

const DOMAIN_SLACK: f64 = 1e-12;

/// Anything that can drive a Loewner flow.
pub trait DrivingFunction: Sync {
    /// Right end `T` of the domain `[0, T]`.
    fn horizon(&self) -> f64;

    /// Claimed upper bound on the Lip-1/2 seminorm.
    fn nominal_seminorm(&self) -> f64;

    /// Value at `t`, with `t` clamped into the domain. Callers are expected to
    /// have validated `t`; use [`DrivingFunction::eval`] otherwise.
    fn value(&self, t: f64) -> f64;

    fn eval(&self, t: f64) -> Result<f64> {
        let horizon = self.horizon();
        if !t.is_finite() || t < -DOMAIN_SLACK * horizon || t > horizon * (1.0 + DOMAIN_SLACK) {
            return Err(Error::OutOfDomain { t, horizon });
        }
        Ok(self.value(t))
    }
}

impl<D: DrivingFunction + ?Sized> DrivingFunction for &D {
    fn horizon(&self) -> f64 {
        (**self).horizon()
    }
    fn nominal_seminorm(&self) -> f64 {
        (**self).nominal_seminorm()
    }
    fn value(&self, t: f64) -> f64 {
        (**self).value(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `λ(t) = σ√t`.
    SqrtForward,
    /// `λ(t) = σ(√(T − t) − √T)`, i.e. `σ√(T − t)` shifted to start at zero.
    SqrtBackward,
    /// Any constant, normalized to `λ ≡ 0`.
    Constant,
    PiecewiseLinear,
    Sampled,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::SqrtForward => "sqrt_forward",
            Family::SqrtBackward => "sqrt_backward",
            Family::Constant => "constant",
            Family::PiecewiseLinear => "piecewise_linear",
            Family::Sampled => "sampled",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "sqrt" | "sqrt_forward" => Ok(Family::SqrtForward),
            "sqrt_backward" | "spiral" => Ok(Family::SqrtBackward),
            "constant" | "zero" => Ok(Family::Constant),
            "piecewise_linear" | "linear" => Ok(Family::PiecewiseLinear),
            "sampled" | "csv" => Ok(Family::Sampled),
            other => Err(invalid(format!("unknown driver family `{other}`"))),
        }
    }
}

/// Piecewise-linear interpolant through strictly increasing knots.
#[derive(Debug, Clone, PartialEq)]
struct Knots {
    t: Vec<f64>,
    v: Vec<f64>,
}

impl Knots {
    fn new(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidSamples("empty sample set".into()));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidSamples("need at least two samples".into()));
        }
        if samples[0].0 != 0.0 {
            return Err(Error::InvalidSamples(format!(
                "first sample must be at t = 0, got {}",
                samples[0].0
            )));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidSamples(format!(
                    "times not strictly increasing at row {}",
                    i + 1
                )));
            }
        }
        if samples
            .iter()
            .any(|&(t, v)| !t.is_finite() || !v.is_finite())
        {
            return Err(Error::InvalidSamples("non-finite sample".into()));
        }
        let v0 = samples[0].1;
        Ok(Knots {
            t: samples.iter().map(|s| s.0).collect(),
            v: samples.iter().map(|s| s.1 - v0).collect(),
        })
    }

    fn horizon(&self) -> f64 {
        *self.t.last().unwrap()
    }

    fn value(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t <= 0.0 {
            return self.v[0];
        }
        if t >= self.t[n - 1] {
            return self.v[n - 1];
        }
        let j = self.t.partition_point(|&k| k <= t);
        let (t0, t1) = (self.t[j - 1], self.t[j]);
        let (v0, v1) = (self.v[j - 1], self.v[j]);
        v0 + (v1 - v0) * ((t - t0) / (t1 - t0))
    }

    /// Exact seminorm of the interpolant, attained on a knot pair.
    fn seminorm(&self) -> f64 {
        pair_sup(&self.t, &self.v)
    }

    fn scale(&mut self, factor: f64) {
        self.v.iter_mut().for_each(|v| *v *= factor);
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Sqrt,
    SqrtBack,
    Zero,
    Knots(Knots),
}

/// An immutable Lip-1/2 driving function on `[0, T]` with `λ(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Driver {
    family: Family,
    sigma: f64,
    horizon: f64,
    nominal: f64,
    shape: Shape,
}

impl Driver {
    pub fn sqrt_forward(sigma: f64, horizon: f64) -> Result<Self> {
        make_driver(Family::SqrtForward, sigma, horizon, None)
    }

    pub fn sqrt_backward(sigma: f64, horizon: f64) -> Result<Self> {
        make_driver(Family::SqrtBackward, sigma, horizon, None)
    }

    pub fn zero(horizon: f64) -> Result<Self> {
        make_driver(Family::Constant, 0.0, horizon, None)
    }

    /// Piecewise-linear driver through `(t, λ)` knots; the first knot must
    /// sit at `t = 0` and the horizon is the last knot time.
    pub fn piecewise_linear(samples: &[(f64, f64)]) -> Result<Self> {
        Self::from_knots(Family::PiecewiseLinear, samples)
    }

    pub fn sampled(samples: &[(f64, f64)]) -> Result<Self> {
        Self::from_knots(Family::Sampled, samples)
    }

    fn from_knots(family: Family, samples: &[(f64, f64)]) -> Result<Self> {
        let knots = Knots::new(samples)?;
        let nominal = knots.seminorm();
        Ok(Driver {
            family,
            sigma: nominal,
            horizon: knots.horizon(),
            nominal,
            shape: Shape::Knots(knots),
        })
    }

    /// Random piecewise-linear driver: a walk of `steps` increments `±√δt`
    /// with sign persistence, rescaled so that its exact seminorm is `sigma`.
    pub fn random_walk(sigma: f64, horizon: f64, steps: usize, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(invalid(format!(
                "seminorm must be nonnegative, got {sigma}"
            )));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        if steps < 1 {
            return Err(invalid("random walk needs at least one step"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let persistence: f64 = rng.gen_range(0.0..0.9);
        let dt = horizon / steps as f64;
        let amp = dt.sqrt();
        let mut sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let mut samples = Vec::with_capacity(steps + 1);
        samples.push((0.0, 0.0));
        let mut level = 0.0;
        for i in 1..=steps {
            if !rng.gen_bool(persistence) {
                sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            }
            level += sign * amp;
            let t = if i == steps { horizon } else { i as f64 * dt };
            samples.push((t, level));
        }
        let mut knots = Knots::new(&samples)?;
        let measured = knots.seminorm();
        knots.scale(sigma / measured);
        Ok(Driver {
            family: Family::PiecewiseLinear,
            sigma,
            horizon,
            nominal: knots.seminorm().max(sigma),
            shape: Shape::Knots(knots),
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// The σ parameter the driver was built with (for knot families this is
    /// the measured seminorm).
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn knots(&self) -> Option<(&[f64], &[f64])> {
        match &self.shape {
            Shape::Knots(k) => Some((&k.t, &k.v)),
            _ => None,
        }
    }
}

impl DrivingFunction for Driver {
    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn nominal_seminorm(&self) -> f64 {
        self.nominal
    }

    fn value(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.horizon);
        match &self.shape {
            Shape::Sqrt => self.sigma * t.sqrt(),
            Shape::SqrtBack => self.sigma * ((self.horizon - t).sqrt() - self.horizon.sqrt()),
            Shape::Zero => 0.0,
            Shape::Knots(k) => k.value(t),
        }
    }
}

/// Build a driver from a family tag.
///
/// For the knot families the samples define the function and its horizon;
/// `horizon` must agree with the last sample time and `sigma` only has to be
/// nonnegative (the nominal seminorm is measured exactly on the knots).
pub fn make_driver(
    family: Family,
    sigma: f64,
    horizon: f64,
    samples: Option<&[(f64, f64)]>,
) -> Result<Driver> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(invalid(format!(
            "seminorm must be nonnegative, got {sigma}"
        )));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    let (shape, nominal) = match family {
        Family::SqrtForward => (Shape::Sqrt, sigma),
        Family::SqrtBackward => (Shape::SqrtBack, sigma),
        Family::Constant => (Shape::Zero, 0.0),
        Family::PiecewiseLinear | Family::Sampled => {
            let samples =
                samples.ok_or_else(|| Error::InvalidSamples("empty sample set".into()))?;
            let d = Driver::from_knots(family, samples)?;
            if (d.horizon - horizon).abs() > 1e-12 * horizon {
                return Err(invalid(format!(
                    "horizon {horizon} does not match last sample time {}",
                    d.horizon
                )));
            }
            return Ok(d);
        }
    };
    let sigma = if family == Family::Constant {
        0.0
    } else {
        sigma
    };
    Ok(Driver {
        family,
        sigma,
        horizon,
        nominal,
        shape,
    })
}

/// The reversed driver `β(s) = λ(t) − λ(t − s)` on `[0, t]`.
#[derive(Debug, Clone, Copy)]
pub struct ReverseDriver<'a, D: ?Sized> {
    base: &'a D,
    horizon: f64,
    end_value: f64,
}

impl<'a, D: DrivingFunction + ?Sized> ReverseDriver<'a, D> {
    pub fn base(&self) -> &'a D {
        self.base
    }
}

impl<D: DrivingFunction + ?Sized> DrivingFunction for ReverseDriver<'_, D> {
    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn nominal_seminorm(&self) -> f64 {
        self.base.nominal_seminorm()
    }

    fn value(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.horizon);
        if s == 0.0 {
            return 0.0;
        }
        self.end_value - self.base.value(self.horizon - s)
    }
}

pub fn reverse_driver<D: DrivingFunction + ?Sized>(d: &D, t: f64) -> Result<ReverseDriver<'_, D>> {
    let horizon = d.horizon();
    if !(t > 0.0) || t > horizon * (1.0 + DOMAIN_SLACK) {
        return Err(Error::OutOfDomain { t, horizon });
    }
    let t = t.min(horizon);
    Ok(ReverseDriver {
        base: d,
        horizon: t,
        end_value: d.value(t),
    })
}

/// Grid estimate of the Lip-1/2 seminorm on `n` uniformly spaced points.
///
/// All pairs are inspected for `n ≤ ALL_PAIRS_LIMIT`; larger grids only use
/// dyadic gaps (plus the full span).
pub fn lip_seminorm<D: DrivingFunction + ?Sized>(d: &D, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!(
            "seminorm grid needs at least 2 points, got {n}"
        )));
    }
    let h = d.horizon() / (n - 1) as f64;
    let values: Vec<f64> = (0..n).map(|i| d.value(i as f64 * h)).collect();
    if n <= ALL_PAIRS_LIMIT {
        let t: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        return Ok(pair_sup(&t, &values));
    }
    let mut best: f64 = 0.0;
    let mut gap = 1;
    loop {
        let g = gap.min(n - 1);
        let scale = (g as f64 * h).sqrt();
        for i in 0..n - g {
            best = best.max((values[i + g] - values[i]).abs() / scale);
        }
        if g == n - 1 {
            break;
        }
        gap *= 2;
    }
    Ok(best)
}

fn pair_sup(t: &[f64], v: &[f64]) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            best = best.max((v[j] - v[i]).abs() / (t[j] - t[i]).sqrt());
        }
    }
    best
}

/// Read `(t, λ)` samples from CSV with header `t,lambda`.
pub fn read_samples<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "lambda" {
        return Err(Error::InvalidSamples(format!(
            "expected header `t,lambda`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let (t, v): (f64, f64) = row?;
        out.push((t, v));
    }
    Ok(out)
}

pub fn load_samples_csv(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let file = std::fs::File::open(path.as_ref())?;
    read_samples(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn family_examples() {
        let d = make_driver(Family::SqrtForward, 1.0, 1.0, None).unwrap();
        assert_abs_diff_eq!(d.eval(0.25).unwrap(), 0.5, epsilon = 1e-15);

        let d = make_driver(Family::Constant, 0.0, 1.0, None).unwrap();
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(d.eval(t).unwrap(), 0.0);
        }

        let d = make_driver(Family::SqrtBackward, 2.0, 1.0, None).unwrap();
        assert_abs_diff_eq!(d.eval(1.0).unwrap(), -2.0, epsilon = 1e-15);
        assert_eq!(d.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn construction_errors() {
        assert!(make_driver(Family::SqrtForward, -0.1, 1.0, None).is_err());
        assert!(make_driver(Family::SqrtForward, 1.0, 0.0, None).is_err());
        assert!(matches!(
            make_driver(Family::Sampled, 1.0, 1.0, Some(&[])),
            Err(Error::InvalidSamples(_))
        ));
        assert!(matches!(
            Driver::sampled(&[(0.0, 0.0), (0.5, 1.0), (0.4, 2.0)]),
            Err(Error::InvalidSamples(_))
        ));
        assert!(Driver::sampled(&[(0.1, 0.0), (0.5, 1.0)]).is_err());
    }

    #[test]
    fn knot_drivers_are_shifted_to_zero() {
        let d = Driver::sampled(&[(0.0, 3.0), (1.0, 4.0)]).unwrap();
        assert_eq!(d.eval(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(d.eval(0.5).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.nominal_seminorm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn evaluation_outside_domain_fails() {
        let d = Driver::sqrt_forward(1.0, 2.0).unwrap();
        assert!(matches!(d.eval(2.5), Err(Error::OutOfDomain { .. })));
        assert!(d.eval(-0.1).is_err());
        assert!(d.eval(f64::NAN).is_err());
    }

    #[test]
    fn seminorm_examples() {
        let zero = Driver::zero(1.0).unwrap();
        assert_eq!(lip_seminorm(&zero, 64).unwrap(), 0.0);

        let sqrt = Driver::sqrt_forward(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(lip_seminorm(&sqrt, 257).unwrap(), 1.0, epsilon = 1e-14);

        let line = Driver::piecewise_linear(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_abs_diff_eq!(lip_seminorm(&line, 129).unwrap(), 1.0, epsilon = 1e-14);

        assert!(lip_seminorm(&sqrt, 1).is_err());
    }

    #[test]
    fn seminorm_brute_force_matches_for_linear() {
        // Brute force over all grid pairs of λ(t) = t.
        let n = 33;
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let (a, b) = (i as f64 / 32.0, j as f64 / 32.0);
                    best = best.max((a - b).abs() / (a - b).abs().sqrt());
                }
            }
        }
        let line = Driver::piecewise_linear(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_abs_diff_eq!(lip_seminorm(&line, n).unwrap(), best, epsilon = 1e-15);
    }

    #[test]
    fn dyadic_mode_for_long_grids() {
        let sqrt = Driver::sqrt_forward(1.5, 1.0).unwrap();
        let s = lip_seminorm(&sqrt, ALL_PAIRS_LIMIT + 10).unwrap();
        assert!(s <= 1.5 * (1.0 + 1e-9));
        assert!(s > 1.4);
    }

    #[test]
    fn reverse_examples() {
        let d = Driver::sqrt_forward(1.3, 1.0).unwrap();
        let r = reverse_driver(&d, 1.0).unwrap();
        for s in [0.0f64, 0.1, 0.5, 0.9, 1.0] {
            let expected = 1.3 * (1.0 - (1.0 - s).sqrt());
            assert_abs_diff_eq!(r.eval(s).unwrap(), expected, epsilon = 1e-14);
        }
        assert_eq!(r.eval(0.0).unwrap(), 0.0);
        assert!(reverse_driver(&d, 0.0).is_err());
        assert!(reverse_driver(&d, 1.5).is_err());

        let zero = Driver::zero(1.0).unwrap();
        let r = reverse_driver(&zero, 0.7).unwrap();
        assert_eq!(r.eval(0.3).unwrap(), 0.0);
    }

    #[test]
    fn reverse_of_reverse_is_identity() {
        let d = Driver::sqrt_backward(2.0, 1.0).unwrap();
        let r = reverse_driver(&d, 0.8).unwrap();
        let rr = reverse_driver(&r, 0.8).unwrap();
        for s in [0.0, 0.2, 0.5, 0.8] {
            assert_abs_diff_eq!(rr.eval(s).unwrap(), d.eval(s).unwrap(), epsilon = 1e-14);
        }
    }

    #[test]
    fn random_walk_has_exact_target_seminorm() {
        let d = Driver::random_walk(2.5, 1.0, 200, 7).unwrap();
        assert_abs_diff_eq!(d.nominal_seminorm(), 2.5, epsilon = 1e-12);
        let measured = lip_seminorm(&d, 1025).unwrap();
        assert!(measured <= 2.5 * (1.0 + 1e-9));
        assert!(measured >= 0.95 * 2.5, "measured {measured}");
        let again = Driver::random_walk(2.5, 1.0, 200, 7).unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn csv_samples() {
        let text = "t,lambda\n0,1\n0.5,1.5\n1,0.5\n";
        let samples = read_samples(text.as_bytes()).unwrap();
        let d = Driver::sampled(&samples).unwrap();
        assert_abs_diff_eq!(d.eval(0.5).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.eval(1.0).unwrap(), -0.5, epsilon = 1e-15);

        assert!(read_samples("time,value\n0,0\n".as_bytes()).is_err());
    }

    #[test]
    fn family_names_round_trip() {
        for f in [
            Family::SqrtForward,
            Family::SqrtBackward,
            Family::Constant,
            Family::PiecewiseLinear,
            Family::Sampled,
        ] {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert_eq!("sqrt".parse::<Family>().unwrap(), Family::SqrtForward);
        assert!("brownian".parse::<Family>().is_err());
    }
}
