use serde::{Deserialize, Serialize};

use super::FlowTrajectory;
use crate::error::{Error, Result};

/// A reverse trajectory in the time `u = Y² − y₀²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReparamSample {
    pub u: f64,
    /// Original flow time `θ(u)`.
    pub theta: f64,
    pub x: f64,
    /// `√(y₀² + u)`.
    pub y: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReparamTrajectory {
    pub y0: f64,
    pub samples: Vec<ReparamSample>,
}

impl ReparamTrajectory {
    /// `θ(u)` by linear interpolation between recorded samples.
    pub fn theta_at(&self, u: f64) -> f64 {
        self.interp(u, |s| s.theta)
    }

    pub fn x_at(&self, u: f64) -> f64 {
        self.interp(u, |s| s.x)
    }

    fn interp(&self, u: f64, field: impl Fn(&ReparamSample) -> f64) -> f64 {
        let s = &self.samples;
        if u <= s[0].u {
            return field(&s[0]);
        }
        let n = s.len();
        if u >= s[n - 1].u {
            return field(&s[n - 1]);
        }
        let j = s.partition_point(|p| p.u <= u);
        let (a, b) = (&s[j - 1], &s[j]);
        let f = (u - a.u) / (b.u - a.u);
        field(a) + f * (field(b) - field(a))
    }

    /// Largest interior residual `|Δθ/Δu − ¼(W̃² + 1)|`, with `W̃²` averaged
    /// over each interval.
    pub fn max_theta_residual(&self) -> f64 {
        self.samples
            .windows(2)
            .skip(1)
            .map(|p| {
                let slope = (p[1].theta - p[0].theta) / (p[1].u - p[0].u);
                let w2 = 0.5 * (p[0].w * p[0].w + p[1].w * p[1].w);
                (slope - 0.25 * (w2 + 1.0)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Invert `s ↦ Y_s² − y₀²` over the recorded states.
pub fn reparametrize(traj: &FlowTrajectory) -> Result<ReparamTrajectory> {
    let y0 = traj.y0();
    for (i, p) in traj.states.windows(2).enumerate() {
        if !(p[1].y > p[0].y) {
            return Err(Error::NonMonotone { index: i + 1 });
        }
    }
    let samples = traj
        .states
        .iter()
        .enumerate()
        .map(|(i, st)| {
            // Y² − y₀² as (Y − y₀)(Y + y₀) keeps the small-u end accurate.
            let u = if i == 0 {
                0.0
            } else {
                (st.y - y0) * (st.y + y0)
            };
            let y = (y0 * y0 + u).sqrt();
            ReparamSample {
                u,
                theta: st.s,
                x: st.x,
                y,
                w: st.x / y,
            }
        })
        .collect();
    Ok(ReparamTrajectory { y0, samples })
}
