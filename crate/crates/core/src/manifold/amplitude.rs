use serde::{Deserialize, Serialize};

use super::{ReducedModel, RingRadius};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeState {
    pub x1: f64,
    pub x2: f64,
    pub t: f64,
}

impl AmplitudeState {
    pub fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2, t: 0.0 }
    }

    pub fn radius(&self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn angle(&self) -> f64 {
        self.x2.atan2(self.x1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<AmplitudeState>,
    pub terminal: AmplitudeState,
    pub terminal_radius: f64,
}

/// `(beta x_1 + l x_1 |x|^2, beta x_2 + l x_2 |x|^2)`.
pub fn amplitude_rhs(s: &AmplitudeState, m: &ReducedModel) -> (f64, f64) {
    let factor = m.beta + m.l * (s.x1 * s.x1 + s.x2 * s.x2);
    (factor * s.x1, factor * s.x2)
}

/// Classical RK4 with a fixed step adjusted to land on `t_end`, sampling every
/// `sample_every` steps (and always the final state).
pub fn integrate_amplitudes(
    s0: AmplitudeState,
    m: &ReducedModel,
    dt: f64,
    t_end: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(domain("dt", format!("must be positive, got {dt}")));
    }
    if dt * m.beta.abs() >= 0.1 {
        return Err(domain(
            "dt",
            format!("dt |beta| = {} must stay below 0.1", dt * m.beta.abs()),
        ));
    }
    if !(t_end.is_finite() && t_end >= s0.t) {
        return Err(domain("t_end", "must not precede the initial time"));
    }
    let span = t_end - s0.t;
    let steps = (span / dt).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let ring = match super::ring_radius(m) {
        Ok(RingRadius::Ring(r)) => r,
        _ => 0.0,
    };
    let limit = 10.0 * ring.max(1.0).max(s0.radius());
    let every = sample_every.max(1);
    let mut s = s0;
    let mut samples = vec![s];
    let f = |s: &AmplitudeState| amplitude_rhs(s, m);
    let shift = |s: &AmplitudeState, k: (f64, f64), c: f64| AmplitudeState {
        x1: s.x1 + c * k.0,
        x2: s.x2 + c * k.1,
        t: s.t + c,
    };
    for i in 1..=steps {
        let k1 = f(&s);
        let k2 = f(&shift(&s, k1, 0.5 * h));
        let k3 = f(&shift(&s, k2, 0.5 * h));
        let k4 = f(&shift(&s, k3, h));
        s.x1 += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        s.x2 += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        s.t = s0.t + i as f64 * h;
        let r = s.radius();
        if !r.is_finite() || r > limit {
            return Err(Error::BlowUp {
                t: s.t,
                reason: format!("amplitude radius {r} exceeded {limit}"),
            });
        }
        if i % every == 0 || i == steps {
            samples.push(s);
        }
    }
    Ok(Trajectory {
        samples,
        terminal: s,
        terminal_radius: s.radius(),
    })
}
