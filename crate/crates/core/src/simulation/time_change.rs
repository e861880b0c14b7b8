//! Continuous nondecreasing time changes `S` with generalized inverses.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::real::Real;

/// Law of the time change.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeChangeSpec {
    /// `S_t = σ t`.
    Linear { sigma: f64 },
    /// `S_t = ∫_0^t v_s ds` with `dv = κ(θ - v)dt + ξ√v dW`.
    IntegratedCir { kappa: f64, theta: f64, xi: f64, v0: f64 },
    /// Linear interpolation through `(t, S)` knots starting at `(0, 0)`.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl TimeChangeSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            TimeChangeSpec::Linear { sigma } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(param(format!("linear time change needs sigma > 0, got {sigma}")));
                }
            }
            TimeChangeSpec::IntegratedCir { kappa, theta, xi, v0 } => {
                if !(*kappa > 0.0 && *theta > 0.0 && *xi >= 0.0 && *v0 >= 0.0) {
                    return Err(param("CIR time change needs kappa, theta > 0 and xi, v0 >= 0"));
                }
            }
            TimeChangeSpec::PiecewiseLinear { knots } => {
                if knots.len() < 2 || knots[0] != (0.0, 0.0) {
                    return Err(param("piecewise time change needs at least two knots starting at (0, 0)"));
                }
                for w in knots.windows(2) {
                    if !(w[1].0 > w[0].0) || w[1].1 < w[0].1 {
                        return Err(param("knot times must increase and values must not decrease"));
                    }
                }
            }
        }
        Ok(())
    }

    /// True when the CIR parameters violate `2κθ ≥ ξ²` (allowed, but flagged).
    pub fn feller_violated(&self) -> bool {
        match self {
            TimeChangeSpec::IntegratedCir { kappa, theta, xi, .. } => 2.0 * kappa * theta < xi * xi,
            _ => false,
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, TimeChangeSpec::IntegratedCir { .. })
    }
}

/// One realized time change path.
#[derive(Clone, Debug)]
pub enum TimeChangePath<T> {
    Linear { sigma: T },
    /// Piecewise-linear interpolation of `S` on a grid.
    Grid { t: Vec<T>, s: Vec<T> },
}

impl<T: Real> TimeChangePath<T> {
    pub fn eval(&self, time: T) -> T {
        match self {
            TimeChangePath::Linear { sigma } => *sigma * time,
            TimeChangePath::Grid { t, s } => {
                if time <= t[0] {
                    return s[0];
                }
                let last = t.len() - 1;
                if time >= t[last] {
                    // continue with the last slope
                    let slope = (s[last] - s[last - 1]) / (t[last] - t[last - 1]);
                    return s[last] + slope * (time - t[last]);
                }
                let i = t.partition_point(|v| *v <= time) - 1;
                let w = (time - t[i]) / (t[i + 1] - t[i]);
                s[i] + w * (s[i + 1] - s[i])
            }
        }
    }

    /// Generalized inverse `inf{t : S_t ≥ u}`; flat stretches map to their left end.
    pub fn inverse(&self, u: T) -> T {
        match self {
            TimeChangePath::Linear { sigma } => u / *sigma,
            TimeChangePath::Grid { t, s } => {
                if u <= s[0] {
                    return t[0];
                }
                let last = s.len() - 1;
                if u > s[last] {
                    let slope = (s[last] - s[last - 1]) / (t[last] - t[last - 1]);
                    if slope > T::zero() {
                        return t[last] + (u - s[last]) / slope;
                    }
                    return T::infinity();
                }
                // first index with s ≥ u
                let j = s.partition_point(|v| *v < u);
                let i = j - 1;
                let ds = s[j] - s[i];
                if ds == T::zero() {
                    return t[i];
                }
                t[i] + (u - s[i]) / ds * (t[j] - t[i])
            }
        }
    }
}

/// Samples a time change path on `[0, horizon]` with grid step `dt`.
pub fn sample_time_change<T: Real, R: Rng + ?Sized>(
    spec: &TimeChangeSpec,
    horizon: T,
    dt: T,
    rng: &mut R,
) -> Result<TimeChangePath<T>> {
    spec.validate()?;
    if !(dt > T::zero()) || !(horizon > T::zero()) {
        return Err(param("time change grid needs dt > 0 and horizon > 0"));
    }
    match spec {
        TimeChangeSpec::Linear { sigma } => Ok(TimeChangePath::Linear { sigma: T::lit(*sigma) }),
        TimeChangeSpec::PiecewiseLinear { knots } => Ok(TimeChangePath::Grid {
            t: knots.iter().map(|k| T::lit(k.0)).collect(),
            s: knots.iter().map(|k| T::lit(k.1)).collect(),
        }),
        TimeChangeSpec::IntegratedCir { kappa, theta, xi, v0 } => {
            let n = (horizon / dt).ceil().to_usize().unwrap_or(1).max(1);
            let h = horizon / T::lit(n as f64);
            let sq = h.sqrt();
            let (k, th, x) = (T::lit(*kappa), T::lit(*theta), T::lit(*xi));
            let mut ts = Vec::with_capacity(n + 1);
            let mut ss = Vec::with_capacity(n + 1);
            let mut v = T::lit(*v0);
            let mut s = T::zero();
            ts.push(T::zero());
            ss.push(T::zero());
            for i in 1..=n {
                // full truncation Euler: drift and diffusion use v⁺
                let vp = v.max(T::zero());
                let z: f64 = StandardNormal.sample(rng);
                let v1 = v + k * (th - vp) * h + x * vp.sqrt() * sq * T::lit(z);
                s = s + (vp + v1.max(T::zero())) / T::lit(2.0) * h;
                v = v1;
                ts.push(h * T::lit(i as f64));
                ss.push(s);
            }
            Ok(TimeChangePath::Grid { t: ts, s: ss })
        }
    }
}
