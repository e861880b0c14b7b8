//! Functionals of a hitting-time series: `V^ε(f)`, the time-change
//! estimator, the Blumenthal–Getoor index estimator and the CLT-normalized
//! errors.

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::levy_models::LimitClassification;
use crate::real::{CompensatedSum, Real};
use crate::simulation::ObservationSeries;
use crate::stable_oracles::{expected_exit_time, m_of_f, LimitLaw, OvershootFn};

/// Right-continuous step function, zero before its first jump.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepFunction<T> {
    times: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> StepFunction<T> {
    pub fn zero() -> Self {
        Self {
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn new(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(param("step function needs equally many times and values"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(param("step function jump times must increase strictly"));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn eval(&self, t: T) -> T {
        match self.times.partition_point(|s| *s <= t) {
            0 => T::zero(),
            i => self.values[i - 1],
        }
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|v| *v * a).collect(),
        }
    }

    /// `sup_{0≤t≤horizon} |F(t) - g(t)|` for a continuous monotone `g`.
    ///
    /// Between jumps `F` is constant and `g` monotone, so the supremum is
    /// attained at a jump (from either side) or at an end of the interval.
    pub fn sup_deviation(&self, g: impl Fn(T) -> T, horizon: T) -> T {
        let mut sup = g(T::zero()).abs();
        let mut prev = T::zero();
        for (&t, &v) in self.times.iter().zip(&self.values) {
            if t > horizon {
                break;
            }
            let gt = g(t);
            sup = sup.max((prev - gt).abs()).max((v - gt).abs());
            prev = v;
        }
        sup.max((prev - g(horizon)).abs())
    }
}

/// `V^ε(f)_t = Σ_{T_i ≤ t} f(increment_i)`.
pub fn v_epsilon<T: Real>(s: &ObservationSeries<T>, f: &OvershootFn<T>) -> StepFunction<T> {
    let mut acc = CompensatedSum::new();
    let values = s
        .increments
        .iter()
        .map(|d| {
            acc.add(f.eval(*d));
            acc.value()
        })
        .collect();
    StepFunction {
        times: s.times.clone(),
        values,
    }
}

/// Which `α` enters `ε^α` in the time-change estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    /// The classification's `α` (simulation studies).
    True,
    /// `α̂` from the same series; a heuristic with no consistency guarantee.
    PlugIn,
}

/// Time-change estimate `Ŝ_t = ε^α V^ε(1)_t E[τ*]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeChangeEstimate<T> {
    pub path: StepFunction<T>,
    pub alpha_used: T,
    pub heuristic: bool,
}

pub fn estimate_time_change<T: Real>(
    s: &ObservationSeries<T>,
    cls: &LimitClassification<T>,
    mode: AlphaMode,
) -> Result<TimeChangeEstimate<T>> {
    let etau = expected_exit_time(&LimitLaw::new(*cls))?;
    let alpha = match mode {
        AlphaMode::True => cls.alpha,
        AlphaMode::PlugIn if s.is_empty() => cls.alpha,
        AlphaMode::PlugIn => estimate_bg_index(s, None)?,
    };
    let count = v_epsilon(s, &OvershootFn::one());
    Ok(TimeChangeEstimate {
        path: count.scaled(s.eps.powf(alpha) * etau),
        alpha_used: alpha,
        heuristic: mode == AlphaMode::PlugIn,
    })
}

/// `α̂ = 2 V^ε(f₂)_t / V^ε(1)_t` with `f₂(x) = x^{-2} ∧ 1`, evaluated at
/// `t = horizon` (default: the whole series).
pub fn estimate_bg_index<T: Real>(s: &ObservationSeries<T>, horizon: Option<T>) -> Result<T> {
    let t = horizon.unwrap_or(T::infinity());
    let f = OvershootFn::power_cap(T::lit(2.0));
    let n = v_epsilon(s, &OvershootFn::one()).eval(t);
    if n == T::zero() {
        return Err(Error::EmptySeries);
    }
    Ok(T::lit(2.0) * v_epsilon(s, &f).eval(t) / n)
}

/// The standard test functions `f_β = |x|^{-β} ∧ 1`, `β ∈ {0, 1, 2, 3}`.
pub fn f_library<T: Real>() -> Vec<OvershootFn<T>> {
    [0.0, 1.0, 2.0, 3.0].iter().map(|b| OvershootFn::power_cap(T::lit(*b))).collect()
}

/// `R^ε_{t,j} = ε^{-α/2}(ε^α V^ε(f_j)_t - m(f_j) S_t)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizedError<T> {
    pub eps: T,
    pub alpha: T,
    pub m: Vec<T>,
    pub v: Vec<StepFunction<T>>,
}

impl<T: Real> NormalizedError<T> {
    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// `R^ε_t` given the true `S_t`.
    pub fn at(&self, t: T, s_t: T) -> Vec<T> {
        let ea = self.eps.powf(self.alpha);
        let norm = self.eps.powf(-self.alpha / T::lit(2.0));
        self.v
            .iter()
            .zip(&self.m)
            .map(|(v, m)| norm * (ea * v.eval(t) - *m * s_t))
            .collect()
    }

    /// `sup_{t ≤ horizon} |R^ε_{t,j}|` for a continuous nondecreasing `S`.
    pub fn sup_abs(&self, j: usize, s_true: impl Fn(T) -> T, horizon: T) -> T {
        let ea = self.eps.powf(self.alpha);
        let norm = self.eps.powf(-self.alpha / T::lit(2.0));
        let m = self.m[j];
        norm * self.v[j].scaled(ea).sup_deviation(|t| m * s_true(t), horizon)
    }
}

/// Normalized errors with `m(f_j)` from the closed-form oracles.
pub fn normalized_error<T: Real>(
    s: &ObservationSeries<T>,
    cls: &LimitClassification<T>,
    fs: &[OvershootFn<T>],
) -> Result<NormalizedError<T>> {
    let law = LimitLaw::new(*cls);
    let m = fs.iter().map(|f| m_of_f(&law, f)).collect::<Result<Vec<_>>>()?;
    normalized_error_with_m(s, cls.alpha, fs, m)
}

/// Normalized errors with caller-supplied `m(f_j)` (e.g. Monte Carlo values).
pub fn normalized_error_with_m<T: Real>(
    s: &ObservationSeries<T>,
    alpha: T,
    fs: &[OvershootFn<T>],
    m: Vec<T>,
) -> Result<NormalizedError<T>> {
    if fs.len() != m.len() {
        return Err(param("need one m(f) per function"));
    }
    Ok(NormalizedError {
        eps: s.eps,
        alpha,
        m,
        v: fs.iter().map(|f| v_epsilon(s, f)).collect(),
    })
}

/// JSON summary of an estimation run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatorSummary {
    pub alpha_hat: Option<f64>,
    pub n_crossings: usize,
    pub eps: f64,
    pub horizon: f64,
}

impl EstimatorSummary {
    pub fn of<T: Real>(s: &ObservationSeries<T>) -> Self {
        Self {
            alpha_hat: estimate_bg_index(s, None).ok().map(|a| a.as_f64()),
            n_crossings: s.len(),
            eps: s.eps.as_f64(),
            horizon: s.horizon.as_f64(),
        }
    }
}
