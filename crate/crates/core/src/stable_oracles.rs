//! Exit-time and overshoot oracles for the limit process `X*`.
//!
//! Closed forms cover the Brownian and drift limits and the symmetric stable
//! limit; everything else (higher moments, asymmetric laws, the CLT
//! covariance) comes from brute-force simulation of `X*` itself.
//!
//! ## Scale convention
//!
//! A symmetric stable limit with Lévy density `c/|x|^{1+α}` exits `(-1, 1)`
//! after mean time `sin(πα/2)/(cπ)`. The expression
//! `√π / (2^α Γ(1 + α/2))` is that mean at the reference scale
//! `c_ref(α) = 2^α Γ(1 + α/2) sin(πα/2) / π^{3/2}`, i.e. for characteristic
//! exponent `-|u|^α / Γ((1+α)/2)`; at `α = 1` this is the standard Cauchy
//! process (`c_ref = 1/π`). For other scales the mean follows from
//! self-similarity: `E τ*(c) = E τ*(c_ref) · c_ref / c`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::levy_models::{DriftSpec, LevyModel, LevyTriplet, LimitClassification, LimitKind};
use crate::parallel::Executor;
use crate::quadrature::integrate;
use crate::real::{Real, ScalarFn};
use crate::rng::{stream, Purpose};
use crate::simulation::{ExitSimulator, StableSampler, StepScheme};
use crate::special::gamma;

/// Limit law of `(τ*, X*_{τ*})` together with the quadrature tolerance used
/// for its functionals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitLaw<T> {
    pub classification: LimitClassification<T>,
    pub quadrature_tol: T,
}

impl<T: Real> LimitLaw<T> {
    pub fn new(classification: LimitClassification<T>) -> Self {
        Self {
            classification,
            quadrature_tol: T::quad_tol(),
        }
    }

    pub fn brownian(a: T) -> Self {
        Self::new(LimitClassification::brownian(a))
    }

    pub fn drift(gamma0: T) -> Self {
        Self::new(LimitClassification::drift(gamma0))
    }

    /// Strictly stable limit with density `c±/|x|^{1+α}`.
    pub fn stable(alpha: T, c_plus: T, c_minus: T) -> Result<Self> {
        Ok(Self::new(LimitClassification::stable(alpha, c_plus, c_minus)?))
    }

    /// Symmetric stable limit at the reference scale (unit mean exit time at `α = 1`).
    pub fn reference_stable(alpha: T) -> Result<Self> {
        let c = reference_scale(alpha);
        Self::stable(alpha, c, c)
    }

    pub fn with_tolerance(mut self, tol: T) -> Result<Self> {
        if !(tol > T::zero()) {
            return Err(param("quadrature tolerance must be positive"));
        }
        self.quadrature_tol = tol;
        Ok(self)
    }

    pub fn alpha(&self) -> T {
        self.classification.alpha
    }

    /// `c` of a symmetric stable limit with zero drift.
    fn symmetric_scale(&self) -> Option<(T, T)> {
        match self.classification.limit {
            LimitKind::Stable {
                alpha,
                c_plus,
                c_minus,
                gamma_star,
            } => {
                let c = (c_plus + c_minus) / T::lit(2.0);
                let sym = (c_plus - c_minus).abs() <= T::lit(1e-12) * c && gamma_star.abs() <= T::lit(1e-12);
                sym.then_some((alpha, c))
            }
            _ => None,
        }
    }

    /// Short label used in exported records.
    pub fn label(&self) -> String {
        match self.classification.limit {
            LimitKind::Brownian { a } => format!("brownian(a={a})"),
            LimitKind::Drift { gamma0 } => format!("drift(gamma0={gamma0})"),
            LimitKind::Stable {
                alpha,
                c_plus,
                c_minus,
                gamma_star,
            } => {
                // `+ 0` maps a signed zero to `0`
                let g = gamma_star + T::zero();
                format!("stable(alpha={alpha},c_plus={c_plus},c_minus={c_minus},gamma_star={g})")
            }
        }
    }
}

/// Reference scale `c_ref(α) = 2^α Γ(1+α/2) sin(πα/2) / π^{3/2}`.
pub fn reference_scale<T: Real>(alpha: T) -> T {
    let two = T::lit(2.0);
    two.powf(alpha) * gamma(T::one() + alpha / two) * (T::FRAC_PI_2() * alpha).sin() / T::PI().powf(T::lit(1.5))
}

/// Mean exit time from `(-1, 1)` of the symmetric `α`-stable process at the
/// reference scale: `√π / (2^α Γ(1 + α/2))`.
pub fn reference_exit_time<T: Real>(alpha: T) -> T {
    let two = T::lit(2.0);
    T::PI().sqrt() / (two.powf(alpha) * gamma(T::one() + alpha / two))
}

/// `E[τ*]` in closed form.
pub fn expected_exit_time<T: Real>(l: &LimitLaw<T>) -> Result<T> {
    match l.classification.limit {
        LimitKind::Brownian { a } => Ok(T::one() / a),
        LimitKind::Drift { gamma0 } => Ok(T::one() / gamma0.abs()),
        LimitKind::Stable { .. } => {
            let (alpha, c) = l.symmetric_scale().ok_or_else(|| {
                Error::UnsupportedLaw("no closed-form exit time for asymmetric or drifted stable limits".into())
            })?;
            if !(alpha < T::lit(2.0)) {
                return Err(Error::UnsupportedLaw("stable exit time needs alpha < 2".into()));
            }
            Ok(reference_exit_time(alpha) * (reference_scale(alpha) / c))
        }
    }
}

/// Density `μ(y) = sin(πα/2)/π · |y|^{-1} (y² - 1)^{-α/2}` of `X*_{τ*}` on `|y| ≥ 1`.
///
/// The law of the overshoot does not depend on the scale `c`.
pub fn overshoot_density<T: Real>(l: &LimitLaw<T>, y: T) -> Result<T> {
    let (alpha, _) = l
        .symmetric_scale()
        .ok_or_else(|| Error::UnsupportedLaw("overshoot density needs a symmetric stable limit".into()))?;
    let ay = y.abs();
    if ay < T::one() {
        return Ok(T::zero());
    }
    let base = (T::FRAC_PI_2() * alpha).sin() / T::PI();
    Ok(base / ay * (y * y - T::one()).powf(-alpha / T::lit(2.0)))
}

/// Bounded test functions of the exit value.
#[derive(Clone)]
pub enum OvershootFn<T: Real> {
    /// `f_β(x) = |x|^{-β} ∧ 1`.
    PowerCap(T),
    Constant(T),
    /// User function with a declared bound `sup |f|`.
    Custom { f: ScalarFn<T>, bound: T, label: String },
}

impl<T: Real> fmt::Debug for OvershootFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl<T: Real> OvershootFn<T> {
    pub fn power_cap(beta: T) -> Self {
        OvershootFn::PowerCap(beta)
    }

    pub fn one() -> Self {
        OvershootFn::Constant(T::one())
    }

    pub fn custom(f: ScalarFn<T>, bound: T, label: impl Into<String>) -> Result<Self> {
        if !(bound >= T::zero()) || !bound.is_finite() {
            return Err(param("custom functions need a finite bound"));
        }
        Ok(OvershootFn::Custom {
            f,
            bound,
            label: label.into(),
        })
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        match self {
            OvershootFn::PowerCap(beta) => {
                let ax = x.abs();
                if ax <= T::one() {
                    T::one()
                } else {
                    ax.powf(-*beta)
                }
            }
            OvershootFn::Constant(c) => *c,
            OvershootFn::Custom { f, .. } => f(x),
        }
    }

    pub fn label(&self) -> String {
        match self {
            OvershootFn::PowerCap(b) => format!("pow_cap({b})"),
            OvershootFn::Constant(c) => format!("const({c})"),
            OvershootFn::Custom { label, .. } => label.clone(),
        }
    }
}

/// `E[f_β(X*_{τ*})] = Γ(α/2 + β/2) / (Γ(α/2) Γ(1 + β/2))` for the symmetric stable limit.
pub fn power_cap_moment<T: Real>(alpha: T, beta: T) -> T {
    let two = T::lit(2.0);
    gamma(alpha / two + beta / two) / (gamma(alpha / two) * gamma(T::one() + beta / two))
}

/// `∫_{|y|≥1} f μ` by quadrature after `y = ±sec u`.
///
/// On `(0, π/2)` the integrand becomes `sin(πα/2)/π · tan^{1-α}(u) f(sec u)`;
/// the half above `π/4` is reflected so both endpoint singularities sit at 0.
pub fn overshoot_quadrature<T: Real>(l: &LimitLaw<T>, f: &OvershootFn<T>) -> Result<T> {
    let (alpha, _) = l
        .symmetric_scale()
        .ok_or_else(|| Error::UnsupportedLaw("overshoot quadrature needs a symmetric stable limit".into()))?;
    let one = T::one();
    let tol = l.quadrature_tol;
    let q = T::FRAC_PI_4();
    let both = |y: T| f.eval(y) + f.eval(-y);
    let lower = integrate(|u: T| u.tan().powf(one - alpha) * both(one / u.cos()), T::zero(), q, tol)?;
    let upper = integrate(|v: T| v.tan().powf(alpha - one) * both(one / v.sin()), T::zero(), q, tol)?;
    Ok((T::FRAC_PI_2() * alpha).sin() / T::PI() * (lower + upper))
}

/// `E[f(X*_{τ*})]`.
pub fn expected_overshoot_functional<T: Real>(l: &LimitLaw<T>, f: &OvershootFn<T>) -> Result<T> {
    let two = T::lit(2.0);
    match l.classification.limit {
        LimitKind::Brownian { .. } => Ok((f.eval(T::one()) + f.eval(-T::one())) / two),
        LimitKind::Drift { gamma0 } => Ok(f.eval(gamma0.signum())),
        LimitKind::Stable { .. } => {
            let (alpha, _) = l.symmetric_scale().ok_or_else(|| {
                Error::UnsupportedLaw("closed-form overshoot functionals need a symmetric stable limit".into())
            })?;
            match f {
                OvershootFn::PowerCap(beta) => Ok(power_cap_moment(alpha, *beta)),
                OvershootFn::Constant(c) => Ok(*c),
                OvershootFn::Custom { .. } => overshoot_quadrature(l, f),
            }
        }
    }
}

/// Estimate with standard error (zero for closed forms).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate<T> {
    pub value: T,
    pub se: T,
}

impl<T: Real> Estimate<T> {
    pub fn exact(value: T) -> Self {
        Self { value, se: T::zero() }
    }
}

/// `m(f) = E[f(X*_{τ*})] / E[τ*]` from the closed forms.
pub fn m_of_f<T: Real>(l: &LimitLaw<T>, f: &OvershootFn<T>) -> Result<T> {
    Ok(expected_overshoot_functional(l, f)? / expected_exit_time(l)?)
}

/// `m(f)` from closed forms when available, otherwise from the Monte Carlo
/// oracle with a delta-method standard error.
pub fn m_of_f_estimate<T: Real>(
    l: &LimitLaw<T>,
    f: &OvershootFn<T>,
    n_paths: usize,
    seed: u64,
    opts: &OracleOptions,
) -> Result<Estimate<T>> {
    match m_of_f(l, f) {
        Ok(v) => Ok(Estimate::exact(v)),
        Err(Error::UnsupportedLaw(_)) => {
            let sample = mc_exit_sample(l, n_paths, seed, opts)?;
            let n = T::lit(sample.len() as f64);
            let ys: Vec<T> = sample.iter().map(|p| f.eval(p.1)).collect();
            let ts: Vec<T> = sample.iter().map(|p| p.0).collect();
            let my = ys.iter().copied().sum::<T>() / n;
            let mt = ts.iter().copied().sum::<T>() / n;
            let r = my / mt;
            // linearization of the ratio: (y - r τ)/E τ
            let var = ys
                .iter()
                .zip(&ts)
                .map(|(y, t)| {
                    let d = (*y - r * *t) / mt;
                    d * d
                })
                .sum::<T>()
                / (n - T::one());
            Ok(Estimate {
                value: r,
                se: (var / n).sqrt(),
            })
        }
        Err(e) => Err(e),
    }
}

/// Simulation method of the limit-process oracle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleMethod {
    /// Exact stable increments on an adaptive grid: the step is chosen so the
    /// increment scale is `barrier_ratio × (distance to the barrier)`, capped
    /// at `base_step × E τ`.
    Cms { base_step: f64, barrier_ratio: f64 },
    /// Compound Poisson big jumps with a Gaussian small-jump substitute.
    JumpDiffusion { cut_ratio: f64 },
}

/// Oracle settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleOptions {
    pub method: OracleMethod,
    pub executor_workers: Option<usize>,
    /// Number of paths per independent random stream.
    pub batch: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            method: OracleMethod::Cms {
                base_step: 1e-3,
                barrier_ratio: 0.02,
            },
            executor_workers: None,
            batch: 1000,
        }
    }
}

impl OracleOptions {
    pub fn alternative() -> Self {
        Self {
            method: OracleMethod::JumpDiffusion { cut_ratio: 0.01 },
            ..Self::default()
        }
    }

    fn executor(&self) -> Executor {
        match self.executor_workers {
            Some(w) => Executor::new(w),
            None => Executor::from_env(),
        }
    }
}

/// Rough exit-time scale used to size steps when no closed form exists.
fn exit_time_scale<T: Real>(alpha: T, c_plus: T, c_minus: T) -> T {
    let c = (c_plus + c_minus) / T::lit(2.0);
    (T::FRAC_PI_2() * alpha).sin() / (c * T::PI())
}

/// Triplet of the limit process itself.
pub fn limit_triplet<T: Real>(l: &LimitLaw<T>) -> Result<LevyTriplet<T>> {
    match l.classification.limit {
        LimitKind::Brownian { a } => LevyModel::brownian(a, T::zero()).to_triplet(),
        LimitKind::Drift { gamma0 } => LevyModel::pure_drift(gamma0).to_triplet(),
        LimitKind::Stable {
            alpha,
            c_plus,
            c_minus,
            gamma_star,
        } => LevyModel::stable(alpha, c_plus, c_minus)
            .with_drift(DriftSpec::Truncated(gamma_star))
            .to_triplet(),
    }
}

enum PathSampler<T: Real> {
    Deterministic { tau: T, x: T },
    Cms {
        sampler: StableSampler<T>,
        drift: T,
        base: T,
        ratio: T,
        cap: T,
    },
    Engine(Box<ExitSimulator<T>>),
}

impl<T: Real> PathSampler<T> {
    fn new(l: &LimitLaw<T>, opts: &OracleOptions) -> Result<Self> {
        match l.classification.limit {
            LimitKind::Drift { gamma0 } => Ok(PathSampler::Deterministic {
                tau: T::one() / gamma0.abs(),
                x: gamma0.signum(),
            }),
            LimitKind::Brownian { .. } => {
                let t = limit_triplet(l)?;
                Ok(PathSampler::Engine(Box::new(ExitSimulator::from_rescaled(
                    &t,
                    T::one(),
                    StepScheme::default(),
                )?)))
            }
            LimitKind::Stable {
                alpha,
                c_plus,
                c_minus,
                gamma_star,
            } => match opts.method {
                OracleMethod::Cms {
                    base_step,
                    barrier_ratio,
                } => {
                    let scale = exit_time_scale(alpha, c_plus, c_minus);
                    Ok(PathSampler::Cms {
                        sampler: StableSampler::new(alpha, c_plus, c_minus)?,
                        drift: if alpha == T::one() { gamma_star } else { T::zero() },
                        base: T::lit(base_step) * scale,
                        ratio: T::lit(barrier_ratio),
                        cap: T::lit(1e3) * scale,
                    })
                }
                OracleMethod::JumpDiffusion { cut_ratio } => {
                    let t = limit_triplet(l)?;
                    let scheme = StepScheme::default().with_cut_ratio(cut_ratio);
                    Ok(PathSampler::Engine(Box::new(ExitSimulator::from_rescaled(&t, T::one(), scheme)?)))
                }
            },
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(T, T)> {
        match self {
            PathSampler::Deterministic { tau, x } => Ok((*tau, *x)),
            PathSampler::Engine(sim) => {
                let r = sim.simulate(rng)?;
                Ok((r.tau, r.exit_value))
            }
            PathSampler::Cms {
                sampler,
                drift,
                base,
                ratio,
                cap,
            } => {
                let one = T::one();
                let mut t = T::zero();
                let mut x = T::zero();
                loop {
                    let d = one - x.abs();
                    let dt = sampler.time_for_scale(*ratio * d).min(*base);
                    x = x + sampler.increment(dt, rng) + *drift * dt;
                    t = t + dt;
                    if x.abs() >= one {
                        return Ok((t, x));
                    }
                    if t > *cap {
                        return Err(Error::HorizonExceeded { cap: cap.as_f64() });
                    }
                }
            }
        }
    }
}

/// `n_paths` independent draws of `(τ*, X*_{τ*})`, in a fixed order that does
/// not depend on the number of workers.
pub fn mc_exit_sample<T: Real>(l: &LimitLaw<T>, n_paths: usize, seed: u64, opts: &OracleOptions) -> Result<Vec<(T, T)>> {
    let sampler = PathSampler::new(l, opts)?;
    let purpose = match opts.method {
        OracleMethod::Cms { .. } => Purpose::Oracle,
        OracleMethod::JumpDiffusion { .. } => Purpose::OracleAlt,
    };
    let batch = opts.batch.max(1);
    let n_batches = n_paths.div_ceil(batch);
    let parts = opts.executor().try_map(n_batches, |b| {
        let mut rng = stream(seed, purpose, b as u64);
        let len = batch.min(n_paths - b * batch);
        (0..len).map(|_| sampler.draw(&mut rng)).collect::<Result<Vec<_>>>()
    })?;
    Ok(parts.into_iter().flatten().collect())
}

/// Monte Carlo estimate of `E[(τ*)^k f(X*_{τ*})]`.
pub fn mc_exit_moments<T: Real>(
    l: &LimitLaw<T>,
    k: u32,
    f: &OvershootFn<T>,
    n_paths: usize,
    seed: u64,
    opts: &OracleOptions,
) -> Result<Estimate<T>> {
    if k < 1 {
        return Err(param("moment order k must be at least 1"));
    }
    if n_paths < 1000 {
        return Err(param("the Monte Carlo oracle needs at least 1000 paths"));
    }
    let sample = mc_exit_sample(l, n_paths, seed, opts)?;
    let vals: Vec<T> = sample.iter().map(|(t, x)| t.powi(k as i32) * f.eval(*x)).collect();
    Ok(mean_se(&vals))
}

pub(crate) fn mean_se<T: Real>(v: &[T]) -> Estimate<T> {
    let n = T::lit(v.len() as f64);
    let mean = v.iter().copied().sum::<T>() / n;
    if v.len() < 2 {
        return Estimate { value: mean, se: T::zero() };
    }
    let var = v.iter().map(|x| (*x - mean) * (*x - mean)).sum::<T>() / (n - T::one());
    Estimate {
        value: mean,
        se: (var / n).sqrt(),
    }
}

/// CLT covariance `C_{jk} = Cov[f_j(X*) - m(f_j)τ*, f_k(X*) - m(f_k)τ*]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceEstimate<T> {
    pub m: Vec<T>,
    pub c: Vec<Vec<T>>,
    pub se: Vec<Vec<T>>,
    pub exit_time: T,
    pub n_paths: usize,
}

/// Monte Carlo estimate of the CLT covariance matrix. `m(f_j)` and `E[τ*]`
/// use closed forms when available, otherwise the same sample.
pub fn covariance_c<T: Real>(
    l: &LimitLaw<T>,
    fs: &[OvershootFn<T>],
    n_paths: usize,
    seed: u64,
    opts: &OracleOptions,
) -> Result<CovarianceEstimate<T>> {
    if fs.is_empty() {
        return Err(param("covariance needs at least one function"));
    }
    let sample = mc_exit_sample(l, n_paths, seed, opts)?;
    let n = T::lit(sample.len() as f64);
    let etau = match expected_exit_time(l) {
        Ok(v) => v,
        Err(Error::UnsupportedLaw(_)) => sample.iter().map(|p| p.0).sum::<T>() / n,
        Err(e) => return Err(e),
    };
    let m: Vec<T> = fs
        .iter()
        .map(|f| match expected_overshoot_functional(l, f) {
            Ok(v) => Ok(v / etau),
            Err(Error::UnsupportedLaw(_)) => Ok(sample.iter().map(|p| f.eval(p.1)).sum::<T>() / n / etau),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let d = fs.len();
    let ys: Vec<Vec<T>> = sample
        .iter()
        .map(|(t, x)| (0..d).map(|j| fs[j].eval(*x) - m[j] * *t).collect())
        .collect();
    let means: Vec<T> = (0..d).map(|j| ys.iter().map(|y| y[j]).sum::<T>() / n).collect();
    let mut c = vec![vec![T::zero(); d]; d];
    let mut se = vec![vec![T::zero(); d]; d];
    for j in 0..d {
        for k in j..d {
            let prods: Vec<T> = ys.iter().map(|y| (y[j] - means[j]) * (y[k] - means[k])).collect();
            let e = mean_se(&prods);
            let unbiased = e.value * n / (n - T::one());
            c[j][k] = unbiased;
            c[k][j] = unbiased;
            se[j][k] = e.se;
            se[k][j] = e.se;
        }
    }
    Ok(CovarianceEstimate {
        m,
        c,
        se,
        exit_time: etau,
        n_paths: sample.len(),
    })
}

/// Exportable oracle result.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRecord {
    pub law: String,
    pub quantity: String,
    pub value: f64,
    pub se: f64,
    pub n_paths: usize,
    pub seed: Option<u64>,
}

impl OracleRecord {
    pub fn exact<T: Real>(l: &LimitLaw<T>, quantity: &str, value: T) -> Self {
        Self {
            law: l.label(),
            quantity: quantity.into(),
            value: value.as_f64(),
            se: 0.0,
            n_paths: 0,
            seed: None,
        }
    }

    pub fn monte_carlo<T: Real>(l: &LimitLaw<T>, quantity: &str, e: Estimate<T>, n_paths: usize, seed: u64) -> Self {
        Self {
            law: l.label(),
            quantity: quantity.into(),
            value: e.value.as_f64(),
            se: e.se.as_f64(),
            n_paths,
            seed: Some(seed),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}
