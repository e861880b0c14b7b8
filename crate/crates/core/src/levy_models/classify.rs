//! Limit-regime classification and the small-`x` behaviour of `g`.

use serde::Serialize;

use super::{drift_gamma0, stable_limit_gamma, truncation, LevyMeasure, LevyTriplet, ZERO_DRIFT_TOL};
use crate::error::{Error, Result};
use crate::real::Real;

/// Limit process of `X^ε` as `ε → 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitKind<T> {
    /// Brownian motion with variance `a` per unit time.
    Brownian { a: T },
    /// Deterministic drift `t ↦ γ₀ t`.
    Drift { gamma0: T },
    /// Stable process with density `c±/|x|^{1+α}` and drift `γ*` (relative to `h`).
    Stable {
        alpha: T,
        c_plus: T,
        c_minus: T,
        gamma_star: T,
    },
}

/// Which of the five limit regimes a triplet belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitClassification<T> {
    /// 1 Brownian, 2 drift, 3 stable `α ∈ (1,2)`, 4 Cauchy, 5 stable `α ∈ (0,1)`.
    pub condition: u8,
    pub alpha: T,
    pub limit: LimitKind<T>,
}

impl<T: Real> LimitClassification<T> {
    pub fn brownian(a: T) -> Self {
        Self {
            condition: 1,
            alpha: T::lit(2.0),
            limit: LimitKind::Brownian { a },
        }
    }

    pub fn drift(gamma0: T) -> Self {
        Self {
            condition: 2,
            alpha: T::one(),
            limit: LimitKind::Drift { gamma0 },
        }
    }

    /// Strictly stable limit; the condition index follows from `α`.
    pub fn stable(alpha: T, c_plus: T, c_minus: T) -> Result<Self> {
        let gamma_star = stable_limit_gamma(alpha, c_plus, c_minus)?;
        Ok(Self::stable_with_drift(alpha, c_plus, c_minus, gamma_star))
    }

    pub fn stable_with_drift(alpha: T, c_plus: T, c_minus: T, gamma_star: T) -> Self {
        let one = T::one();
        let condition = if alpha > one {
            3
        } else if alpha == one {
            4
        } else {
            5
        };
        Self {
            condition,
            alpha,
            limit: LimitKind::Stable {
                alpha,
                c_plus,
                c_minus,
                gamma_star,
            },
        }
    }
}

/// Estimated one-sided limits of `g` at `0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GLimits<T> {
    pub c_plus: T,
    pub c_minus: T,
}

const LIMIT_K_START: i32 = 10;
const LIMIT_K_END: i32 = 40;

/// `g_α(x) = ν(x)|x|^{1+α}`; exact power form when `α` is the model's own index.
fn g_alpha<T: Real>(m: &LevyMeasure<T>, alpha: T, x: T) -> T {
    match m.power_index() {
        Some(idx) if idx == alpha => m.g(x).unwrap_or(T::zero()),
        _ => m.density(x) * x.abs().powf(T::one() + alpha),
    }
}

/// Aitken-accelerated limit of a sequence sampled at `2^{-k}`; `None` when
/// the accelerated values do not settle.
fn extrapolate<T: Real>(seq: &[T]) -> Option<T> {
    let n = seq.len();
    let scale = seq.iter().fold(T::zero(), |m, v| m.max(v.abs())).max(T::min_positive_value());
    let noise = T::lit(1e-13) * scale;
    let mut acc = Vec::with_capacity(n.saturating_sub(2));
    for w in seq.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        let den = a - b - b + c;
        if den.abs() <= noise || (c - b).abs() <= noise {
            acc.push(c);
        } else {
            acc.push(c - (c - b) * (c - b) / den);
        }
    }
    let last = *acc.last()?;
    if !last.is_finite() {
        return None;
    }
    let tail = &acc[acc.len().saturating_sub(8)..];
    let spread = tail.iter().fold(T::zero(), |m, v| m.max((*v - last).abs()));
    if spread <= T::lit(1e-6) * scale.max(T::one()) {
        Some(last)
    } else {
        None
    }
}

/// Estimates `c± = lim g(x)` at `0±` from `x = ±2^{-k}`, `k = 10..40`.
pub fn g_limits<T: Real>(m: &LevyMeasure<T>, alpha: T) -> Result<GLimits<T>> {
    let two = T::lit(2.0);
    let side = |s: T| -> Result<T> {
        let seq: Vec<T> = (LIMIT_K_START..=LIMIT_K_END)
            .map(|k| g_alpha(m, alpha, s * two.powi(-k)))
            .collect();
        if seq.iter().any(|v| !v.is_finite()) {
            return Err(Error::Unclassifiable(format!(
                "g is not finite near 0 for alpha = {alpha}"
            )));
        }
        extrapolate(&seq).ok_or_else(|| {
            Error::Unclassifiable(format!("g has no numerically stable limit at 0 (alpha = {alpha})"))
        })
    };
    let c_plus = side(T::one())?.max(T::zero());
    let c_minus = side(-T::one())?.max(T::zero());
    Ok(GLimits { c_plus, c_minus })
}

fn is_zero_drift<T: Real>(g0: T) -> bool {
    g0.abs() <= T::lit(ZERO_DRIFT_TOL)
}

/// Assigns the triplet to one of the five limit regimes.
pub fn classify<T: Real>(t: &LevyTriplet<T>) -> Result<LimitClassification<T>> {
    let one = T::one();
    let two = T::lit(2.0);
    if t.a > T::zero() {
        return Ok(LimitClassification::brownian(t.a));
    }
    let tol = T::quad_tol();
    let fv = t.jumps.small_jump_integral_finite(|x: T| x.abs(), tol)?;
    let mut gamma0 = None;
    if fv {
        let g0 = drift_gamma0(t)?;
        if !is_zero_drift(g0) {
            return Ok(LimitClassification::drift(g0));
        }
        gamma0 = Some(g0);
    }
    let alpha = match t.jumps.power_index() {
        Some(a) if a > T::zero() && a < two => a,
        _ => {
            return Err(Error::Unclassifiable(if fv {
                "finite variation with zero drift and no stable-like small jumps (A = 0, γ₀ = 0)".into()
            } else {
                "infinite variation without a power-law density".into()
            }))
        }
    };
    let lim = g_limits(&t.jumps, alpha)?;
    if !(lim.c_plus + lim.c_minus > T::zero()) {
        return Err(Error::Unclassifiable("g vanishes at 0: c_plus + c_minus = 0".into()));
    }
    if alpha > one {
        return LimitClassification::stable(alpha, lim.c_plus, lim.c_minus);
    }
    if alpha == one {
        let c = (lim.c_plus + lim.c_minus) / two;
        if (lim.c_plus - lim.c_minus).abs() > T::lit(1e-6) * c {
            return Err(Error::Unclassifiable(format!(
                "alpha = 1 needs c_plus = c_minus, got {} and {}",
                lim.c_plus, lim.c_minus
            )));
        }
        // ∫_0^1 |g(x) - g(-x)|/x dx must converge
        let asym = |x: T| {
            let gp = g_alpha(&t.jumps, alpha, x.abs());
            let gm = g_alpha(&t.jumps, alpha, -x.abs());
            (gp - gm).abs() / x.abs()
        };
        let finite = asym_integral_finite(&asym, tol)?;
        if !finite {
            return Err(Error::Unclassifiable(
                "alpha = 1 needs ∫_0^1 |g(x)-g(-x)|/x dx < ∞".into(),
            ));
        }
        let corr = direct_cauchy_correction(t, alpha, tol)?;
        return Ok(LimitClassification::stable_with_drift(alpha, c, c, t.gamma - corr));
    }
    // α < 1 needs finite variation and zero drift
    match gamma0 {
        Some(_) => LimitClassification::stable(alpha, lim.c_plus, lim.c_minus),
        None => Err(Error::Unclassifiable(
            "alpha < 1 but the small-jump first moment diverges".into(),
        )),
    }
}

/// `∫_0^∞ (g(x)-g(-x)) x^{-2} h(x) dx` computed on the `g` representation.
fn direct_cauchy_correction<T: Real>(t: &LevyTriplet<T>, alpha: T, tol: T) -> Result<T> {
    use crate::quadrature::{integrate, integrate_to_infinity};
    let f = |x: T| (g_alpha(&t.jumps, alpha, x) - g_alpha(&t.jumps, alpha, -x)) / (x * x) * truncation(x);
    Ok(integrate(&f, T::zero(), T::one(), tol)? + integrate_to_infinity(&f, T::one(), tol)?)
}

/// `γ - ∫(h dν − x dν*)` for a condition-3 triplet with limit density
/// `c±/|x|^{1+α}`; zero when the drift constraint of the rate theorem holds.
pub fn drift_constraint_gap<T: Real>(t: &LevyTriplet<T>, alpha: T, c_plus: T, c_minus: T) -> Result<T> {
    use crate::quadrature::{integrate, integrate_to_infinity};
    if !(alpha > T::one() && alpha < T::lit(2.0)) {
        return Err(Error::Parameter("the drift constraint is defined for 1 < alpha < 2".into()));
    }
    if t.jumps.power_index().is_none() {
        return Err(Error::Parameter("drift constraint needs a power-law jump density".into()));
    }
    let tol = T::quad_tol();
    let g = |x: T| g_alpha(&t.jumps, alpha, x);
    let a1 = alpha - T::one();
    // g - c cancels catastrophically near 0: integrate from y0 and add the
    // remainder of the fitted power law (g - c) ≈ k y^θ.
    let y0 = T::lit(1e-6);
    let near = |s: T, c: T| -> Result<T> {
        let body = integrate(|y: T| (g(s * y) - c) * y.powf(-alpha), y0, T::one(), tol)?;
        let d1 = g(s * y0) - c;
        let d2 = g(s * y0 / T::lit(2.0)) - c;
        if d1 == T::zero() {
            return Ok(body);
        }
        let theta = (d1 / d2).abs().log2();
        let p = theta + T::one() - alpha;
        if !(p > T::zero()) || !p.is_finite() {
            return Err(Error::Parameter("g is not Hölder enough at 0 for the drift constraint".into()));
        }
        Ok(body + d1 * y0.powf(T::one() - alpha) / p)
    };
    let far = |s: T| integrate_to_infinity(|y: T| g(s * y) * y.powf(-T::one() - alpha), T::one(), tol);
    let plus = near(T::one(), c_plus)? + far(T::one())? - c_plus / a1;
    let minus = -near(-T::one(), c_minus)? - far(-T::one())? + c_minus / a1;
    Ok(t.gamma - (plus + minus))
}

/// Dyadic-shell test for convergence of `∫_0^1 φ(x) dx`.
fn asym_integral_finite<T: Real, F: Fn(T) -> T>(phi: &F, tol: T) -> Result<bool> {
    use crate::quadrature::integrate;
    let half = T::lit(0.5);
    let mut hi = T::one();
    let mut shells = Vec::new();
    for _ in 0..61 {
        let lo = hi * half;
        shells.push(integrate(phi, lo, hi, tol)?);
        hi = lo;
    }
    let total: T = shells.iter().copied().sum();
    if total > T::lit(1e8) || !total.is_finite() {
        return Ok(false);
    }
    let n = shells.len();
    let mut ratios = Vec::new();
    for k in (n - 5)..n {
        if shells[k - 1] > T::lit(1e-300) {
            ratios.push(shells[k] / shells[k - 1]);
        }
    }
    if ratios.is_empty() {
        return Ok(true);
    }
    let mean = ratios.iter().copied().sum::<T>() / T::lit(ratios.len() as f64);
    Ok(mean < T::lit(0.999))
}

/// Outcome of the Hölder-continuity check on `g` at `0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HPrimeVerdict<T> {
    pub holds: bool,
    pub c_plus: T,
    pub c_minus: T,
    /// Largest observed `|g(x) - c±|/|x|^θ` per side.
    pub bound_plus: T,
    pub bound_minus: T,
    pub reason: String,
}

/// Checks that `g` is Hölder continuous at `0±` with exponent `θ > α/2` and
/// that `c₊c₋ > 0`, by sampling `|g(x) - c±|/|x|^θ` on `x = ±2^{-k}`.
///
/// The ratio counts as bounded when its maximum over the finest ten grid
/// points (`k = 31..40`) is at most twice its maximum over `k = 1..30`.
pub fn check_h_prime<T: Real>(t: &LevyTriplet<T>, alpha: T, theta: T) -> HPrimeVerdict<T> {
    let zero = T::zero();
    let mut v = HPrimeVerdict {
        holds: false,
        c_plus: zero,
        c_minus: zero,
        bound_plus: zero,
        bound_minus: zero,
        reason: String::new(),
    };
    if t.jumps.power_index().is_none() {
        v.reason = "jump part has no power-law density".into();
        return v;
    }
    let lim = match g_limits(&t.jumps, alpha) {
        Ok(l) => l,
        Err(e) => {
            v.reason = e.to_string();
            return v;
        }
    };
    v.c_plus = lim.c_plus;
    v.c_minus = lim.c_minus;
    let two = T::lit(2.0);
    let side = |s: T, c: T| -> (T, bool) {
        let mut early = zero;
        let mut late = zero;
        for k in 1..=40 {
            let x = two.powi(-k);
            let r = (g_alpha(&t.jumps, alpha, s * x) - c).abs() / x.powf(theta);
            if k <= 30 {
                early = early.max(r);
            } else {
                late = late.max(r);
            }
        }
        let bounded = late.is_finite() && late <= two * early + T::lit(1e-9);
        (early.max(late), bounded)
    };
    let (bp, okp) = side(T::one(), lim.c_plus);
    let (bm, okm) = side(-T::one(), lim.c_minus);
    v.bound_plus = bp;
    v.bound_minus = bm;
    let mut reasons = Vec::new();
    if !(theta > alpha / two) {
        reasons.push(format!("theta = {theta} is not above alpha/2 = {}", alpha / two));
    }
    if !(lim.c_plus * lim.c_minus > zero) {
        reasons.push("c_plus * c_minus = 0".to_string());
    }
    if !okp {
        reasons.push("ratio unbounded as x -> 0+".to_string());
    }
    if !okm {
        reasons.push("ratio unbounded as x -> 0-".to_string());
    }
    v.holds = reasons.is_empty();
    v.reason = if v.holds { "ok".into() } else { reasons.join("; ") };
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_models::{DriftSpec, JumpSpec, LevyModel};
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    #[test]
    fn brownian_with_jumps_is_condition_one() {
        let t = LevyModel::new(
            1.0,
            DriftSpec::Truncated(0.3),
            JumpSpec::Merton {
                rate: 2.0,
                mean: 0.1,
                sd: 0.2,
            },
        )
        .to_triplet()
        .unwrap();
        let c = classify(&t).unwrap();
        assert_eq!(c.condition, 1);
        assert_eq!(c.alpha, 2.0);
        assert_eq!(c.limit, LimitKind::Brownian { a: 1.0 });
    }

    #[test]
    fn vg_with_drift_is_condition_two() {
        let t = LevyModel::new(
            0.0,
            DriftSpec::FiniteVariation(0.5),
            JumpSpec::Vg {
                c: 1.0,
                lambda_plus: 2.0,
                lambda_minus: 3.0,
            },
        )
        .to_triplet()
        .unwrap();
        let c = classify(&t).unwrap();
        assert_eq!(c.condition, 2);
        assert_eq!(c.alpha, 1.0);
        match c.limit {
            LimitKind::Drift { gamma0 } => assert_abs_diff_eq!(gamma0, 0.5, epsilon = 1e-10),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cgmy_regimes() {
        let c = classify(&LevyModel::cgmy(1.0, 1.0, 1.0, 1.5).to_triplet().unwrap()).unwrap();
        assert_eq!(c.condition, 3);
        match c.limit {
            LimitKind::Stable {
                alpha,
                c_plus,
                c_minus,
                gamma_star,
            } => {
                assert_eq!(alpha, 1.5);
                assert_abs_diff_eq!(c_plus, 1.0, epsilon = 1e-10);
                assert_abs_diff_eq!(c_minus, 1.0, epsilon = 1e-10);
                assert_abs_diff_eq!(gamma_star, 0.0, epsilon = 1e-10);
            }
            other => panic!("unexpected {other:?}"),
        }
        let c = classify(&LevyModel::cgmy(1.0, 1.0, 1.0, 1.0).to_triplet().unwrap()).unwrap();
        assert_eq!(c.condition, 4);
        let fv0 = LevyModel::cgmy(1.0, 2.0, 1.0, 0.5).with_drift(DriftSpec::FiniteVariation(0.0));
        let c = classify(&fv0.to_triplet().unwrap()).unwrap();
        assert_eq!(c.condition, 5);
        let fv1 = LevyModel::cgmy(1.0, 2.0, 1.0, 0.5).with_drift(DriftSpec::FiniteVariation(-0.2));
        let c = classify(&fv1.to_triplet().unwrap()).unwrap();
        assert_eq!(c.condition, 2);
    }

    #[test]
    fn nig_is_cauchy_with_limit_c_over_b() {
        let t = LevyTriplet::new(0.0, 0.1, JumpSpec::Nig { a: 0.5, b: 2.0, c: 0.8 }).unwrap();
        let c = classify(&t).unwrap();
        assert_eq!(c.condition, 4);
        match c.limit {
            LimitKind::Stable { c_plus, c_minus, .. } => {
                assert_abs_diff_eq!(c_plus, 0.4, epsilon = 1e-6);
                assert_abs_diff_eq!(c_minus, 0.4, epsilon = 1e-6);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cauchy_gamma_star_matches_direct_quadrature() {
        let t = LevyModel::cgmy(1.0, 1.0, 2.0, 1.0)
            .with_drift(DriftSpec::Truncated(0.3))
            .to_triplet()
            .unwrap();
        let c = classify(&t).unwrap();
        // independent midpoint sums: (e^{-x} - e^{-2x})/x on (0,1), then x = 1/u beyond
        let n = 1_000_000;
        let h = 1.0 / n as f64;
        let mut inner = 0.0;
        let mut outer = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            inner += ((-x).exp() - (-2.0 * x).exp()) / x * h;
            let y = 1.0 / x;
            outer += ((-y).exp() - (-2.0 * y).exp()) * h;
        }
        let want = 0.3 - (inner + outer);
        match c.limit {
            LimitKind::Stable { gamma_star, .. } => assert_abs_diff_eq!(gamma_star, want, epsilon = 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn compound_poisson_without_drift_is_unclassifiable() {
        let t = LevyTriplet::new(
            0.0,
            0.0,
            JumpSpec::Kou {
                rate: 1.0,
                p_up: 0.5,
                eta_plus: 3.0,
                eta_minus: 3.0,
            },
        )
        .unwrap();
        assert!(matches!(classify(&t), Err(Error::Unclassifiable(_))));
    }

    #[test]
    fn g_limit_extrapolation_handles_slow_convergence() {
        let g: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|x: f64| 1.0 + x.abs().powf(0.3));
        let t = LevyTriplet::new(0.0, 0.0, JumpSpec::power(1.5, g, 3.0, true)).unwrap();
        let l = g_limits(&t.jumps, 1.5).unwrap();
        assert_abs_diff_eq!(l.c_plus, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(l.c_minus, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn oscillating_g_has_no_limit() {
        let g: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|x: f64| 1.0 + 0.5 * (x.abs().ln() * 3.0).sin());
        let t = LevyTriplet::new(0.0, 0.0, JumpSpec::power(1.5, g, 2.0, true)).unwrap();
        assert!(matches!(classify(&t), Err(Error::Unclassifiable(_))));
    }

    #[test]
    fn h_prime_examples() {
        let cgmy = LevyModel::cgmy(1.0, 1.0, 1.0, 1.5).to_triplet().unwrap();
        let v = check_h_prime(&cgmy, 1.5, 1.0);
        assert!(v.holds, "{v:?}");

        let g: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|x: f64| 1.0 + x.abs().powf(0.3));
        let t = LevyTriplet::new(0.0, 0.0, JumpSpec::power(1.5, g, 3.0, true)).unwrap();
        let v = check_h_prime(&t, 1.5, 0.76);
        assert!(!v.holds, "{v:?}");

        let st = LevyModel::stable(1.2, 1.0, 1.0).to_triplet().unwrap();
        for &theta in &[0.7, 1.0, 3.0] {
            assert!(check_h_prime(&st, 1.2, theta).holds);
        }
        let one_sided = LevyModel::stable(1.2, 1.0, 0.0).to_triplet().unwrap();
        assert!(!check_h_prime(&one_sided, 1.2, 1.0).holds);
    }

    #[test]
    fn classification_survives_rescaling() {
        let t = LevyModel::cgmy(2.0, 1.0, 3.0, 1.4).to_triplet().unwrap();
        let r = t.rescale(0.01, 1.4).unwrap();
        let c = classify(&r).unwrap();
        assert_eq!(c.condition, 3);
        match c.limit {
            LimitKind::Stable { c_plus, c_minus, .. } => {
                assert_abs_diff_eq!(c_plus, 2.0, epsilon = 1e-8);
                assert_abs_diff_eq!(c_minus, 2.0, epsilon = 1e-8);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn drift_constraint() {
        // strictly stable triplets satisfy it with ν = ν*
        let st = LevyModel::stable(1.5, 1.0, 0.3).to_triplet().unwrap();
        assert_abs_diff_eq!(drift_constraint_gap(&st, 1.5, 1.0, 0.3).unwrap(), 0.0, epsilon = 1e-9);
        let sym = LevyModel::cgmy(1.0, 1.0, 1.0, 1.5).to_triplet().unwrap();
        assert_abs_diff_eq!(drift_constraint_gap(&sym, 1.5, 1.0, 1.0).unwrap(), 0.0, epsilon = 1e-9);
        // asymmetric CGMY: the constraint says E X₁ = ∫x(ν - ν*)
        //   = CΓ(1-α)(λ₊^{α-1} - λ₋^{α-1}), so γ = that - ∫_{|x|>1}(x - h)ν
        let (c, lp, lm, a) = (1.0f64, 2.0f64, 1.0f64, 1.5f64);
        let mean_gap = c * crate::special::gamma(1.0 - a) * (lp.powf(a - 1.0) - lm.powf(a - 1.0));
        let n = 2_000_000;
        let w = 59.0 / n as f64;
        let tail: f64 = (0..n)
            .map(|i| {
                let x = 1.0 + (i as f64 + 0.5) * w;
                (x - 1.0) * c * ((-lp * x).exp() - (-lm * x).exp()) * x.powf(-1.0 - a) * w
            })
            .sum();
        let gamma = mean_gap - tail;
        let t = LevyModel::cgmy(c, lp, lm, a)
            .with_drift(DriftSpec::Truncated(gamma))
            .to_triplet()
            .unwrap();
        assert_abs_diff_eq!(drift_constraint_gap(&t, a, c, c).unwrap(), 0.0, epsilon = 1e-7);
        let shifted = LevyModel::cgmy(c, lp, lm, a).with_drift(DriftSpec::Truncated(gamma + 0.25)).to_triplet().unwrap();
        assert_abs_diff_eq!(drift_constraint_gap(&shifted, a, c, c).unwrap(), 0.25, epsilon = 1e-7);
    }
}
