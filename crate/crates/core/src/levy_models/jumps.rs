//! Jump measures: the parametric catalogue and its scaled image.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{param, Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity};
use crate::real::{Real, ScalarFn};
use crate::special::bessel_k1;

/// Sign of the jump region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Side::Plus => T::one(),
            Side::Minus => -T::one(),
        }
    }
}

/// User supplied density `g(x) / |x|^{1+alpha}`.
///
/// `g_bound` must dominate `g` everywhere; it is the rejection envelope used by
/// the simulator. `certified` is the caller's declaration that the measure
/// integrates `1 ∧ x²`; the library checks it numerically but cannot prove it.
#[derive(Clone)]
pub struct PowerDensity<T: Real> {
    pub alpha: T,
    pub g: ScalarFn<T>,
    pub g_bound: T,
    pub certified: bool,
}

impl<T: Real> fmt::Debug for PowerDensity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PowerDensity")
            .field("alpha", &self.alpha)
            .field("g_bound", &self.g_bound)
            .field("certified", &self.certified)
            .finish_non_exhaustive()
    }
}

/// Lévy measure of a model, in the model's own units.
#[derive(Clone, Debug)]
pub enum JumpSpec<T: Real> {
    None,
    PowerDensity(PowerDensity<T>),
    /// `C e^{-λ±|x|} / |x|^{1+α}`.
    Cgmy {
        c: T,
        lambda_plus: T,
        lambda_minus: T,
        alpha: T,
    },
    /// Normal inverse Gaussian: `C/|x| · e^{A x} K₁(B|x|)`, `B > |A|`.
    Nig { a: T, b: T, c: T },
    /// Variance gamma: `C e^{-λ±|x|} / |x|`.
    Vg {
        c: T,
        lambda_plus: T,
        lambda_minus: T,
    },
    /// Strictly stable: `c± / |x|^{1+α}`.
    Stable { alpha: T, c_plus: T, c_minus: T },
    /// Compound Poisson with double exponential jumps.
    Kou {
        rate: T,
        p_up: T,
        eta_plus: T,
        eta_minus: T,
    },
    /// Compound Poisson with Gaussian jumps.
    Merton { rate: T, mean: T, sd: T },
}

impl<T: Real> JumpSpec<T> {
    pub fn power(alpha: T, g: ScalarFn<T>, g_bound: T, certified: bool) -> Self {
        JumpSpec::PowerDensity(PowerDensity {
            alpha,
            g,
            g_bound,
            certified,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let z = T::zero();
        let two = T::lit(2.0);
        let pos = |v: T, name: &str| -> Result<()> {
            if v > z && v.is_finite() {
                Ok(())
            } else {
                Err(param(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            JumpSpec::None => Ok(()),
            JumpSpec::PowerDensity(p) => {
                if !(p.alpha > z && p.alpha < two) {
                    return Err(param(format!("power density alpha must lie in (0,2), got {}", p.alpha)));
                }
                pos(p.g_bound, "g_bound")?;
                if !p.certified {
                    return Err(param("custom g requires an explicit integrability certificate"));
                }
                Ok(())
            }
            JumpSpec::Cgmy {
                c,
                lambda_plus,
                lambda_minus,
                alpha,
            } => {
                pos(*c, "CGMY C")?;
                pos(*lambda_plus, "CGMY lambda_plus")?;
                pos(*lambda_minus, "CGMY lambda_minus")?;
                if !(*alpha > z && *alpha < two) {
                    return Err(param(format!("CGMY alpha must lie in (0,2), got {alpha}")));
                }
                Ok(())
            }
            JumpSpec::Nig { a, b, c } => {
                pos(*c, "NIG C")?;
                if !(*b > a.abs()) {
                    return Err(param(format!("NIG requires B > |A|, got A={a}, B={b}")));
                }
                Ok(())
            }
            JumpSpec::Vg {
                c,
                lambda_plus,
                lambda_minus,
            } => {
                pos(*c, "VG C")?;
                pos(*lambda_plus, "VG lambda_plus")?;
                pos(*lambda_minus, "VG lambda_minus")
            }
            JumpSpec::Stable {
                alpha,
                c_plus,
                c_minus,
            } => {
                if !(*alpha > z && *alpha < two) {
                    return Err(param(format!("stable alpha must lie in (0,2), got {alpha}")));
                }
                if *c_plus < z || *c_minus < z || !(*c_plus + *c_minus > z) {
                    return Err(param("stable requires c_plus, c_minus >= 0 with c_plus + c_minus > 0"));
                }
                Ok(())
            }
            JumpSpec::Kou {
                rate,
                p_up,
                eta_plus,
                eta_minus,
            } => {
                pos(*rate, "Kou rate")?;
                pos(*eta_plus, "Kou eta_plus")?;
                pos(*eta_minus, "Kou eta_minus")?;
                if !(*p_up >= z && *p_up <= T::one()) {
                    return Err(param("Kou p_up must lie in [0,1]"));
                }
                Ok(())
            }
            JumpSpec::Merton { rate, mean, sd } => {
                pos(*rate, "Merton rate")?;
                pos(*sd, "Merton sd")?;
                if !mean.is_finite() {
                    return Err(param("Merton mean must be finite"));
                }
                Ok(())
            }
        }
    }

    /// Lévy density at `x ≠ 0`.
    pub fn density(&self, x: T) -> T {
        let z = T::zero();
        if x == z {
            return z;
        }
        let ax = x.abs();
        match self {
            JumpSpec::None => z,
            JumpSpec::Kou {
                rate,
                p_up,
                eta_plus,
                eta_minus,
            } => {
                if x > z {
                    *rate * *p_up * *eta_plus * (-*eta_plus * ax).exp()
                } else {
                    *rate * (T::one() - *p_up) * *eta_minus * (-*eta_minus * ax).exp()
                }
            }
            JumpSpec::Merton { rate, mean, sd } => {
                let u = (x - *mean) / *sd;
                *rate * (-(u * u) / T::lit(2.0)).exp() / (*sd * (T::lit(2.0) * T::PI()).sqrt())
            }
            _ => {
                let idx = self.power_index().unwrap_or(z);
                self.g(x).unwrap_or(z) / ax.powf(T::one() + idx)
            }
        }
    }

    /// Index `α` of the representation `ν(x) = g(x)/|x|^{1+α}`, when the
    /// model is written in that form.
    pub fn power_index(&self) -> Option<T> {
        match self {
            JumpSpec::PowerDensity(p) => Some(p.alpha),
            JumpSpec::Cgmy { alpha, .. } => Some(*alpha),
            JumpSpec::Stable { alpha, .. } => Some(*alpha),
            JumpSpec::Nig { .. } => Some(T::one()),
            JumpSpec::Vg { .. } => Some(T::zero()),
            _ => None,
        }
    }

    /// `g(x) = ν(x)|x|^{1+α}` for power-form models.
    pub fn g(&self, x: T) -> Option<T> {
        let z = T::zero();
        let ax = x.abs();
        match self {
            JumpSpec::PowerDensity(p) => Some((p.g)(x)),
            JumpSpec::Cgmy {
                c,
                lambda_plus,
                lambda_minus,
                ..
            }
            | JumpSpec::Vg {
                c,
                lambda_plus,
                lambda_minus,
            } => {
                let lam = if x > z { *lambda_plus } else { *lambda_minus };
                Some(*c * (-lam * ax).exp())
            }
            JumpSpec::Stable { c_plus, c_minus, .. } => Some(if x > z { *c_plus } else { *c_minus }),
            JumpSpec::Nig { a, b, c } => Some(*c * ax * (*a * x).exp() * bessel_k1(*b * ax)),
            _ => None,
        }
    }

    /// True when the measure has finite total mass.
    pub fn is_finite_activity(&self) -> bool {
        matches!(self, JumpSpec::None | JumpSpec::Kou { .. } | JumpSpec::Merton { .. })
    }

    /// Total mass for finite-activity measures.
    pub fn total_rate(&self) -> Option<T> {
        match self {
            JumpSpec::None => Some(T::zero()),
            JumpSpec::Kou { rate, .. } | JumpSpec::Merton { rate, .. } => Some(*rate),
            _ => None,
        }
    }

    /// Draws one signed jump from the normalized law of a finite-activity measure.
    pub fn sample_finite<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match self {
            JumpSpec::Kou {
                p_up,
                eta_plus,
                eta_minus,
                ..
            } => {
                let u: f64 = rng.random();
                let e: f64 = Exp1.sample(rng);
                if T::lit(u) < *p_up {
                    T::lit(e) / *eta_plus
                } else {
                    -T::lit(e) / *eta_minus
                }
            }
            JumpSpec::Merton { mean, sd, .. } => {
                let n: f64 = StandardNormal.sample(rng);
                *mean + *sd * T::lit(n)
            }
            _ => T::zero(),
        }
    }

    /// Rejection envelope for `g` on `{|x| > cut}` of one side.
    fn g_envelope(&self, side: Side, cut: T) -> T {
        match self {
            JumpSpec::PowerDensity(p) => p.g_bound,
            JumpSpec::Cgmy { c, .. } => *c,
            JumpSpec::Stable { c_plus, c_minus, .. } => match side {
                Side::Plus => *c_plus,
                Side::Minus => *c_minus,
            },
            JumpSpec::Nig { a, b, .. } => {
                // numeric supremum on a log grid, widened by 5%
                let lo = cut.max(T::lit(1e-12));
                let hi = (T::lit(60.0) / (*b - a.abs())).max(lo * T::lit(10.0));
                let n = 800;
                let ratio = (hi / lo).ln() / T::lit(n as f64);
                let s = side.sign::<T>();
                let mut best = T::zero();
                for i in 0..=n {
                    let x = lo * (ratio * T::lit(i as f64)).exp();
                    best = best.max(self.g(s * x).unwrap_or(T::zero()));
                }
                best * T::lit(1.05)
            }
            _ => T::zero(),
        }
    }

    /// Draws the magnitude of a jump from `ν` restricted to `{side, |x| > cut}`
    /// (infinite-activity models only), by rejection from a Pareto envelope.
    pub fn sample_tail<R: Rng + ?Sized>(&self, side: Side, cut: T, envelope: T, rng: &mut R) -> Result<T> {
        if let JumpSpec::Vg {
            c: _,
            lambda_plus,
            lambda_minus,
        } = self
        {
            let lam = match side {
                Side::Plus => *lambda_plus,
                Side::Minus => *lambda_minus,
            };
            return Ok(sample_exp_over_x(lam, cut, rng));
        }
        let alpha = self
            .power_index()
            .ok_or_else(|| param("tail sampling needs a power-form measure"))?;
        let s = side.sign::<T>();
        let inv_alpha = T::one() / alpha;
        for _ in 0..1_000_000 {
            let u: f64 = rng.random();
            let u = T::lit(1.0 - u); // (0, 1]
            let x = cut * u.powf(-inv_alpha);
            if !x.is_finite() {
                continue;
            }
            let g = self.g(s * x).unwrap_or(T::zero());
            if g > envelope * T::lit(1.0 + 1e-12) {
                return Err(Error::EnvelopeViolated {
                    at: (s * x).as_f64(),
                    value: g.as_f64(),
                    bound: envelope.as_f64(),
                });
            }
            let v: f64 = rng.random();
            if T::lit(v) * envelope < g {
                return Ok(x);
            }
        }
        Err(param("tail sampler acceptance rate vanished"))
    }

    pub(crate) fn envelope(&self, side: Side, cut: T) -> T {
        self.g_envelope(side, cut)
    }
}

/// Samples from the density proportional to `e^{-λx}/x` on `(cut, ∞)`.
fn sample_exp_over_x<T: Real, R: Rng + ?Sized>(lam: T, cut: T, rng: &mut R) -> T {
    let knee = T::one() / lam;
    loop {
        if cut < knee {
            // envelope 1/x on (cut, knee], λ e^{-λx} beyond
            let m1 = (knee / cut).ln();
            let m2 = (-T::one()).exp();
            let u: f64 = rng.random();
            if T::lit(u) * (m1 + m2) < m1 {
                let w: f64 = rng.random();
                let x = cut * (m1 * T::lit(w)).exp();
                let v: f64 = rng.random();
                if T::lit(v) < (-lam * x).exp() {
                    return x;
                }
            } else {
                let e: f64 = Exp1.sample(rng);
                let x = knee + T::lit(e) / lam;
                let v: f64 = rng.random();
                if T::lit(v) < T::one() / (lam * x) {
                    return x;
                }
            }
        } else {
            let e: f64 = Exp1.sample(rng);
            let x = cut + T::lit(e) / lam;
            let v: f64 = rng.random();
            if T::lit(v) < cut / x {
                return x;
            }
        }
    }
}

/// Scaled image of a jump measure: `ν'(B) = mass · ν({x : x/space ∈ B})`.
///
/// Rescaling by `ε` with exponent `α` multiplies `mass` by `ε^α` and `space`
/// by `ε`, so repeated rescalings compose exactly.
#[derive(Clone, Debug)]
pub struct LevyMeasure<T: Real> {
    pub spec: JumpSpec<T>,
    pub space: T,
    pub mass: T,
}

impl<T: Real> LevyMeasure<T> {
    pub fn new(spec: JumpSpec<T>) -> Self {
        Self {
            spec,
            space: T::one(),
            mass: T::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.spec, JumpSpec::None)
    }

    pub fn scaled(&self, eps: T, alpha: T) -> Self {
        Self {
            spec: self.spec.clone(),
            space: self.space * eps,
            mass: self.mass * eps.powf(alpha),
        }
    }

    /// Density of the scaled measure.
    pub fn density(&self, x: T) -> T {
        self.mass * self.space * self.spec.density(self.space * x)
    }

    pub fn power_index(&self) -> Option<T> {
        self.spec.power_index()
    }

    /// `g` of the scaled measure: `ν'(x)|x|^{1+α}`.
    pub fn g(&self, x: T) -> Option<T> {
        let idx = self.spec.power_index()?;
        let g = self.spec.g(self.space * x)?;
        Some(self.mass * self.space.powf(-idx) * g)
    }

    /// `∫ φ dν'` over `{side, lo < |x| < hi}` (`hi` may be infinite).
    pub fn integrate_side<F: Fn(T) -> T>(&self, phi: F, side: Side, lo: T, hi: T, breaks: &[T], tol: T) -> Result<T> {
        if self.is_zero() || !(hi > lo) {
            return Ok(T::zero());
        }
        let s = side.sign::<T>();
        // Work in original units: y = space·|x|.
        let sp = self.space;
        let mut pts: Vec<T> = vec![lo * sp];
        let mut cand: Vec<T> = breaks.iter().map(|b| *b * sp).collect();
        cand.push(T::one()); // original unit scale (tempering, truncation)
        cand.push(sp); // rescaled unit scale
        cand.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        for b in cand {
            if b > *pts.last().unwrap() && b < hi * sp {
                pts.push(b);
            }
        }
        let integrand = |y: T| phi(s * y / sp) * self.spec.density(s * y);
        let mut total = T::zero();
        for w in pts.windows(2) {
            total = total + integrate(&integrand, w[0], w[1], tol)?;
        }
        let last = *pts.last().unwrap();
        if hi.is_infinite() {
            if last == T::zero() {
                total = total + integrate(&integrand, T::zero(), T::one(), tol)?;
                total = total + integrate_to_infinity(&integrand, T::one(), tol)?;
            } else {
                total = total + integrate_to_infinity(&integrand, last, tol)?;
            }
        } else {
            total = total + integrate(&integrand, last, hi * sp, tol)?;
        }
        Ok(self.mass * total)
    }

    /// `∫ φ dν'` over `{lo < |x| < hi}` on both sides.
    pub fn integrate_abs<F: Fn(T) -> T>(&self, phi: F, lo: T, hi: T, breaks: &[T], tol: T) -> Result<T> {
        let p = self.integrate_side(&phi, Side::Plus, lo, hi, breaks, tol)?;
        let m = self.integrate_side(&phi, Side::Minus, lo, hi, breaks, tol)?;
        Ok(p + m)
    }

    /// `ν'({side, |x| > cut})`.
    pub fn tail_mass(&self, side: Side, cut: T, tol: T) -> Result<T> {
        if let JumpSpec::Stable {
            alpha,
            c_plus,
            c_minus,
        } = &self.spec
        {
            let c = match side {
                Side::Plus => *c_plus,
                Side::Minus => *c_minus,
            };
            // mass·c·(space·cut)^{-α}/α
            return Ok(self.mass * c * (self.space * cut).powf(-*alpha) / *alpha);
        }
        self.integrate_side(|_| T::one(), side, cut, T::infinity(), &[], tol)
    }

    /// Dyadic shells `∫_{2^{-k-1}<|x|≤2^{-k}} φ dν'` for `k = 0..n`.
    pub fn dyadic_shells<F: Fn(T) -> T>(&self, phi: F, n: usize, tol: T) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(n);
        let half = T::lit(0.5);
        let mut hi = T::one();
        for _ in 0..n {
            let lo = hi * half;
            let v = self.integrate_abs(&phi, lo, hi, &[], tol)?;
            out.push(v);
            hi = lo;
        }
        Ok(out)
    }

    /// Decides convergence of `∫_{|x|≤1} φ dν'` from its dyadic shells.
    ///
    /// Divergent when partial sums exceed `1e8` or when the shells stop
    /// decaying geometrically (mean ratio of the last five shells ≥ 0.999).
    pub fn small_jump_integral_finite<F: Fn(T) -> T>(&self, phi: F, tol: T) -> Result<bool> {
        if self.spec.is_finite_activity() {
            return Ok(true);
        }
        let shells = self.dyadic_shells(phi, 61, tol)?;
        let total: T = shells.iter().copied().sum();
        if total > T::lit(1e8) || !total.is_finite() {
            return Ok(false);
        }
        let n = shells.len();
        let mut ratios = Vec::new();
        for k in (n - 5)..n {
            let prev = shells[k - 1];
            if prev > T::zero() {
                ratios.push(shells[k] / prev);
            }
        }
        if ratios.is_empty() {
            return Ok(true);
        }
        let mean = ratios.iter().copied().sum::<T>() / T::lit(ratios.len() as f64);
        Ok(mean < T::lit(0.999))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn cgmy(alpha: f64) -> JumpSpec<f64> {
        JumpSpec::Cgmy {
            c: 1.0,
            lambda_plus: 1.0,
            lambda_minus: 1.0,
            alpha,
        }
    }

    #[test]
    fn cgmy_density_matches_power_form() {
        let j = cgmy(1.5);
        for &x in &[-3.0, -0.2, 0.01, 0.7, 5.0] {
            let direct = (-(x as f64).abs()).exp() / (x as f64).abs().powf(2.5);
            assert_abs_diff_eq!(j.density(x), direct, epsilon = 1e-14 * direct.max(1.0));
            assert_abs_diff_eq!(j.g(x).unwrap(), (-(x as f64).abs()).exp(), epsilon = 1e-15);
        }
    }

    #[test]
    fn validation_rejects_out_of_range() {
        assert!(cgmy(2.0).validate().is_err());
        assert!(cgmy(0.0).validate().is_err());
        assert!(JumpSpec::Nig { a: 1.0, b: 0.5, c: 1.0 }.validate().is_err());
        let uncertified = JumpSpec::power(1.2, Arc::new(|_| 1.0), 1.0, false);
        assert!(uncertified.validate().is_err());
    }

    #[test]
    fn scaled_density_and_composition() {
        let m = LevyMeasure::new(cgmy(1.5));
        let a = m.scaled(0.5, 1.5).scaled(0.1, 1.5);
        let b = m.scaled(0.05, 1.5);
        for &x in &[-2.0, 0.3, 1.7] {
            assert_abs_diff_eq!(a.density(x), b.density(x), epsilon = 1e-12 * b.density(x));
            // ν^ε(x) = ε^{1+α} ν(εx)
            let eps: f64 = 0.05;
            let direct = eps.powf(2.5) * m.density(eps * x);
            assert_abs_diff_eq!(b.density(x), direct, epsilon = 1e-12 * direct);
        }
    }

    #[test]
    fn stable_tail_mass_closed_form_matches_quadrature() {
        let spec = JumpSpec::Stable {
            alpha: 1.3,
            c_plus: 0.7,
            c_minus: 1.2,
        };
        let m = LevyMeasure::new(spec).scaled(0.2, 1.3);
        let closed = m.tail_mass(Side::Minus, 0.4, 1e-12).unwrap();
        let quad = m
            .integrate_side(|_| 1.0, Side::Minus, 0.4, f64::INFINITY, &[], 1e-12)
            .unwrap();
        assert_abs_diff_eq!(closed, quad, epsilon = 1e-10);
    }

    #[test]
    fn first_moment_finiteness() {
        let fv = LevyMeasure::new(cgmy(0.5));
        assert!(fv.small_jump_integral_finite(|x: f64| x.abs(), 1e-12).unwrap());
        let iv = LevyMeasure::new(cgmy(1.5));
        assert!(!iv.small_jump_integral_finite(|x: f64| x.abs(), 1e-12).unwrap());
        let cauchy = LevyMeasure::new(JumpSpec::Stable {
            alpha: 1.0,
            c_plus: 1.0,
            c_minus: 1.0,
        });
        assert!(!cauchy.small_jump_integral_finite(|x: f64| x.abs(), 1e-12).unwrap());
        let vg = LevyMeasure::new(JumpSpec::Vg {
            c: 1.0,
            lambda_plus: 2.0,
            lambda_minus: 3.0,
        });
        assert!(vg.small_jump_integral_finite(|x: f64| x.abs(), 1e-12).unwrap());
    }

    #[test]
    fn vg_tail_sampler_matches_mass() {
        // P(X > 1 | X > 0.1) for density e^{-2x}/x on (0.1, ∞)
        let lam = 2.0f64;
        let m = LevyMeasure::new(JumpSpec::Vg {
            c: 1.0,
            lambda_plus: lam,
            lambda_minus: lam,
        });
        let p_ref = m.tail_mass(Side::Plus, 1.0, 1e-12).unwrap() / m.tail_mass(Side::Plus, 0.1, 1e-12).unwrap();
        let mut rng = stream(1, Purpose::Aux, 0);
        let n = 200_000;
        let hits = (0..n)
            .filter(|_| m.spec.sample_tail(Side::Plus, 0.1, 1.0, &mut rng).unwrap() > 1.0)
            .count();
        let p = hits as f64 / n as f64;
        let se = (p_ref * (1.0 - p_ref) / n as f64).sqrt();
        assert!((p - p_ref).abs() < 4.0 * se, "p={p} ref={p_ref}");
    }

    #[test]
    fn cgmy_tail_sampler_matches_mass() {
        let spec = JumpSpec::Cgmy {
            c: 1.0,
            lambda_plus: 3.0,
            lambda_minus: 1.0,
            alpha: 0.8,
        };
        let m = LevyMeasure::new(spec.clone());
        let p_ref = m.tail_mass(Side::Plus, 0.5, 1e-12).unwrap() / m.tail_mass(Side::Plus, 0.05, 1e-12).unwrap();
        let mut rng = stream(2, Purpose::Aux, 0);
        let env = spec.envelope(Side::Plus, 0.05);
        let n = 200_000;
        let hits = (0..n)
            .filter(|_| spec.sample_tail(Side::Plus, 0.05, env, &mut rng).unwrap() > 0.5)
            .count();
        let p = hits as f64 / n as f64;
        let se = (p_ref * (1.0 - p_ref) / n as f64).sqrt();
        assert!((p - p_ref).abs() < 4.0 * se, "p={p} ref={p_ref}");
    }

    #[test]
    fn envelope_violation_is_reported() {
        let spec = JumpSpec::power(1.5, Arc::new(|_| 2.0), 1.0, true);
        let mut rng = stream(3, Purpose::Aux, 0);
        let r = spec.sample_tail(Side::Plus, 0.1, 1.0, &mut rng);
        assert!(matches!(r, Err(Error::EnvelopeViolated { .. })));
    }
}
