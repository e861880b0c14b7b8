//! Strictly stable increments by the Chambers–Mallows–Stuck construction.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{param, Result};
use crate::real::Real;
use crate::special::gamma;

/// Sampler for increments of the strictly `α`-stable process with Lévy
/// density `c₊/x^{1+α}` on `x > 0` and `c₋/|x|^{1+α}` on `x < 0`.
///
/// The characteristic exponent is `-σ^α|u|^α(1 - iβ sgn(u) tan(πα/2))` with
/// `β = (c₊-c₋)/(c₊+c₋)` and `σ^α = -(c₊+c₋)Γ(-α)cos(πα/2)`; for `α = 1`
/// (symmetric only) it is `-cπ|u|`.
#[derive(Clone, Copy, Debug)]
pub struct StableSampler<T> {
    alpha: T,
    beta: T,
    sigma: T,
    inv_alpha: T,
    b_shift: T,
    s_factor: T,
    cauchy: bool,
}

impl<T: Real> StableSampler<T> {
    pub fn new(alpha: T, c_plus: T, c_minus: T) -> Result<Self> {
        let one = T::one();
        if !(alpha > T::zero() && alpha < T::lit(2.0)) {
            return Err(param(format!("stable alpha must lie in (0,2), got {alpha}")));
        }
        if c_plus < T::zero() || c_minus < T::zero() || !(c_plus + c_minus > T::zero()) {
            return Err(param("stable increments need c_plus, c_minus >= 0 with positive sum"));
        }
        let total = c_plus + c_minus;
        let beta = (c_plus - c_minus) / total;
        if alpha == one {
            if beta.abs() > T::lit(1e-12) {
                return Err(param("an asymmetric 1-stable law is not strictly stable"));
            }
            return Ok(Self {
                alpha,
                beta: T::zero(),
                sigma: total / T::lit(2.0) * T::PI(),
                inv_alpha: one,
                b_shift: T::zero(),
                s_factor: one,
                cauchy: true,
            });
        }
        let half_pi_alpha = T::FRAC_PI_2() * alpha;
        let sigma_a = -total * gamma(-alpha) * half_pi_alpha.cos();
        let t = beta * half_pi_alpha.tan();
        Ok(Self {
            alpha,
            beta,
            sigma: sigma_a.powf(one / alpha),
            inv_alpha: one / alpha,
            b_shift: t.atan() / alpha,
            s_factor: (one + t * t).powf(one / (T::lit(2.0) * alpha)),
            cauchy: false,
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// Scale `σ` of the unit-time increment.
    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// One draw of the unit-scale variate (`σ = 1`).
    #[inline]
    pub fn standard<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let u: f64 = rng.random();
        // V uniform on (-π/2, π/2), never exactly at an endpoint
        let v = T::PI() * (T::lit(u) - T::lit(0.5));
        if self.cauchy {
            return v.tan();
        }
        let w: f64 = Exp1.sample(rng);
        let w = T::lit(w).max(T::min_positive_value());
        let a = self.alpha;
        let vb = a * (v + self.b_shift);
        let cv = v.cos();
        self.s_factor * vb.sin() / cv.powf(self.inv_alpha)
            * ((v - vb).cos() / w).powf((T::one() - a) * self.inv_alpha)
    }

    /// Increment over a time span `dt ≥ 0`.
    #[inline]
    pub fn increment<R: Rng + ?Sized>(&self, dt: T, rng: &mut R) -> T {
        if dt == T::zero() {
            return T::zero();
        }
        self.sigma * dt.powf(self.inv_alpha) * self.standard(rng)
    }

    /// Time span over which the increment scale `σ dt^{1/α}` equals `scale`.
    pub fn time_for_scale(&self, scale: T) -> T {
        (scale / self.sigma).powf(self.alpha)
    }
}

/// One increment of the strictly stable process over `dt`.
pub fn stable_increment<T: Real, R: Rng + ?Sized>(alpha: T, c_plus: T, c_minus: T, dt: T, rng: &mut R) -> Result<T> {
    if !(dt >= T::zero()) {
        return Err(param(format!("dt must be nonnegative, got {dt}")));
    }
    Ok(StableSampler::new(alpha, c_plus, c_minus)?.increment(dt, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    #[test]
    fn zero_time_gives_zero() {
        let mut rng = stream(1, Purpose::Aux, 0);
        assert_eq!(stable_increment(1.5, 1.0, 1.0, 0.0, &mut rng).unwrap(), 0.0);
        assert!(stable_increment(2.5, 1.0, 1.0, 1.0, &mut rng).is_err());
        assert!(stable_increment(1.0, 1.0, 0.5, 1.0, &mut rng).is_err());
    }

    #[test]
    fn symmetric_median_is_zero() {
        let s = StableSampler::new(1.2, 1.0, 1.0).unwrap();
        let mut rng = stream(2, Purpose::Aux, 0);
        let n = 1_000_000;
        let mut xs: Vec<f64> = (0..n).map(|_| s.increment(1.0, &mut rng)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let med = xs[n / 2];
        let iqr = xs[3 * n / 4] - xs[n / 4];
        assert!(med.abs() < 3.0 * iqr / (n as f64).sqrt(), "median {med}");
    }

    /// Empirical characteristic function against the analytic exponent.
    fn check_cf(alpha: f64, cp: f64, cm: f64, dt: f64, seed: u64) {
        let s = StableSampler::new(alpha, cp, cm).unwrap();
        let mut rng = stream(seed, Purpose::Aux, 0);
        let n = 400_000;
        let u = 1.0f64;
        let (mut re, mut im, mut re2, mut im2) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = s.increment(dt, &mut rng);
            let (si, co) = (u * x).sin_cos();
            re += co;
            im += si;
            re2 += co * co;
            im2 += si * si;
        }
        let nf = n as f64;
        let (re, im) = (re / nf, im / nf);
        let se_re = ((re2 / nf - re * re) / nf).sqrt();
        let se_im = ((im2 / nf - im * im) / nf).sqrt();
        // independent exponent: ∫(e^{iux} - 1 - iux·1{α>1}) ν(dx) by quadrature
        let (want_re, want_im) = analytic_cf(alpha, cp, cm, u, dt);
        assert!((re - want_re).abs() < 3.0 * se_re + 1e-4, "re {re} vs {want_re}");
        assert!((im - want_im).abs() < 3.0 * se_im + 1e-4, "im {im} vs {want_im}");
    }

    /// CF of the strictly stable law from the Lévy measure by direct quadrature.
    fn analytic_cf(alpha: f64, cp: f64, cm: f64, u: f64, dt: f64) -> (f64, f64) {
        use crate::quadrature::{integrate, integrate_to_infinity};
        // real part: -(c₊+c₋) ∫_0^∞ (1 - cos ux) x^{-1-α} dx
        let f = |x: f64| 2.0 * (u * x / 2.0).sin().powi(2) * x.powf(-1.0 - alpha);
        let ire = integrate(f, 0.0, 1.0, 1e-12).unwrap() + 1.0 / alpha - tail_trig(u, alpha, false);
        // imaginary part: (c₊-c₋) ∫_0^∞ (sin ux - ux·1{α>1}) x^{-1-α} dx
        let g = |x: f64| {
            let y = u * x;
            let num = if alpha <= 1.0 {
                y.sin()
            } else if y < 1e-2 {
                // sin y - y without cancellation
                -y.powi(3) / 6.0 + y.powi(5) / 120.0
            } else {
                y.sin() - y
            };
            num * x.powf(-1.0 - alpha)
        };
        let iim = if cp == cm {
            0.0
        } else if alpha > 1.0 {
            // the linear part has a closed-form tail; the sine tail is summed by half periods
            integrate(g, 0.0, 1.0, 1e-12).unwrap() + integrate_to_infinity(|x: f64| -u * x.powf(-alpha), 1.0, 1e-12).unwrap()
                + tail_trig(u, alpha, true)
        } else {
            integrate(g, 0.0, 1.0, 1e-12).unwrap() + tail_trig(u, alpha, true)
        };
        let psi_re = -(cp + cm) * ire * dt;
        let psi_im = (cp - cm) * iim * dt;
        let m = psi_re.exp();
        (m * psi_im.cos(), m * psi_im.sin())
    }

    /// ∫_1^∞ sin(ux) x^{-1-α} dx (or with cos) summed over half periods.
    fn tail_trig(u: f64, alpha: f64, sine: bool) -> f64 {
        use crate::quadrature::integrate;
        let f = |x: f64| if sine { (u * x).sin() } else { (u * x).cos() } * x.powf(-1.0 - alpha);
        let period = std::f64::consts::PI / u;
        let mut a = 1.0;
        let mut total = 0.0;
        for _ in 0..20000 {
            let b = ((a / period).floor() + 1.0) * period;
            total += integrate(f, a, b, 1e-12).unwrap();
            a = b;
        }
        total
    }

    #[test]
    fn characteristic_function_matches_levy_measure() {
        check_cf(1.5, 1.0, 1.0, 0.7, 3);
        check_cf(1.5, 1.5, 0.3, 0.5, 4);
        check_cf(0.7, 0.2, 1.0, 0.5, 5);
        check_cf(1.0, 0.4, 0.4, 1.0, 6);
    }
}
