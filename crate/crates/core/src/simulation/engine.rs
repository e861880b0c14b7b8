//! Jump-diffusion approximation of a Lévy process and first exits from `(-1, 1)`.
//!
//! Jumps larger than the cut `δ` are simulated exactly as a compound Poisson
//! process at exponential times; the compensated small jumps are replaced by a
//! Brownian motion with variance `σ²(δ) = ∫_{|x|≤δ} x² ν(dx)`. Finite-activity
//! measures are simulated without any substitution.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::levy_models::{rescale, truncation, LevyMeasure, LevyTriplet, Side};
use crate::real::Real;

/// Discretization settings for the exit simulator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepScheme {
    /// Small-jump cut as a fraction of the barrier half-width.
    pub cut_ratio: f64,
    /// Per-step diffusion standard deviation, as a fraction of the barrier.
    pub sd_fraction: f64,
    /// Distance to the barrier (fraction of the half-width) below which steps shrink.
    pub refine_zone: f64,
    /// Smallest step shrink factor applied near the barrier.
    pub refine_floor: f64,
    /// Brownian-bridge crossing correction between grid points.
    pub bridge: bool,
    /// Horizon cap in units of the characteristic exit-time scale.
    pub cap_factor: f64,
    /// Upper bound on the big-jump intensity (per unit rescaled time).
    pub max_intensity: f64,
}

impl Default for StepScheme {
    fn default() -> Self {
        Self {
            cut_ratio: 0.1,
            sd_fraction: 1.0 / 20.0,
            refine_zone: 0.2,
            refine_floor: 1.0 / 16.0,
            bridge: true,
            cap_factor: 1e3,
            max_intensity: 1e8,
        }
    }
}

impl StepScheme {
    pub fn with_cut_ratio(mut self, r: f64) -> Self {
        self.cut_ratio = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(self.cut_ratio) && self.cut_ratio <= 1.0) {
            return Err(param(format!("cut_ratio must lie in (0,1], got {}", self.cut_ratio)));
        }
        if !ok(self.sd_fraction) || !ok(self.refine_zone) || !ok(self.cap_factor) || !ok(self.max_intensity) {
            return Err(param("step scheme parameters must be positive"));
        }
        if !(ok(self.refine_floor) && self.refine_floor <= 1.0) {
            return Err(param("refine_floor must lie in (0,1]"));
        }
        Ok(())
    }
}

/// One first exit of `X^ε` from `(-1, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingRecord<T> {
    /// Rescaled exit time `τ^ε₁`.
    pub tau: T,
    /// `X^ε` at the exit time, `|exit_value| ≥ 1`.
    pub exit_value: T,
    pub crossed_by_jump: bool,
    /// Exit time of the unscaled process, `ε^α τ`.
    pub raw_time: T,
}

/// Big jumps of one sign, sampled in the model's own units.
#[derive(Clone, Debug)]
struct TailSide<T: Real> {
    rate: T,
    envelope: T,
}

/// Process `b t + √a_tot W + (compound Poisson of jumps beyond the cut)`.
#[derive(Clone, Debug)]
pub struct JumpDiffusion<T: Real> {
    measure: LevyMeasure<T>,
    finite: bool,
    /// Cut in the coordinates of `measure` (0 for finite activity).
    cut: T,
    drift: T,
    a_tot: T,
    small_var: T,
    plus: TailSide<T>,
    minus: TailSide<T>,
    rate: T,
}

impl<T: Real> JumpDiffusion<T> {
    /// Builds the approximation of `t`; `cut` is in the triplet's own units.
    pub fn new(t: &LevyTriplet<T>, cut: T) -> Result<Self> {
        if !(cut > T::zero() && cut <= T::one()) {
            return Err(param(format!("cut must lie in (0,1], got {cut}")));
        }
        let tol = T::quad_tol();
        let m = &t.jumps;
        let zero = T::zero();
        let finite = m.spec.is_finite_activity();
        let (cut, small_var, plus, minus, big_h) = if m.is_zero() {
            let z = TailSide { rate: zero, envelope: zero };
            (zero, zero, z.clone(), z, zero)
        } else if finite {
            let total = m.mass * m.spec.total_rate().unwrap_or(zero);
            let ih = m.integrate_abs(truncation, zero, T::infinity(), &[], tol)?;
            let s = TailSide { rate: total, envelope: zero };
            (zero, zero, s, TailSide { rate: zero, envelope: zero }, ih)
        } else {
            let var = m.integrate_abs(|x: T| x * x, zero, cut, &[], tol)?;
            let rp = m.tail_mass(Side::Plus, cut, tol)?;
            let rm = m.tail_mass(Side::Minus, cut, tol)?;
            let ih = m.integrate_abs(truncation, cut, T::infinity(), &[], tol)?;
            let orig_cut = cut * m.space;
            let plus = TailSide {
                rate: rp,
                envelope: m.spec.envelope(Side::Plus, orig_cut),
            };
            let minus = TailSide {
                rate: rm,
                envelope: m.spec.envelope(Side::Minus, orig_cut),
            };
            (cut, var, plus, minus, ih)
        };
        let rate = plus.rate + minus.rate;
        if !rate.is_finite() || !small_var.is_finite() {
            return Err(param("jump intensity beyond the cut is not finite"));
        }
        Ok(Self {
            measure: m.clone(),
            finite,
            cut,
            drift: t.gamma - big_h,
            a_tot: t.a + small_var,
            small_var,
            plus,
            minus,
            rate,
        })
    }

    pub fn drift(&self) -> T {
        self.drift
    }

    /// Diffusion variance including the small-jump substitute.
    pub fn diffusion(&self) -> T {
        self.a_tot
    }

    pub fn small_jump_variance(&self) -> T {
        self.small_var
    }

    /// Total intensity of simulated jumps.
    pub fn jump_rate(&self) -> T {
        self.rate
    }

    /// Intensity of jumps with `|x| ≥ level` (`level ≥ cut`).
    pub fn big_jump_rate(&self, level: T) -> Result<T> {
        if self.measure.is_zero() {
            return Ok(T::zero());
        }
        let tol = T::quad_tol();
        Ok(self.measure.tail_mass(Side::Plus, level, tol)? + self.measure.tail_mass(Side::Minus, level, tol)?)
    }

    /// Draws one simulated jump (signed, in the coordinates of the measure).
    #[inline]
    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<T> {
        let sp = self.measure.space;
        if self.finite {
            return Ok(self.measure.spec.sample_finite(rng) / sp);
        }
        let u: f64 = rng.random();
        let (side, env) = if T::lit(u) * self.rate < self.plus.rate {
            (Side::Plus, self.plus.envelope)
        } else {
            (Side::Minus, self.minus.envelope)
        };
        let y = self.measure.spec.sample_tail(side, self.cut * sp, env, rng)?;
        Ok(side.sign::<T>() * y / sp)
    }

    /// Increment over `dt`: drift, Gaussian part and jumps beyond the cut.
    pub fn increment<R: Rng + ?Sized>(&self, dt: T, max_jumps: f64, rng: &mut R) -> Result<T> {
        if dt == T::zero() {
            return Ok(T::zero());
        }
        let z: f64 = StandardNormal.sample(rng);
        let mut x = self.drift * dt + (self.a_tot * dt).sqrt() * T::lit(z);
        let lam = (self.rate * dt).as_f64();
        if lam > max_jumps {
            return Err(Error::IntensityOverflow {
                expected: lam,
                bound: max_jumps,
            });
        }
        if lam > 0.0 {
            let n = Poisson::new(lam).map_err(|e| param(e.to_string()))?.sample(rng) as u64;
            for _ in 0..n {
                x = x + self.sample_jump(rng)?;
            }
        }
        Ok(x)
    }
}

/// One increment of the approximated process `t` over `dt`, cutting jumps at `cut_delta`.
pub fn levy_increment<T: Real, R: Rng + ?Sized>(t: &LevyTriplet<T>, dt: T, cut_delta: T, rng: &mut R) -> Result<T> {
    if dt == T::zero() {
        return Ok(T::zero());
    }
    if !(dt > T::zero()) {
        return Err(param("dt must be nonnegative"));
    }
    JumpDiffusion::new(t, cut_delta)?.increment(dt, 1e7, rng)
}

/// Simulator of first exits of `X^ε` from `(-1, 1)` for a fixed `(ε, α)`.
#[derive(Clone, Debug)]
pub struct ExitSimulator<T: Real> {
    process: JumpDiffusion<T>,
    scheme: StepScheme,
    eps_alpha: T,
    h_base: T,
    cap: T,
    sqrt_a: T,
}

impl<T: Real> ExitSimulator<T> {
    /// Prepares exits of the triplet `t` from `(-eps, eps)` with time scaling `eps^alpha`.
    pub fn new(t: &LevyTriplet<T>, eps: T, alpha: T, scheme: StepScheme) -> Result<Self> {
        scheme.validate()?;
        let r = if eps == T::one() { t.clone() } else { rescale(t, eps, alpha)? };
        Self::from_rescaled(&r, eps.powf(alpha), scheme)
    }

    /// Prepares exits of an already rescaled triplet from `(-1, 1)`;
    /// `eps_alpha` converts rescaled to raw time.
    pub fn from_rescaled(r: &LevyTriplet<T>, eps_alpha: T, scheme: StepScheme) -> Result<Self> {
        scheme.validate()?;
        let process = JumpDiffusion::new(r, T::lit(scheme.cut_ratio))?;
        if process.rate.as_f64() > scheme.max_intensity {
            return Err(Error::IntensityOverflow {
                expected: process.rate.as_f64(),
                bound: scheme.max_intensity,
            });
        }
        let sd = T::lit(scheme.sd_fraction);
        let a = process.a_tot;
        let b = process.drift.abs();
        let mut h_base = T::infinity();
        if a > T::zero() {
            h_base = sd * sd / a;
        }
        if b > T::zero() {
            h_base = h_base.min(sd / b);
        }
        // Exit-time scale: diffusion, drift or a single jump of size ≥ 2.
        let big = process.big_jump_rate(T::lit(2.0).max(T::lit(scheme.cut_ratio)))?;
        let speed = a.max(b).max(big).max(process.rate * T::lit(1e-3));
        if !(speed > T::zero()) {
            return Err(param("the process never leaves (-1, 1): no diffusion, drift or jumps"));
        }
        Ok(Self {
            scheme,
            eps_alpha,
            h_base,
            cap: T::lit(scheme.cap_factor) / speed,
            sqrt_a: a.sqrt(),
            process,
        })
    }

    pub fn process(&self) -> &JumpDiffusion<T> {
        &self.process
    }

    pub fn scheme(&self) -> &StepScheme {
        &self.scheme
    }

    /// Horizon cap in rescaled time.
    pub fn cap(&self) -> T {
        self.cap
    }

    #[inline]
    fn step(&self, dist: T) -> T {
        let zone = T::lit(self.scheme.refine_zone);
        if dist >= zone {
            self.h_base
        } else {
            let r = dist / zone;
            self.h_base * (r * r).max(T::lit(self.scheme.refine_floor))
        }
    }

    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<HittingRecord<T>> {
        let one = T::one();
        let zero = T::zero();
        let p = &self.process;
        let b = p.drift;
        let a = p.a_tot;
        let mut t = zero;
        let mut x = zero;
        let mut next_jump = if p.rate > zero {
            let e: f64 = Exp1.sample(rng);
            T::lit(e) / p.rate
        } else {
            T::infinity()
        };
        let done = |tau: T, v: T, jump: bool| HittingRecord {
            tau,
            exit_value: v,
            crossed_by_jump: jump,
            raw_time: self.eps_alpha * tau,
        };
        loop {
            if t > self.cap {
                return Err(Error::HorizonExceeded { cap: self.cap.as_f64() });
            }
            if a == zero {
                // deterministic motion until the next jump
                if b != zero {
                    let target = if b > zero { one } else { -one };
                    let hit = t + (target - x) / b;
                    if hit <= next_jump {
                        return Ok(done(hit, target, false));
                    }
                }
                if next_jump.is_infinite() {
                    return Err(Error::HorizonExceeded { cap: self.cap.as_f64() });
                }
                x = x + b * (next_jump - t);
                t = next_jump;
            } else {
                let dist = one - x.abs();
                let mut h = self.step(dist);
                let jump_now = t + h >= next_jump;
                if jump_now {
                    h = next_jump - t;
                }
                if h > zero {
                    let z: f64 = StandardNormal.sample(rng);
                    let x1 = x + b * h + self.sqrt_a * h.sqrt() * T::lit(z);
                    let t1 = if jump_now { next_jump } else { t + h };
                    if x1.abs() >= one {
                        return Ok(done(t1, if x1 > zero { one } else { -one }, false));
                    }
                    if self.scheme.bridge {
                        let two = T::lit(2.0);
                        let s = a * h;
                        let up = (-two * (one - x) * (one - x1) / s).exp();
                        let dn = (-two * (one + x) * (one + x1) / s).exp();
                        let u: f64 = rng.random();
                        let u = T::lit(u);
                        if u < up {
                            return Ok(done(t1, one, false));
                        }
                        if u < up + dn * (one - up) {
                            return Ok(done(t1, -one, false));
                        }
                    }
                    x = x1;
                    t = t1;
                }
                if !jump_now {
                    continue;
                }
            }
            // jump at time t
            let j = p.sample_jump(rng)?;
            x = x + j;
            let e: f64 = Exp1.sample(rng);
            next_jump = t + T::lit(e) / p.rate;
            if x.abs() >= one {
                return Ok(done(t, x, true));
            }
        }
    }
}

/// One first exit of `t` from `(-eps, eps)`, rescaled with exponent `alpha`.
pub fn simulate_exit<T: Real, R: Rng + ?Sized>(
    t: &LevyTriplet<T>,
    eps: T,
    alpha: T,
    scheme: StepScheme,
    rng: &mut R,
) -> Result<HittingRecord<T>> {
    ExitSimulator::new(t, eps, alpha, scheme)?.simulate(rng)
}
