//! Characteristic triplets, the model catalogue, ε-rescaling and the
//! classification into the five small-scale limit regimes.

mod classify;
mod jumps;

pub use classify::{check_h_prime, classify, drift_constraint_gap, g_limits, GLimits, HPrimeVerdict, LimitClassification, LimitKind};
pub use jumps::{JumpSpec, LevyMeasure, PowerDensity, Side};

use crate::error::{param, Error, Result};
use crate::real::Real;

/// Truncation function `h(x) = -1 ∨ x ∧ 1`.
#[inline]
pub fn truncation<T: Real>(x: T) -> T {
    x.max(-T::one()).min(T::one())
}

/// Absolute threshold below which a computed drift is treated as zero.
pub const ZERO_DRIFT_TOL: f64 = 1e-8;

/// Lévy triplet `(A, ν, γ)` relative to the truncation `h`.
#[derive(Clone, Debug)]
pub struct LevyTriplet<T: Real> {
    pub a: T,
    pub gamma: T,
    pub jumps: LevyMeasure<T>,
}

/// How the drift of a model is specified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DriftSpec<T> {
    /// `γ` relative to the truncation `h`.
    Truncated(T),
    /// `γ₀ = γ - ∫h dν`, the drift of a finite-variation process.
    FiniteVariation(T),
    /// The drift that makes a stable jump part strictly stable.
    StrictlyStable,
}

/// Model description from which a triplet is built.
#[derive(Clone, Debug)]
pub struct LevyModel<T: Real> {
    pub diffusion: T,
    pub drift: DriftSpec<T>,
    pub jumps: JumpSpec<T>,
}

impl<T: Real> LevyModel<T> {
    pub fn new(diffusion: T, drift: DriftSpec<T>, jumps: JumpSpec<T>) -> Self {
        Self {
            diffusion,
            drift,
            jumps,
        }
    }

    pub fn brownian(a: T, gamma: T) -> Self {
        Self::new(a, DriftSpec::Truncated(gamma), JumpSpec::None)
    }

    pub fn pure_drift(gamma0: T) -> Self {
        Self::new(T::zero(), DriftSpec::Truncated(gamma0), JumpSpec::None)
    }

    /// CGMY with zero truncated drift `γ = 0`.
    pub fn cgmy(c: T, lambda_plus: T, lambda_minus: T, alpha: T) -> Self {
        Self::new(
            T::zero(),
            DriftSpec::Truncated(T::zero()),
            JumpSpec::Cgmy {
                c,
                lambda_plus,
                lambda_minus,
                alpha,
            },
        )
    }

    /// Strictly stable process.
    pub fn stable(alpha: T, c_plus: T, c_minus: T) -> Self {
        Self::new(
            T::zero(),
            DriftSpec::StrictlyStable,
            JumpSpec::Stable {
                alpha,
                c_plus,
                c_minus,
            },
        )
    }

    pub fn with_diffusion(mut self, a: T) -> Self {
        self.diffusion = a;
        self
    }

    pub fn with_drift(mut self, drift: DriftSpec<T>) -> Self {
        self.drift = drift;
        self
    }

    pub fn to_triplet(&self) -> Result<LevyTriplet<T>> {
        to_triplet(self)
    }
}

/// Builds the triplet of a model, validating parameters.
pub fn to_triplet<T: Real>(model: &LevyModel<T>) -> Result<LevyTriplet<T>> {
    if !(model.diffusion >= T::zero()) || !model.diffusion.is_finite() {
        return Err(param(format!("diffusion coefficient must be >= 0, got {}", model.diffusion)));
    }
    model.jumps.validate()?;
    let jumps = LevyMeasure::new(model.jumps.clone());
    let tol = T::quad_tol();
    let gamma = match model.drift {
        DriftSpec::Truncated(g) => g,
        DriftSpec::FiniteVariation(g0) => {
            if !jumps.small_jump_integral_finite(|x: T| x.abs(), tol)? {
                return Err(Error::InfiniteVariation(
                    "a finite-variation drift needs ∫_{|x|≤1}|x|ν(dx) < ∞".into(),
                ));
            }
            g0 + jumps.integrate_abs(truncation, T::zero(), T::infinity(), &[], tol)?
        }
        DriftSpec::StrictlyStable => strictly_stable_gamma(&model.jumps)?,
    };
    if !gamma.is_finite() {
        return Err(param("drift must be finite"));
    }
    Ok(LevyTriplet {
        a: model.diffusion,
        gamma,
        jumps,
    })
}

/// `γ` (relative to `h`) of the strictly stable process with the given jump part.
pub fn strictly_stable_gamma<T: Real>(jumps: &JumpSpec<T>) -> Result<T> {
    match jumps {
        JumpSpec::None => Ok(T::zero()),
        JumpSpec::Stable {
            alpha,
            c_plus,
            c_minus,
        } => stable_limit_gamma(*alpha, *c_plus, *c_minus),
        _ => Err(param("a strictly stable drift needs a stable or empty jump part")),
    }
}

/// Drift relative to `h` of the strictly `α`-stable process with Lévy density
/// `c±/|x|^{1+α}`.
pub fn stable_limit_gamma<T: Real>(alpha: T, c_plus: T, c_minus: T) -> Result<T> {
    let one = T::one();
    let d = c_plus - c_minus;
    if alpha == one {
        if (c_plus - c_minus).abs() > T::lit(1e-12) * (c_plus + c_minus) {
            return Err(param("a 1-stable process is strictly stable only when c_plus = c_minus"));
        }
        Ok(T::zero())
    } else if alpha > one {
        Ok(-d / (alpha * (alpha - one)))
    } else {
        Ok(d / (alpha * (one - alpha)))
    }
}

impl<T: Real> LevyTriplet<T> {
    pub fn new(a: T, gamma: T, jumps: JumpSpec<T>) -> Result<Self> {
        to_triplet(&LevyModel::new(a, DriftSpec::Truncated(gamma), jumps))
    }

    pub fn density(&self, x: T) -> T {
        self.jumps.density(x)
    }

    pub fn rescale(&self, eps: T, alpha: T) -> Result<Self> {
        rescale(self, eps, alpha)
    }

    pub fn classify(&self) -> Result<LimitClassification<T>> {
        classify(self)
    }

    pub fn drift_gamma0(&self) -> Result<T> {
        drift_gamma0(self)
    }

    /// `∫ (1 ∧ x²) ν(dx)`; finite for every valid measure.
    pub fn integrability_mass(&self) -> Result<T> {
        self.jumps
            .integrate_abs(|x: T| (x * x).min(T::one()), T::zero(), T::infinity(), &[], T::quad_tol())
    }

    /// True when `∫_{|x|≤1} |x| ν(dx) < ∞`.
    pub fn has_finite_variation(&self) -> Result<bool> {
        if self.a > T::zero() {
            return Ok(false);
        }
        self.jumps.small_jump_integral_finite(|x: T| x.abs(), T::quad_tol())
    }
}

/// Triplet of `X^ε_t = X_{ε^α t}/ε`.
pub fn rescale<T: Real>(t: &LevyTriplet<T>, eps: T, alpha: T) -> Result<LevyTriplet<T>> {
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(param(format!("eps must be positive, got {eps}")));
    }
    if !(alpha > T::zero() && alpha <= T::lit(2.0)) {
        return Err(param(format!("alpha must lie in (0,2], got {alpha}")));
    }
    let one = T::one();
    let (lo, hi) = if eps < one { (eps, one) } else { (one, eps) };
    // ε h(x/ε) - h(x) vanishes for |x| ≤ lo and is (ε - 1) sgn x beyond hi.
    let corr = t.jumps.integrate_abs(
        |x: T| x.max(-eps).min(eps) - truncation(x),
        lo,
        T::infinity(),
        &[hi],
        T::quad_tol(),
    )?;
    Ok(LevyTriplet {
        a: t.a * eps.powf(alpha - T::lit(2.0)),
        gamma: eps.powf(alpha - one) * (t.gamma + corr),
        jumps: t.jumps.scaled(eps, alpha),
    })
}

/// `γ₀ = γ - ∫ h dν` of a finite-variation triplet.
pub fn drift_gamma0<T: Real>(t: &LevyTriplet<T>) -> Result<T> {
    let tol = T::quad_tol();
    if !t.jumps.small_jump_integral_finite(|x: T| x.abs(), tol)? {
        return Err(Error::InfiniteVariation(
            "small-jump first moment ∫_{|x|≤1}|x|ν(dx) diverges".into(),
        ));
    }
    let ih = t.jumps.integrate_abs(truncation, T::zero(), T::infinity(), &[], tol)?;
    Ok(t.gamma - ih)
}
