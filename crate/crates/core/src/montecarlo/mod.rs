//! Monte Carlo studies of the limit theorems: exit-law convergence, bias
//! rates, the law of large numbers for `V^ε(f)`, the CLT and the bound in
//! the drift regime.
//!
//! All studies are deterministic in `(config, seed)`. Paths are grouped in
//! fixed-size batches, each with its own random stream, so results do not
//! depend on the worker count. The same streams are reused across the ε
//! grid (common random numbers).

mod exit;
mod observe;
mod report;
pub mod stats;

use serde::{Deserialize, Serialize};

pub use exit::{study_exit_convergence, study_rate, ExitStudyConfig, RateStudyConfig};
pub use observe::{study_clt, study_lln, study_noclt_bound, CltStudyConfig, LlnStudyConfig, NoCltStudyConfig};
pub use report::{config_hash, sha256_hex, Check, Provenance, StudyReport, StudyRow, TestStatistic, WorkSummary};
pub use stats::{fit_loglog_rate, ks_normality, ks_one_sample, ks_two_sample, KsResult, RateFit};

use crate::error::{Error, Result};
use crate::levy_models::{check_h_prime, drift_constraint_gap, LevyTriplet, LimitClassification, LimitKind};
use crate::parallel::Executor;
use crate::real::Real;
use crate::stable_oracles::OvershootFn;

/// Serializable test function `f` of the rescaled increment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FnSpec {
    /// `|x|^{-β} ∧ 1`.
    PowerCap { beta: f64 },
    Constant { value: f64 },
}

impl FnSpec {
    pub fn one() -> Self {
        FnSpec::Constant { value: 1.0 }
    }

    pub fn power_cap(beta: f64) -> Self {
        FnSpec::PowerCap { beta }
    }

    pub fn to_fn<T: Real>(&self) -> OvershootFn<T> {
        match *self {
            FnSpec::PowerCap { beta } => OvershootFn::power_cap(T::lit(beta)),
            FnSpec::Constant { value } => OvershootFn::Constant(T::lit(value)),
        }
    }

    pub fn label(&self) -> String {
        self.to_fn::<f64>().label()
    }
}

/// Default ε grid.
pub fn default_eps_grid() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}

pub(crate) fn executor(workers: Option<usize>) -> Executor {
    match workers {
        Some(w) => Executor::new(w),
        None => Executor::from_env(),
    }
}

pub(crate) fn model_label(t: &LevyTriplet<f64>) -> String {
    format!("{t:?}")
}

/// Checks that an ε grid is nonempty, positive and strictly decreasing.
pub fn validate_eps_grid(eps: &[f64]) -> Result<()> {
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::Parameter("eps grid must be nonempty with positive entries".into()));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Parameter("eps grid must be strictly decreasing".into()));
    }
    Ok(())
}

/// Tolerance on the drift-constraint gap.
pub const DRIFT_CONSTRAINT_TOL: f64 = 1e-6;

/// Whether the regime of Proposition-type rate results `α/2` applies:
/// conditions 3–5 with the Hölder assumption, plus the drift constraint in
/// condition 3. Returns the reason when it does not.
pub(crate) fn stable_rate_hypotheses(t: &LevyTriplet<f64>, cls: &LimitClassification<f64>, theta: f64) -> Result<()> {
    let LimitKind::Stable {
        alpha,
        c_plus,
        c_minus,
        ..
    } = cls.limit
    else {
        return Err(Error::Precondition("limit is not stable".into()));
    };
    let h = check_h_prime(t, alpha, theta);
    if !h.holds {
        return Err(Error::Precondition(format!("Hölder assumption fails: {}", h.reason)));
    }
    if cls.condition == 3 {
        let gap = drift_constraint_gap(t, alpha, c_plus, c_minus)?;
        if gap.abs() > DRIFT_CONSTRAINT_TOL {
            return Err(Error::Precondition(format!("drift constraint fails: gap {gap:e}")));
        }
    }
    Ok(())
}

/// `∫_{|x|≤1} |x| ν(dx) < ∞`.
pub(crate) fn has_fv_jumps(t: &LevyTriplet<f64>) -> Result<bool> {
    if t.jumps.is_zero() {
        return Ok(true);
    }
    t.jumps.small_jump_integral_finite(|x: f64| x.abs(), f64::quad_tol())
}

/// `β` for the drift regime: the configured value or the jump index plus 0.05.
pub(crate) fn fv_beta(t: &LevyTriplet<f64>, beta: Option<f64>) -> Result<f64> {
    let b = match beta {
        Some(b) => b,
        None => match t.jumps.power_index() {
            Some(i) => i + 0.05,
            None => 0.05,
        },
    };
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::Precondition(format!("beta = {b} must lie in (0,1)")));
    }
    if !t.jumps.is_zero() && !t.jumps.small_jump_integral_finite(|x: f64| x.abs().powf(b), f64::quad_tol())? {
        return Err(Error::Precondition(format!("∫|x|^beta ν(dx) diverges near 0 for beta = {b}")));
    }
    Ok(b)
}
