//! Studies on full observation series: LLN sup errors, CLT marginals and the
//! renormalized bound in the drift regime.

use serde::{Deserialize, Serialize};

use super::report::{config_hash, Provenance, StudyReport, StudyRow};
use super::stats::{ks_normality, mean, median_se, variance};
use super::{executor, fv_beta, has_fv_jumps, model_label, stable_rate_hypotheses, validate_eps_grid, FnSpec};
use crate::error::{Error, Result};
use crate::estimators::{normalized_error_with_m, v_epsilon};
use crate::levy_models::{LevyTriplet, LimitClassification};
use crate::simulation::{ObservationConfig, ObservationSimulator, StepScheme, TimeChangeSpec};
use crate::stable_oracles::{covariance_c, m_of_f_estimate, LimitLaw, OracleOptions};

fn oracle_options(workers: Option<usize>) -> OracleOptions {
    OracleOptions {
        executor_workers: workers,
        ..OracleOptions::default()
    }
}

/// `m(f)` for every function, closed form when possible.
fn m_values(law: &LimitLaw<f64>, fs: &[FnSpec], paths: usize, seed: u64, workers: Option<usize>) -> Result<Vec<(f64, f64)>> {
    fs.iter()
        .map(|f| {
            let e = m_of_f_estimate(law, &f.to_fn(), paths, seed, &oracle_options(workers))?;
            Ok((e.value, e.se))
        })
        .collect()
}

fn observation_config(eps: f64, alpha: f64, horizon: f64, dt: f64, scheme: StepScheme) -> ObservationConfig {
    ObservationConfig {
        time_change_dt: dt,
        scheme,
        ..ObservationConfig::new(eps, alpha, horizon)
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// `sup_{t≤h} |ε^a V^ε(f)_t − m(f) S_t|` for each `f`, one replicate per entry.
#[allow(clippy::too_many_arguments)]
fn sup_errors(
    t: &LevyTriplet<f64>,
    tc: &TimeChangeSpec,
    cfg: ObservationConfig,
    scale_alpha: f64,
    fs: &[FnSpec],
    m: &[f64],
    n_reps: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<Vec<f64>>> {
    let sim = ObservationSimulator::new(t, tc, cfg)?;
    let ea = cfg.eps.powf(scale_alpha);
    let funcs: Vec<_> = fs.iter().map(|f| f.to_fn::<f64>()).collect();
    executor(workers).try_map(n_reps, |r| {
        let (series, path) = sim.run_full(seed, r as u64)?;
        Ok(funcs
            .iter()
            .zip(m)
            .map(|(f, &mj)| {
                v_epsilon(&series, f)
                    .scaled(ea)
                    .sup_deviation(|s| mj * path.eval(s), cfg.horizon)
            })
            .collect())
    })
}

/// Settings of [`study_lln`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlnStudyConfig {
    pub eps_grid: Vec<f64>,
    pub n_reps: usize,
    pub seed: u64,
    pub horizon: f64,
    pub f_list: Vec<FnSpec>,
    pub time_change: TimeChangeSpec,
    pub time_change_dt: f64,
    pub scheme: StepScheme,
    /// Oracle paths when `m(f)` has no closed form.
    pub oracle_paths: usize,
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl Default for LlnStudyConfig {
    fn default() -> Self {
        Self {
            eps_grid: vec![0.2, 0.1, 0.05],
            n_reps: 50,
            seed: 0,
            horizon: 1.0,
            f_list: vec![FnSpec::one(), FnSpec::power_cap(2.0)],
            time_change: TimeChangeSpec::Linear { sigma: 1.0 },
            time_change_dt: 1e-4,
            scheme: StepScheme::default(),
            oracle_paths: 100_000,
            workers: None,
        }
    }
}

fn validate_common(eps: &[f64], n_reps: usize, horizon: f64, tc: &TimeChangeSpec, scheme: &StepScheme) -> Result<()> {
    validate_eps_grid(eps)?;
    if n_reps < 2 || !(horizon > 0.0) {
        return Err(Error::Parameter("need n_reps >= 2 and a positive horizon".into()));
    }
    tc.validate()?;
    scheme.validate()
}

/// Sup errors of `ε^α V^ε(f) - m(f)S` on `[0, horizon]` along the grid.
pub fn study_lln(t: &LevyTriplet<f64>, cfg: &LlnStudyConfig) -> Result<StudyReport> {
    validate_common(&cfg.eps_grid, cfg.n_reps, cfg.horizon, &cfg.time_change, &cfg.scheme)?;
    if cfg.f_list.is_empty() {
        return Err(Error::Parameter("f_list must be nonempty".into()));
    }
    let cls = t.classify()?;
    let law = LimitLaw::new(cls);
    let model = model_label(t);
    let mut rep = StudyReport::new(
        "lln",
        model.clone(),
        cfg.eps_grid.clone(),
        Provenance::new(cfg.seed, config_hash(cfg, &model)),
    );
    rep.classification = Some(cls);
    let m = m_values(&law, &cfg.f_list, cfg.oracle_paths, cfg.seed, cfg.workers)?;
    let m_point: Vec<f64> = m.iter().map(|p| p.0).collect();
    for (f, (mv, mse)) in cfg.f_list.iter().zip(&m) {
        rep.stat(format!("m({})", f.label()), None, *mv, None);
        if *mse > 0.0 {
            rep.stat(format!("m_se({})", f.label()), None, *mse, None);
        }
    }

    let mut medians = vec![Vec::new(); cfg.f_list.len()];
    for &eps in &cfg.eps_grid {
        let oc = observation_config(eps, cls.alpha, cfg.horizon, cfg.time_change_dt, cfg.scheme);
        let errs = sup_errors(t, &cfg.time_change, oc, cls.alpha, &cfg.f_list, &m_point, cfg.n_reps, cfg.seed, cfg.workers)?;
        rep.work.paths_per_eps.push(cfg.n_reps);
        for (j, f) in cfg.f_list.iter().enumerate() {
            let col: Vec<f64> = errs.iter().map(|e| e[j]).collect();
            let (med, se) = median_se(&col);
            medians[j].push(med);
            rep.rows.push(StudyRow {
                eps,
                quantity: format!("median_sup_err:{}", f.label()),
                estimate: med,
                se,
                oracle: Some(0.0),
                oracle_se: Some(0.0),
                n: cfg.n_reps,
            });
        }
    }
    for (f, med) in cfg.f_list.iter().zip(&medians) {
        rep.check(
            format!("median_decreasing:{}", f.label()),
            strictly_decreasing(med),
            true,
            format!("medians along the grid: {med:?}"),
        );
    }
    rep.finish();
    Ok(rep)
}

/// Settings of [`study_clt`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CltStudyConfig {
    pub eps: f64,
    pub n_reps: usize,
    pub seed: u64,
    pub horizon: f64,
    pub f_list: Vec<FnSpec>,
    pub time_change: TimeChangeSpec,
    pub time_change_dt: f64,
    pub scheme: StepScheme,
    /// Paths of the covariance oracle.
    pub oracle_paths: usize,
    /// Hölder exponent for the stable-regime hypotheses.
    pub theta: f64,
    /// Accepted relative deviation of each variance ratio from 1.
    pub variance_band: f64,
    /// Minimum KS normality p-value.
    pub ks_level: f64,
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl Default for CltStudyConfig {
    fn default() -> Self {
        Self {
            eps: 0.02,
            n_reps: 2000,
            seed: 0,
            horizon: 1.0,
            f_list: vec![FnSpec::one()],
            time_change: TimeChangeSpec::Linear { sigma: 1.0 },
            time_change_dt: 1e-4,
            scheme: StepScheme::default(),
            oracle_paths: 100_000,
            theta: 1.0,
            variance_band: 0.1,
            ks_level: 0.01,
            workers: None,
        }
    }
}

/// Refuses models outside the CLT's hypotheses.
pub(crate) fn clt_hypotheses(t: &LevyTriplet<f64>, cls: &LimitClassification<f64>, theta: f64) -> Result<()> {
    match cls.condition {
        1 => {
            if has_fv_jumps(t)? {
                Ok(())
            } else {
                Err(Error::Precondition(
                    "Brownian regime CLT needs finite-variation jumps".into(),
                ))
            }
        }
        2 => Err(Error::Precondition(
            "drift regime: the covariance vanishes and no CLT holds; use the no-CLT bound study".into(),
        )),
        _ => stable_rate_hypotheses(t, cls, theta),
    }
}

/// Fixed-time marginal of `R^ε_{horizon}` against `B ∘ S`.
pub fn study_clt(t: &LevyTriplet<f64>, cfg: &CltStudyConfig) -> Result<StudyReport> {
    validate_common(&[cfg.eps], cfg.n_reps, cfg.horizon, &cfg.time_change, &cfg.scheme)?;
    if cfg.f_list.is_empty() || !(cfg.variance_band > 0.0) || !(cfg.oracle_paths >= 1000) {
        return Err(Error::Parameter(
            "need a nonempty f_list, a positive variance band and at least 1000 oracle paths".into(),
        ));
    }
    let cls = t.classify()?;
    clt_hypotheses(t, &cls, cfg.theta)?;
    let law = LimitLaw::new(cls);
    let model = model_label(t);
    let mut rep = StudyReport::new(
        "clt",
        model.clone(),
        vec![cfg.eps],
        Provenance::new(cfg.seed, config_hash(cfg, &model)),
    );
    rep.classification = Some(cls);
    let sim = ObservationSimulator::new(
        t,
        &cfg.time_change,
        observation_config(cfg.eps, cls.alpha, cfg.horizon, cfg.time_change_dt, cfg.scheme),
    )?;
    let funcs: Vec<_> = cfg.f_list.iter().map(|f| f.to_fn::<f64>()).collect();
    let oracle = covariance_c(&law, &funcs, cfg.oracle_paths, cfg.seed, &oracle_options(cfg.workers))?;
    rep.work.oracle_paths = oracle.n_paths;
    let d = funcs.len();

    let draws = executor(cfg.workers).try_map(cfg.n_reps, |r| {
        let (series, path) = sim.run_full(cfg.seed, r as u64)?;
        let ne = normalized_error_with_m(&series, cls.alpha, &funcs, oracle.m.clone())?;
        let s_h = path.eval(cfg.horizon);
        Ok::<_, Error>((ne.at(cfg.horizon, s_h), s_h))
    })?;
    rep.work.paths_per_eps.push(cfg.n_reps);
    let s_mean = mean(&draws.iter().map(|p| p.1).collect::<Vec<_>>());
    let scale = s_mean / oracle.exit_time;
    let cols: Vec<Vec<f64>> = (0..d).map(|j| draws.iter().map(|p| p.0[j]).collect()).collect();
    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let n = cfg.n_reps as f64;

    for j in 0..d {
        for k in j..d {
            let prods: Vec<f64> = cols[j]
                .iter()
                .zip(&cols[k])
                .map(|(a, b)| (a - means[j]) * (b - means[k]))
                .collect();
            let cov = mean(&prods) * n / (n - 1.0);
            let cov_se = (variance(&prods) / n).sqrt();
            let label = if j == k {
                format!("var_R:{}", cfg.f_list[j].label())
            } else {
                format!("cov_R:{},{}", cfg.f_list[j].label(), cfg.f_list[k].label())
            };
            rep.rows.push(StudyRow {
                eps: cfg.eps,
                quantity: label,
                estimate: cov,
                se: cov_se,
                oracle: Some(scale * oracle.c[j][k]),
                oracle_se: Some(scale * oracle.se[j][k]),
                n: cfg.n_reps,
            });
        }
    }
    for (j, f) in cfg.f_list.iter().enumerate() {
        let name = f.label();
        let var = variance(&cols[j]);
        let predicted = scale * oracle.c[j][j];
        let ratio = var / predicted;
        rep.stat(format!("variance_ratio:{name}"), Some(cfg.eps), ratio, None);
        rep.check(
            format!("variance_ratio:{name}"),
            (ratio - 1.0).abs() <= cfg.variance_band,
            true,
            format!("Var(R) = {var} vs E[S]/E[tau*]·C = {predicted}"),
        );
        rep.rows.push(StudyRow {
            eps: cfg.eps,
            quantity: format!("mean_R:{name}"),
            estimate: means[j],
            se: (var / n).sqrt(),
            oracle: Some(0.0),
            oracle_se: Some(0.0),
            n: cfg.n_reps,
        });
        match ks_normality(&cols[j]) {
            Ok(ks) => {
                rep.stat(format!("ks_normality:{name}"), Some(cfg.eps), ks.statistic, Some(ks.p_value));
                rep.check(
                    format!("ks_normality:{name}"),
                    ks.p_value > cfg.ks_level,
                    true,
                    format!("KS p = {} against level {}", ks.p_value, cfg.ks_level),
                );
            }
            Err(_) => rep.check(format!("ks_normality:{name}"), false, true, "degenerate sample"),
        }
    }
    if d > 1 {
        let mut emp = nalgebra::DMatrix::<f64>::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                let p: Vec<f64> = cols[j].iter().zip(&cols[k]).map(|(a, b)| (a - means[j]) * (b - means[k])).collect();
                emp[(j, k)] = mean(&p);
            }
        }
        let trace = emp.trace();
        let min_ev = emp.symmetric_eigenvalues().min();
        rep.stat("min_eigenvalue_over_trace", Some(cfg.eps), min_ev / trace, None);
    }
    rep.finish();
    Ok(rep)
}

/// Settings of [`study_noclt_bound`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoCltStudyConfig {
    pub eps_grid: Vec<f64>,
    pub n_reps: usize,
    pub seed: u64,
    pub horizon: f64,
    pub f_list: Vec<FnSpec>,
    pub time_change: TimeChangeSpec,
    pub time_change_dt: f64,
    pub scheme: StepScheme,
    /// `β` with `∫_{|x|≤1}|x|^β ν(dx) < ∞`; default jump index + 0.05.
    pub beta: Option<f64>,
    pub deltas: Vec<f64>,
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl Default for NoCltStudyConfig {
    fn default() -> Self {
        Self {
            eps_grid: vec![0.05, 0.025, 0.0125, 0.00625],
            n_reps: 1000,
            seed: 0,
            horizon: 1.0,
            f_list: vec![FnSpec::one()],
            time_change: TimeChangeSpec::Linear { sigma: 1.0 },
            time_change_dt: 1e-4,
            scheme: StepScheme::default(),
            beta: None,
            deltas: vec![0.05, 0.1],
            workers: None,
        }
    }
}

/// Renormalized sup errors `ε^{-r} sup|ε V^ε(f) - m(f) S|`, `r = (1-β-δ) ∧ 1/2`,
/// in the drift regime.
pub fn study_noclt_bound(t: &LevyTriplet<f64>, cfg: &NoCltStudyConfig) -> Result<StudyReport> {
    validate_common(&cfg.eps_grid, cfg.n_reps, cfg.horizon, &cfg.time_change, &cfg.scheme)?;
    if cfg.f_list.is_empty() || cfg.deltas.is_empty() || cfg.deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Parameter("need a nonempty f_list and positive deltas".into()));
    }
    let cls = t.classify()?;
    if cls.condition != 2 {
        return Err(Error::Precondition(format!(
            "the no-CLT bound needs the finite-variation drift regime, got condition {}",
            cls.condition
        )));
    }
    let beta = fv_beta(t, cfg.beta)?;
    let law = LimitLaw::new(cls);
    let model = model_label(t);
    let mut rep = StudyReport::new(
        "noclt_bound",
        model.clone(),
        cfg.eps_grid.clone(),
        Provenance::new(cfg.seed, config_hash(cfg, &model)),
    );
    rep.classification = Some(cls);
    rep.stat("beta", None, beta, None);
    let m: Vec<f64> = m_values(&law, &cfg.f_list, 1000, cfg.seed, cfg.workers)?
        .into_iter()
        .map(|p| p.0)
        .collect();

    let mut raw = Vec::new();
    for &eps in &cfg.eps_grid {
        let oc = observation_config(eps, 1.0, cfg.horizon, cfg.time_change_dt, cfg.scheme);
        raw.push(sup_errors(t, &cfg.time_change, oc, 1.0, &cfg.f_list, &m, cfg.n_reps, cfg.seed, cfg.workers)?);
        rep.work.paths_per_eps.push(cfg.n_reps);
    }
    let mut verdicts = Vec::new();
    for &delta in &cfg.deltas {
        let r = (1.0 - beta - delta).min(0.5);
        for (j, f) in cfg.f_list.iter().enumerate() {
            let mut med = Vec::new();
            for (&eps, errs) in cfg.eps_grid.iter().zip(&raw) {
                let col: Vec<f64> = errs.iter().map(|e| e[j] * eps.powf(-r)).collect();
                let (mv, se) = median_se(&col);
                med.push(mv);
                rep.rows.push(StudyRow {
                    eps,
                    quantity: format!("median_renorm_err:{}:delta={delta}", f.label()),
                    estimate: mv,
                    se,
                    oracle: Some(0.0),
                    oracle_se: Some(0.0),
                    n: cfg.n_reps,
                });
            }
            let ok = strictly_decreasing(&med);
            verdicts.push(ok);
            rep.check(
                format!("median_decreasing:{}:delta={delta}", f.label()),
                ok,
                true,
                format!("exponent r = {r}; medians {med:?}"),
            );
        }
    }
    let stable = verdicts.windows(2).all(|w| w[0] == w[1]);
    rep.check("delta_stable", stable, true, format!("verdicts across deltas: {verdicts:?}"));
    rep.finish();
    Ok(rep)
}
