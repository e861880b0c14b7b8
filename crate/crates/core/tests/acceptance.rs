//! Acceptance criteria, one line each: `criterion N PASS|FAIL title: detail`.
//! Tolerances, seeds and runtime limits are pinned below.

use std::time::{Duration, Instant};

use levyhit::estimators::estimate_bg_index;
use levyhit::levy_models::{DriftSpec, JumpSpec, LevyModel};
use levyhit::montecarlo::{
    study_clt, study_exit_convergence, study_lln, study_noclt_bound, study_rate, CltStudyConfig, ExitStudyConfig,
    LlnStudyConfig, NoCltStudyConfig, RateStudyConfig, StudyReport,
};
use levyhit::parallel::Executor;
use levyhit::rng::{stream, Purpose};
use levyhit::simulation::{ExitSimulator, ObservationConfig, ObservationSimulator, StepScheme, TimeChangeSpec};
use levyhit::stable_oracles::{
    mc_exit_moments, overshoot_quadrature, reference_exit_time, LimitLaw, OracleOptions, OvershootFn,
};
use levyhit::Error;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn failed_checks(r: &StudyReport) -> Vec<String> {
    r.checks.iter().filter(|c| c.required && !c.passed).map(|c| c.name.clone()).collect()
}

fn rows(r: &StudyReport, q: &str) -> String {
    r.rows_for(q).map(|x| format!("{:.4}", x.estimate)).collect::<Vec<_>>().join("/")
}

fn cgmy15() -> levyhit::Triplet {
    LevyModel::cgmy(1.0, 1.0, 1.0, 1.5).to_triplet().unwrap()
}

const ALPHAS: [f64; 4] = [0.5, 1.0, 1.5, 1.9];

fn c1_oracle_identities() -> Outcome {
    let etau = reference_exit_time(1.0f64);
    let mut worst_mass = 0.0f64;
    let mut worst_f2 = 0.0f64;
    for a in ALPHAS {
        let l = LimitLaw::reference_stable(a).unwrap();
        let mass = overshoot_quadrature(&l, &OvershootFn::one()).unwrap();
        let f2 = overshoot_quadrature(&l, &OvershootFn::power_cap(2.0)).unwrap();
        worst_mass = worst_mass.max((mass - 1.0).abs());
        worst_f2 = worst_f2.max((f2 - a / 2.0).abs());
    }
    let ok = (etau - 1.0).abs() <= 4.0 * f64::EPSILON && worst_mass <= 1e-10 && worst_f2 <= 1e-8;
    outcome(
        ok,
        format!("E tau*(1) - 1 = {:.1e}, max |mass - 1| = {worst_mass:.1e}, max |E f2 - a/2| = {worst_f2:.1e}", etau - 1.0),
    )
}

fn c2_limit_mc() -> Outcome {
    let l = LimitLaw::reference_stable(1.0f64).unwrap();
    let e = mc_exit_moments(&l, 1, &OvershootFn::one(), 100_000, 2, &OracleOptions::default()).unwrap();
    let z = (e.value - 1.0) / e.se;
    outcome(z.abs() <= 3.0, format!("E tau* = {:.5} ± {:.5} (z = {z:.2})", e.value, e.se))
}

fn c3_overshoot() -> Outcome {
    let t = LevyModel::new(
        1.0,
        DriftSpec::Truncated(0.0),
        JumpSpec::Merton {
            rate: 1.0,
            mean: 0.0,
            sd: 0.5,
        },
    )
    .to_triplet()
    .unwrap();
    let sim: ExitSimulator<f64> = ExitSimulator::new(&t, 0.01, 2.0, StepScheme::default()).unwrap();
    let n = 10_000;
    let batch = 500;
    let parts = Executor::from_env()
        .try_map(n / batch, |b| {
            let mut rng = stream(3, Purpose::Levy, b as u64);
            (0..batch)
                .map(|_| sim.simulate(&mut rng).map(|r| r.exit_value.abs()))
                .collect::<Result<Vec<_>, Error>>()
        })
        .unwrap();
    let v: Vec<f64> = parts.into_iter().flatten().collect();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    outcome((mean - 1.0).abs() <= 0.02, format!("mean |X_tau| = {mean:.5} over {} exits", v.len()))
}

fn c4_exit_law() -> Outcome {
    let cfg = ExitStudyConfig {
        eps_grid: vec![0.2, 0.1, 0.05],
        n_paths: 10_000,
        k_list: vec![1],
        f_list: vec![levyhit::montecarlo::FnSpec::one()],
        oracle_paths: 20_000,
        seed: 1,
        ..Default::default()
    };
    let r = study_exit_convergence(&cgmy15(), &cfg).unwrap();
    let ks: Vec<String> = r
        .statistics
        .iter()
        .filter(|s| s.name == "ks_tau")
        .map(|s| format!("{:.4}", s.value))
        .collect();
    let ok = r.find_check("ks_monotone").is_some_and(|c| c.passed);
    outcome(ok, format!("KS distance over eps 0.2/0.1/0.05: {}", ks.join("/")))
}

fn c5_lln() -> Outcome {
    let cfg = LlnStudyConfig {
        seed: 1,
        ..Default::default()
    };
    let r = study_lln(&cgmy15(), &cfg).unwrap();
    let ok = r.checks.iter().filter(|c| c.name.starts_with("median_decreasing")).count() == 2 && r.passed;
    outcome(
        ok,
        format!(
            "median sup errors f=1: {}, f=pow_cap(2): {}",
            rows(&r, "median_sup_err:const(1)"),
            rows(&r, "median_sup_err:pow_cap(2)")
        ),
    )
}

/// Horizon giving about 5.3·10⁴ crossings at ε = 0.01 for the unit stable law.
const BG_HORIZON: f64 = 12.0;
const BG_REPS: usize = 20;

fn c6_bg_index() -> Outcome {
    let alpha = 1.5;
    let t = LevyModel::stable(alpha, 1.0, 1.0).to_triplet().unwrap();
    let scheme = StepScheme::default().with_cut_ratio(0.01);
    let ex = Executor::from_env();
    let mut mean_abs = Vec::new();
    let mut first = (0.0, 0usize);
    for eps in [0.1, 0.05, 0.01] {
        let mut oc = ObservationConfig::new(eps, alpha, BG_HORIZON);
        oc.scheme = scheme;
        let sim = ObservationSimulator::new(&t, &TimeChangeSpec::Linear { sigma: 1.0 }, oc).unwrap();
        let est = ex
            .try_map(BG_REPS, |r| {
                let s = sim.run(6, r as u64)?;
                Ok::<_, Error>((estimate_bg_index(&s, None)?, s.len()))
            })
            .unwrap();
        mean_abs.push(est.iter().map(|e| (e.0 - alpha).abs()).sum::<f64>() / BG_REPS as f64);
        first = est[0];
    }
    let (a_hat, crossings) = first;
    let shrinking = mean_abs.windows(2).all(|w| w[1] < w[0]);
    let ok = crossings >= 50_000 && (1.45..=1.55).contains(&a_hat) && shrinking;
    outcome(
        ok,
        format!(
            "alpha_hat = {a_hat:.4} from {crossings} crossings at eps 0.01; mean |alpha_hat - 1.5| over eps 0.1/0.05/0.01: {}",
            mean_abs.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>().join("/")
        ),
    )
}

fn c7_rate() -> Outcome {
    let cfg = RateStudyConfig {
        seed: 1,
        n_paths: 40_000,
        max_paths: 640_000,
        scheme: StepScheme::default().with_cut_ratio(0.01),
        ..Default::default()
    };
    let r = study_rate(&cgmy15(), &cfg).unwrap();
    let fit = match r.rate_fit {
        Some(f) => format!("slope {:.3}, CI [{:.3}, {:.3}]", f.slope, f.ci_low, f.ci_high),
        None => "no fit".into(),
    };
    let target = r.rate_target.unwrap_or(f64::NAN);
    outcome(
        r.passed && (target - 0.75).abs() < 1e-12,
        format!("target {target}, {fit}, {} rounds: {}", r.work.escalation_rounds, r.verdict),
    )
}

fn c8_clt() -> Outcome {
    let t = LevyModel::new(
        1.0,
        DriftSpec::Truncated(0.0),
        JumpSpec::Merton {
            rate: 1.0,
            mean: 0.0,
            sd: 0.1,
        },
    )
    .to_triplet()
    .unwrap();
    let cfg = CltStudyConfig {
        seed: 1,
        ..Default::default()
    };
    let r = study_clt(&t, &cfg).unwrap();
    let stat = |prefix: &str| {
        r.statistics
            .iter()
            .filter(|s| s.name.starts_with(prefix))
            .map(|s| (s.value, s.p_value))
            .collect::<Vec<_>>()
    };
    let ratios: Vec<String> = stat("variance_ratio:").iter().map(|v| format!("{:.4}", v.0)).collect();
    let ks: Vec<String> = stat("ks_normality:").iter().filter_map(|v| v.1).map(|p| format!("{p:.3}")).collect();
    let has = |prefix: &str| r.checks.iter().any(|c| c.name.starts_with(prefix) && c.required);
    outcome(
        r.passed && has("variance_ratio:") && has("ks_normality:"),
        format!(
            "Var R / (C11 / E tau*) = {}, KS normality p = {}, failed: {:?}",
            ratios.join("/"),
            ks.join("/"),
            failed_checks(&r)
        ),
    )
}

fn c9_gating() -> Outcome {
    let drift = LevyModel::pure_drift(1.0).to_triplet().unwrap();
    let refused = matches!(study_clt(&drift, &CltStudyConfig::default()), Err(Error::Precondition(_)));
    let t = LevyModel::cgmy(1.0, 1.0, 1.0, 0.5)
        .with_drift(DriftSpec::FiniteVariation(1.0))
        .to_triplet()
        .unwrap();
    let r = study_noclt_bound(&t, &NoCltStudyConfig { seed: 1, ..Default::default() }).unwrap();
    outcome(
        refused && r.passed,
        format!(
            "clt refuses pure drift: {refused}; renormalized medians (delta 0.05): {}, (delta 0.1): {}",
            rows(&r, "median_renorm_err:const(1):delta=0.05"),
            rows(&r, "median_renorm_err:const(1):delta=0.1")
        ),
    )
}

fn c10_determinism() -> Outcome {
    let mut same = true;
    let mut outputs = Vec::new();
    for workers in [1, 8, 1] {
        let exit = ExitStudyConfig {
            eps_grid: vec![0.2, 0.1],
            n_paths: 2_000,
            oracle_paths: 2_000,
            seed: 10,
            workers: Some(workers),
            ..Default::default()
        };
        let lln = LlnStudyConfig {
            n_reps: 8,
            seed: 10,
            workers: Some(workers),
            ..Default::default()
        };
        let a = study_exit_convergence(&cgmy15(), &exit).unwrap();
        let b = study_lln(&cgmy15(), &lln).unwrap();
        outputs.push([a.to_json(), a.to_csv(), b.to_json(), b.to_csv()]);
    }
    for o in &outputs[1..] {
        same &= o == &outputs[0];
    }
    outcome(same, format!("exit and lln reports byte-identical across workers 1, 8, 1: {same}"))
}

type Criterion = (u32, &'static str, fn() -> Outcome, u64);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "oracle identities", c1_oracle_identities, 1),
        (2, "limit-process MC vs closed form", c2_limit_mc, 120),
        (3, "overshoot convergence", c3_overshoot, 300),
        (4, "exit-law convergence", c4_exit_law, 900),
        (5, "law of large numbers", c5_lln, 1200),
        (6, "BG-index estimator", c6_bg_index, 1200),
        (7, "rate study", c7_rate, 1800),
        (8, "central limit theorem", c8_clt, 1800),
        (9, "hypothesis gating", c9_gating, 600),
        (10, "determinism", c10_determinism, 600),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut all = true;
    for (n, title, run, limit) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let t0 = Instant::now();
        let o = run();
        let dt = t0.elapsed();
        let in_time = dt < Duration::from_secs(limit);
        let passed = o.passed && in_time;
        all &= passed;
        println!(
            "criterion {n:>2} {} {title}: {} [{:.1}s, limit {limit}s]",
            if passed { "PASS" } else { "FAIL" },
            o.detail,
            dt.as_secs_f64()
        );
    }
    if !all {
        std::process::exit(1);
    }
}
