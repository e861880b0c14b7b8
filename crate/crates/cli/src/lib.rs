//! Batch driver: configuration parsing, series ingestion and persistence of
//! reports with a manifest.
//!
//! Exit status is 0 on success, 2 on validation errors (bad arguments,
//! configs, inputs or unmet hypotheses) and 3 on numerical failures. Errors
//! are printed to stderr as one JSON line.

pub mod config;
pub mod io;
pub mod manifest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use levyhit::estimators::{estimate_bg_index, estimate_time_change, v_epsilon, AlphaMode, EstimatorSummary, StepFunction};
use levyhit::levy_models::{LimitClassification, LimitKind};
use levyhit::montecarlo::{
    sha256_hex, stats, study_clt, study_exit_convergence, study_lln, study_noclt_bound, study_rate, CltStudyConfig,
    ExitStudyConfig, FnSpec, LlnStudyConfig, NoCltStudyConfig, RateStudyConfig, StudyReport,
};
use levyhit::simulation::{ObservationConfig, ObservationSimulator, TimeChangeSpec};
use levyhit::stable_oracles::{
    covariance_c, expected_exit_time, expected_overshoot_functional, m_of_f_estimate, mc_exit_moments, mc_exit_sample,
    overshoot_density, LimitLaw, OracleOptions, OracleRecord, OvershootFn,
};
use levyhit::{Error, Result};
use serde::Serialize;
use serde_json::json;

use config::{load_model, RunConfig};
use manifest::Artifacts;

#[derive(Debug, Parser)]
#[command(name = "levyhit", version, about = "Barrier-hitting observations of time-changed Lévy processes")]
pub struct Cli {
    /// Worker threads (results do not depend on it); overrides LEVYHIT_WORKERS.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a model into its small-scale limit regime.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a limit-law quantity.
    Oracle(OracleArgs),
    /// Simulate one hitting-time observation series.
    Simulate(RunArgs),
    /// Apply an estimator to a series file.
    Estimate(EstimateArgs),
    /// Exit-law convergence along an ε grid.
    StudyExit(RunArgs),
    /// Bias rate of the mean exit time.
    StudyRate(RunArgs),
    /// Law of large numbers for V^ε(f).
    StudyLln(RunArgs),
    /// Central limit theorem for V^ε(f).
    StudyClt(RunArgs),
    /// Error bound in the drift regime.
    StudyNoclt(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::Oracle(_) => "oracle",
            Command::Simulate(_) => "simulate",
            Command::Estimate(_) => "estimate",
            Command::StudyExit(_) => "study-exit",
            Command::StudyRate(_) => "study-rate",
            Command::StudyLln(_) => "study-lln",
            Command::StudyClt(_) => "study-clt",
            Command::StudyNoclt(_) => "study-noclt",
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// TOML run file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Root seed (overrides `seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write tidy long-format CSV for plotting.
    #[arg(long)]
    pub plot_data: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawArg {
    /// Stable law; without --c-plus/--c-minus the reference normalization with E τ* from the closed form.
    Stable,
    Brownian,
    Drift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// E[τ*].
    ExitTime,
    /// E[f(X*_τ*)].
    Overshoot,
    /// m(f) = E[f(X*_τ*)] / E[τ*].
    M,
    /// Overshoot density at --y.
    Density,
    /// E[τ*^k f(X*_τ*)] by Monte Carlo.
    ExitMoment,
    /// CLT covariance C for the --f list by Monte Carlo.
    Covariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Cms,
    JumpDiffusion,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub law: LawArg,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub c_plus: Option<f64>,
    #[arg(long)]
    pub c_minus: Option<f64>,
    /// Brownian variance per unit time.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long)]
    pub gamma0: Option<f64>,
    #[arg(long, value_enum)]
    pub quantity: Quantity,
    /// Test function: `one`, `const:<v>` or `pow_cap:<beta>`; repeat for covariance.
    #[arg(long = "f")]
    pub f: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long)]
    pub y: Option<f64>,
    /// Monte Carlo paths when no closed form exists.
    #[arg(long, default_value_t = 20_000)]
    pub paths: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Cms)]
    pub method: MethodArg,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateWhat {
    /// α̂ = 2 V(f₂)/V(1).
    BgIndex,
    /// Ŝ = ε^α V(1) E[τ*].
    TimeChange,
    /// V^ε(f).
    VEps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaModeArg {
    True,
    PlugIn,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct EstimateArgs {
    /// Series CSV; the sidecar is the same path with a `.json` extension.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub what: EstimateWhat,
    #[arg(long, default_value = "pow_cap:2")]
    pub f: String,
    /// Model file, needed for the time-change estimator.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AlphaModeArg::True)]
    pub alpha_mode: AlphaModeArg,
    /// Evaluation time (default: the whole series).
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Parses `one`, `const:<v>` / `const(<v>)` and `pow_cap:<beta>` / `pow_cap(<beta>)`.
pub fn parse_fn(s: &str) -> Result<FnSpec> {
    let s = s.trim();
    if s == "one" {
        return Ok(FnSpec::one());
    }
    let (name, arg) = if let Some((n, a)) = s.split_once(':') {
        (n, a)
    } else if let Some(rest) = s.strip_suffix(')') {
        rest.split_once('(').ok_or_else(|| bad_fn(s))?
    } else {
        return Err(bad_fn(s));
    };
    let v: f64 = arg.trim().parse().map_err(|_| bad_fn(s))?;
    match name.trim() {
        "const" => Ok(FnSpec::Constant { value: v }),
        "pow_cap" => Ok(FnSpec::power_cap(v)),
        _ => Err(bad_fn(s)),
    }
}

fn bad_fn(s: &str) -> Error {
    Error::Parameter(format!("unknown test function `{s}` (use one, const:<v> or pow_cap:<beta>)"))
}

/// Runs the CLI and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", json!({"level": "error", "kind": "usage", "message": first, "exit_code": 2}));
            return 2;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!(
                "{}",
                json!({"level": "error", "kind": e.kind(), "message": e.to_string(), "exit_code": code})
            );
            code
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        2
    } else {
        3
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Classify { model, out } => classify(model, out.as_deref()),
        Command::Oracle(a) => oracle(a, cli.workers),
        Command::Estimate(a) => estimate(a),
        Command::Simulate(a) => simulate(a),
        cmd @ (Command::StudyExit(a)
        | Command::StudyRate(a)
        | Command::StudyLln(a)
        | Command::StudyClt(a)
        | Command::StudyNoclt(a)) => study(cmd, a, cli.workers),
    }
}

fn hash_of<S: Serialize>(v: &S) -> String {
    sha256_hex(&serde_json::to_vec(v).expect("serializable arguments"))
}

fn classification_json(c: &LimitClassification<f64>) -> serde_json::Value {
    let (name, c_plus, c_minus) = match c.limit {
        LimitKind::Brownian { .. } => ("brownian", None, None),
        LimitKind::Drift { .. } => ("drift", None, None),
        LimitKind::Stable { c_plus, c_minus, .. } => ("stable", Some(c_plus), Some(c_minus)),
    };
    let alpha = match c.limit {
        LimitKind::Stable { .. } => Some(c.alpha),
        _ => None,
    };
    json!({"condition": c.condition, "alpha": alpha, "c_plus": c_plus, "c_minus": c_minus, "limit": name})
}

fn classify(model: &Path, out: Option<&Path>) -> Result<()> {
    let mc = load_model(model)?;
    let cls = mc.to_triplet()?.classify()?;
    let line = classification_json(&cls).to_string();
    println!("{line}");
    if let Some(dir) = out {
        let mut art = Artifacts::create(dir)?;
        art.write("classification.json", (line + "\n").as_bytes())?;
        art.finish("classify", hash_of(&mc), None)?;
    }
    Ok(())
}

fn oracle_law(a: &OracleArgs) -> Result<LimitLaw<f64>> {
    let law = match a.law {
        LawArg::Stable => {
            let alpha = a
                .alpha
                .ok_or_else(|| Error::Parameter("--alpha is required for a stable law".into()))?;
            match (a.c_plus, a.c_minus) {
                (None, None) => LimitLaw::reference_stable(alpha)?,
                (p, m) => {
                    let p = p.or(m).expect("one constant given");
                    LimitLaw::stable(alpha, p, m.unwrap_or(p))?
                }
            }
        }
        LawArg::Brownian => {
            if !(a.a > 0.0) {
                return Err(Error::Parameter("--a must be positive".into()));
            }
            LimitLaw::brownian(a.a)
        }
        LawArg::Drift => {
            let g = a
                .gamma0
                .ok_or_else(|| Error::Parameter("--gamma0 is required for a drift law".into()))?;
            if g == 0.0 {
                return Err(Error::Parameter("--gamma0 must be nonzero".into()));
            }
            LimitLaw::drift(g)
        }
    };
    match a.tolerance {
        Some(t) => law.with_tolerance(t),
        None => Ok(law),
    }
}

fn oracle(a: &OracleArgs, workers: Option<usize>) -> Result<()> {
    let law = oracle_law(a)?;
    let fs: Vec<FnSpec> = if a.f.is_empty() {
        vec![FnSpec::one()]
    } else {
        a.f.iter().map(|s| parse_fn(s)).collect::<Result<_>>()?
    };
    let f: OvershootFn<f64> = fs[0].to_fn();
    let mut opts = match a.method {
        MethodArg::Cms => OracleOptions::default(),
        MethodArg::JumpDiffusion => OracleOptions::alternative(),
    };
    opts.executor_workers = workers;
    let seed = || {
        a.seed
            .ok_or_else(|| Error::Parameter("--seed is mandatory when the quantity needs Monte Carlo".into()))
    };
    let need_mc = |r: Result<f64>| -> Result<Option<f64>> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(Error::UnsupportedLaw(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let q = match a.quantity {
        Quantity::ExitTime => "exit-time",
        Quantity::Overshoot => "overshoot",
        Quantity::M => "m",
        Quantity::Density => "density",
        Quantity::ExitMoment => "exit-moment",
        Quantity::Covariance => "covariance",
    };
    let label = format!("{q}:{}", f.label());
    let line = match a.quantity {
        Quantity::ExitTime => match need_mc(expected_exit_time(&law))? {
            Some(v) => OracleRecord::exact(&law, q, v).to_json(),
            None => {
                let s = seed()?;
                let e = mc_exit_moments(&law, 1, &OvershootFn::one(), a.paths, s, &opts)?;
                OracleRecord::monte_carlo(&law, q, e, a.paths, s).to_json()
            }
        },
        Quantity::Overshoot => match need_mc(expected_overshoot_functional(&law, &f))? {
            Some(v) => OracleRecord::exact(&law, &label, v).to_json(),
            None => {
                let s = seed()?;
                let ys: Vec<f64> = mc_exit_sample(&law, a.paths, s, &opts)?.iter().map(|p| f.eval(p.1)).collect();
                let (value, se) = stats::mean_se(&ys);
                OracleRecord::monte_carlo(&law, &label, levyhit::stable_oracles::Estimate { value, se }, a.paths, s)
                    .to_json()
            }
        },
        Quantity::M => {
            let s = a.seed.unwrap_or(0);
            let e = m_of_f_estimate(&law, &f, a.paths, s, &opts)?;
            if e.se == 0.0 {
                OracleRecord::exact(&law, &label, e.value).to_json()
            } else {
                OracleRecord::monte_carlo(&law, &label, e, a.paths, seed()?).to_json()
            }
        }
        Quantity::Density => {
            let y = a.y.ok_or_else(|| Error::Parameter("--y is required for the density".into()))?;
            OracleRecord::exact(&law, &format!("density:{y}"), overshoot_density(&law, y)?).to_json()
        }
        Quantity::ExitMoment => {
            let s = seed()?;
            let e = mc_exit_moments(&law, a.k, &f, a.paths, s, &opts)?;
            OracleRecord::monte_carlo(&law, &format!("tau^{}*{}", a.k, f.label()), e, a.paths, s).to_json()
        }
        Quantity::Covariance => {
            let s = seed()?;
            let fns: Vec<OvershootFn<f64>> = fs.iter().map(|f| f.to_fn()).collect();
            let c = covariance_c(&law, &fns, a.paths, s, &opts)?;
            serde_json::to_string(&json!({"law": law.label(), "quantity": q, "seed": s, "estimate": c}))
                .expect("covariance serialization")
        }
    };
    println!("{line}");
    if let Some(dir) = &a.out {
        let mut art = Artifacts::create(dir)?;
        art.write("oracle.json", (line + "\n").as_bytes())?;
        art.finish("oracle", hash_of(a), a.seed)?;
    }
    Ok(())
}

fn running_bg_index(s: &levyhit::simulation::ObservationSeries<f64>) -> Result<StepFunction<f64>> {
    let n = v_epsilon(s, &OvershootFn::one());
    let f2 = v_epsilon(s, &OvershootFn::power_cap(2.0));
    let vals = n.values().iter().zip(f2.values()).map(|(c, v)| 2.0 * v / c).collect();
    StepFunction::new(n.times().to_vec(), vals)
}

fn estimate(a: &EstimateArgs) -> Result<()> {
    let s = io::ingest_series(&a.input)?;
    let t_eval = a.horizon.unwrap_or(f64::INFINITY);
    let summary = EstimatorSummary::of(&s);
    let (path, record) = match a.what {
        EstimateWhat::BgIndex => {
            let v = estimate_bg_index(&s, a.horizon)?;
            (running_bg_index(&s)?, json!({"what": "bg-index", "value": v, "summary": summary}))
        }
        EstimateWhat::VEps => {
            let f: OvershootFn<f64> = parse_fn(&a.f)?.to_fn();
            let p = v_epsilon(&s, &f);
            let v = p.eval(t_eval);
            (p, json!({"what": "v-eps", "f": f.label(), "value": v, "summary": summary}))
        }
        EstimateWhat::TimeChange => {
            let m = a
                .model
                .as_ref()
                .ok_or_else(|| Error::Parameter("--model is required for the time-change estimator".into()))?;
            let cls = load_model(m)?.to_triplet()?.classify()?;
            let mode = match a.alpha_mode {
                AlphaModeArg::True => AlphaMode::True,
                AlphaModeArg::PlugIn => AlphaMode::PlugIn,
            };
            let e = estimate_time_change(&s, &cls, mode)?;
            let v = e.path.eval(t_eval);
            let rec = json!({
                "what": "time-change",
                "value": v,
                "alpha_used": e.alpha_used,
                "heuristic": e.heuristic,
                "summary": summary
            });
            (e.path, rec)
        }
    };
    let line = record.to_string();
    println!("{line}");
    if let Some(dir) = &a.out {
        let mut art = Artifacts::create(dir)?;
        art.write("estimate.csv", io::step_csv(&path).as_bytes())?;
        art.write("summary.json", (serde_json::to_string_pretty(&record).expect("summary") + "\n").as_bytes())?;
        art.finish("estimate", hash_of(a), None)?;
    }
    Ok(())
}

/// Loads the run file, applies flag overrides and checks the command key.
fn resolve(cmd: &str, a: &RunArgs) -> Result<(RunConfig, Option<PathBuf>)> {
    let mut rc = RunConfig::load(&a.config)?;
    if let Some(c) = &rc.command {
        if c != cmd {
            return Err(Error::Parameter(format!("config is for `{c}`, not `{cmd}`")));
        }
    }
    if a.seed.is_some() {
        rc.seed = a.seed;
    }
    rc.require_seed()?;
    let out = a.out.clone().or_else(|| rc.output_dir.clone());
    rc.output_dir = None;
    rc.command = Some(cmd.to_string());
    Ok((rc, out))
}

fn config_text(rc: &RunConfig) -> String {
    toml::to_string(rc).expect("config serialization")
}

fn simulate(a: &RunArgs) -> Result<()> {
    let (rc, out) = resolve("simulate", a)?;
    let dir = out.ok_or_else(|| Error::Parameter("simulate needs an output directory (--out or output_dir)".into()))?;
    let t = rc.require_model()?.to_triplet()?;
    let cls = t.classify()?;
    let eps = rc.eps.ok_or_else(|| Error::Parameter("simulate needs `eps`".into()))?;
    let horizon = rc.horizon.ok_or_else(|| Error::Parameter("simulate needs `horizon`".into()))?;
    let mut oc = ObservationConfig::new(eps, cls.alpha, horizon);
    if let Some(dt) = rc.time_change_dt {
        oc.time_change_dt = dt;
    }
    if let Some(s) = rc.scheme {
        oc.scheme = s;
    }
    let tc = rc.time_change.clone().unwrap_or(TimeChangeSpec::Linear { sigma: 1.0 });
    if rc.study.is_some() || rc.n_paths.is_some() || rc.n_reps.is_some() || rc.eps_grid.is_some() {
        return Err(Error::Schema("simulate takes eps, horizon and index, not study settings".into()));
    }
    let seed = rc.require_seed()?;
    let sim = ObservationSimulator::new(&t, &tc, oc)?;
    let series = sim.run(seed, rc.index.unwrap_or(0))?;
    let mut art = Artifacts::create(&dir)?;
    let cfg = config_text(&rc);
    art.write("config.toml", cfg.as_bytes())?;
    art.write("series.csv", io::series_csv(&series).as_bytes())?;
    art.write("series.json", io::sidecar_json(&series).as_bytes())?;
    art.finish("simulate", sha256_hex(cfg.as_bytes()), Some(seed))?;
    println!(
        "{}",
        json!({"command": "simulate", "n_crossings": series.len(), "eps": eps, "horizon": horizon,
               "series": dir.join("series.csv")})
    );
    Ok(())
}

fn study(cmd: &Command, a: &RunArgs, workers: Option<usize>) -> Result<()> {
    let name = cmd.name();
    let (rc, out) = resolve(name, a)?;
    let t = rc.require_model()?.to_triplet()?;
    let report: StudyReport = match cmd {
        Command::StudyExit(_) => {
            let mut c: ExitStudyConfig = rc.study_settings()?;
            c.workers = workers;
            study_exit_convergence(&t, &c)?
        }
        Command::StudyRate(_) => {
            let mut c: RateStudyConfig = rc.study_settings()?;
            c.workers = workers;
            study_rate(&t, &c)?
        }
        Command::StudyLln(_) => {
            let mut c: LlnStudyConfig = rc.study_settings()?;
            c.workers = workers;
            study_lln(&t, &c)?
        }
        Command::StudyClt(_) => {
            let mut c: CltStudyConfig = rc.study_settings()?;
            c.workers = workers;
            study_clt(&t, &c)?
        }
        Command::StudyNoclt(_) => {
            let mut c: NoCltStudyConfig = rc.study_settings()?;
            c.workers = workers;
            study_noclt_bound(&t, &c)?
        }
        _ => unreachable!("not a study command"),
    };
    let json_text = report.to_json() + "\n";
    match out {
        None => print!("{json_text}"),
        Some(dir) => {
            let mut art = Artifacts::create(&dir)?;
            let cfg = config_text(&rc);
            art.write("config.toml", cfg.as_bytes())?;
            art.write("report.json", json_text.as_bytes())?;
            art.write("report.csv", report.to_csv().as_bytes())?;
            if a.plot_data {
                art.write("plot.csv", report.to_plot_data().as_bytes())?;
            }
            art.finish(name, sha256_hex(cfg.as_bytes()), rc.seed)?;
            println!(
                "{}",
                json!({"study": report.study, "passed": report.passed, "verdict": report.verdict,
                       "manifest": dir.join(manifest::MANIFEST_NAME)})
            );
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn function_specs() {
        assert_eq!(parse_fn("one").unwrap(), FnSpec::one());
        assert_eq!(parse_fn("pow_cap:2").unwrap(), FnSpec::power_cap(2.0));
        assert_eq!(parse_fn("pow_cap(2)").unwrap(), FnSpec::power_cap(2.0));
        assert_eq!(parse_fn("const:3").unwrap(), FnSpec::Constant { value: 3.0 });
        assert!(parse_fn("sin:1").is_err());
        assert!(parse_fn("pow_cap:x").is_err());
    }
}
