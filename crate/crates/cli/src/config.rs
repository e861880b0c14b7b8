//! TOML run configuration.
//!
//! A run file has optional top-level keys plus `[model]`, `[time_change]`,
//! `[tolerances]` and `[study]` tables:
//!
//! | key | unit / meaning |
//! |-----|----------------|
//! | `seed` | 64-bit root seed, mandatory for every stochastic command |
//! | `output_dir` | directory for artifacts (overridden by `--out`) |
//! | `eps` | barrier half-width, in units of `Y` |
//! | `eps_grid` | strictly decreasing list of half-widths |
//! | `horizon` | observation horizon in calendar time |
//! | `n_paths` / `n_reps` | exit paths per ε / observation replicates per ε |
//! | `index` | replicate index of `simulate` (selects the random stream) |
//! | `time_change_dt` | grid step of random time changes, calendar time |
//! | `scheme` | exit-simulator settings (`cut_ratio`, `sd_fraction`, ...) |
//! | `[model]` | `kind` plus numeric parameters, see [`ModelConfig`] |
//! | `[time_change]` | `kind = "linear"` (`sigma`), `"integrated_cir"` (`kappa`, `theta`, `xi`, `v0`) or `"piecewise_linear"` (`knots`) |
//! | `[tolerances]` | `quadrature`: absolute tolerance of oracle quadratures |
//! | `[study]` | any field of the selected study's settings |
//!
//! Top-level keys override the same-named `[study]` fields.

use std::path::{Path, PathBuf};

use levyhit::levy_models::{DriftSpec, JumpSpec, LevyModel, LevyTriplet};
use levyhit::simulation::{StepScheme, TimeChangeSpec};
use levyhit::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Jump part of a catalogued model. Rates are per unit time; `c`, `c_plus`,
/// `c_minus` multiply the Lévy density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpConfig {
    /// No jumps: Brownian motion with drift, or a pure drift.
    #[serde(alias = "brownian", alias = "pure_drift")]
    None,
    Cgmy {
        c: f64,
        lambda_plus: f64,
        lambda_minus: f64,
        alpha: f64,
    },
    Stable {
        alpha: f64,
        c_plus: f64,
        c_minus: f64,
    },
    Nig {
        a: f64,
        b: f64,
        c: f64,
    },
    Vg {
        c: f64,
        lambda_plus: f64,
        lambda_minus: f64,
    },
    Kou {
        rate: f64,
        p_up: f64,
        eta_plus: f64,
        eta_minus: f64,
    },
    Merton {
        rate: f64,
        mean: f64,
        sd: f64,
    },
}

/// Drift convention.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriftConfig {
    /// `γ` relative to the truncation `-1 ∨ x ∧ 1`.
    Truncated { value: f64 },
    /// `γ₀`, the drift of a finite-variation process.
    FiniteVariation { value: f64 },
    StrictlyStable,
}

/// Model section. `diffusion` is the Brownian variance `A` per unit time.
/// The drift defaults to `strictly_stable` for stable jumps and to a zero
/// truncated drift otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(flatten)]
    pub jumps: JumpConfig,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub diffusion: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftConfig>,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl ModelConfig {
    pub fn to_model(&self) -> LevyModel<f64> {
        let jumps = match self.jumps {
            JumpConfig::None => JumpSpec::None,
            JumpConfig::Cgmy {
                c,
                lambda_plus,
                lambda_minus,
                alpha,
            } => JumpSpec::Cgmy {
                c,
                lambda_plus,
                lambda_minus,
                alpha,
            },
            JumpConfig::Stable { alpha, c_plus, c_minus } => JumpSpec::Stable { alpha, c_plus, c_minus },
            JumpConfig::Nig { a, b, c } => JumpSpec::Nig { a, b, c },
            JumpConfig::Vg {
                c,
                lambda_plus,
                lambda_minus,
            } => JumpSpec::Vg {
                c,
                lambda_plus,
                lambda_minus,
            },
            JumpConfig::Kou {
                rate,
                p_up,
                eta_plus,
                eta_minus,
            } => JumpSpec::Kou {
                rate,
                p_up,
                eta_plus,
                eta_minus,
            },
            JumpConfig::Merton { rate, mean, sd } => JumpSpec::Merton { rate, mean, sd },
        };
        let drift = match self.drift {
            Some(DriftConfig::Truncated { value }) => DriftSpec::Truncated(value),
            Some(DriftConfig::FiniteVariation { value }) => DriftSpec::FiniteVariation(value),
            Some(DriftConfig::StrictlyStable) => DriftSpec::StrictlyStable,
            None if matches!(self.jumps, JumpConfig::Stable { .. }) => DriftSpec::StrictlyStable,
            None => DriftSpec::Truncated(0.0),
        };
        LevyModel::new(self.diffusion, drift, jumps)
    }

    pub fn to_triplet(&self) -> Result<LevyTriplet<f64>> {
        self.to_model().to_triplet()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<f64>,
}

/// Parsed run file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_reps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_change_dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<StepScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_change: Option<TimeChangeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<Map<String, Value>>,
}

fn schema(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Schema(format!("{}: {e}", path.display()))
}

impl RunConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| schema(origin, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    /// Range checks on the top-level numbers; module-level checks run when
    /// the settings are resolved, still before any simulation.
    pub fn validate(&self) -> Result<()> {
        let pos = |v: Option<f64>, name: &str| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(Error::Parameter(format!("{name} must be positive, got {x}"))),
            _ => Ok(()),
        };
        pos(self.eps, "eps")?;
        pos(self.horizon, "horizon")?;
        pos(self.time_change_dt, "time_change_dt")?;
        if let Some(t) = self.tolerances.as_ref().and_then(|t| t.quadrature) {
            pos(Some(t), "tolerances.quadrature")?;
        }
        if let Some(g) = &self.eps_grid {
            levyhit::montecarlo::validate_eps_grid(g)?;
        }
        if self.n_paths == Some(0) || self.n_reps == Some(0) {
            return Err(Error::Parameter("n_paths and n_reps must be positive".into()));
        }
        if let Some(s) = &self.scheme {
            s.validate()?;
        }
        if let Some(tc) = &self.time_change {
            tc.validate()?;
        }
        Ok(())
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Parameter("seed is mandatory (set `seed` in the config or pass --seed)".into()))
    }

    pub fn require_model(&self) -> Result<&ModelConfig> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::Parameter("config has no [model] section".into()))
    }

    /// Study settings: defaults, then `[study]`, then the top-level keys and the seed.
    pub fn study_settings<C: Serialize + DeserializeOwned + Default>(&self) -> Result<C> {
        let mut v = serde_json::to_value(C::default()).map_err(|e| Error::Schema(e.to_string()))?;
        let obj = v.as_object_mut().expect("study settings serialize to a table");
        let mut set = |key: &str, val: Value, explicit: bool| -> Result<()> {
            match obj.get_mut(key) {
                Some(slot) => {
                    merge(slot, val);
                    Ok(())
                }
                None if explicit => Err(Error::Schema(format!("key `{key}` does not apply to this command"))),
                None => Ok(()),
            }
        };
        if let Some(study) = &self.study {
            for (k, val) in study {
                set(k, val.clone(), true)?;
            }
        }
        let pairs: [(&str, Option<Value>); 8] = [
            ("eps", self.eps.map(Value::from)),
            ("eps_grid", self.eps_grid.as_ref().map(|g| json(g))),
            ("horizon", self.horizon.map(Value::from)),
            ("n_paths", self.n_paths.map(Value::from)),
            ("n_reps", self.n_reps.map(Value::from)),
            ("time_change_dt", self.time_change_dt.map(Value::from)),
            ("scheme", self.scheme.as_ref().map(|s| json(s))),
            ("time_change", self.time_change.as_ref().map(|t| json(t))),
        ];
        for (k, val) in pairs {
            if let Some(val) = val {
                set(k, val, true)?;
            }
        }
        set("seed", Value::from(self.require_seed()?), false)?;
        serde_json::from_value(v).map_err(|e| Error::Schema(format!("study settings: {e}")))
    }
}

fn json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable setting")
}

/// Recursive table merge; a table carrying `kind` replaces the slot whole so
/// tagged variants do not mix.
fn merge(slot: &mut Value, val: Value) {
    match (slot, val) {
        (Value::Object(a), Value::Object(b)) if !b.contains_key("kind") => {
            for (k, v) in b {
                match a.get_mut(&k) {
                    Some(s) => merge(s, v),
                    None => {
                        a.insert(k, v);
                    }
                }
            }
        }
        (slot, val) => *slot = val,
    }
}

/// A model file is either a bare `[model]` body or a run file with a `[model]` table.
pub fn load_model(path: &Path) -> Result<ModelConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| schema(path, e))?;
    if table.contains_key("model") {
        RunConfig::parse(&text, path)?.model.ok_or_else(|| schema(path, "empty model"))
    } else {
        toml::from_str(&text).map_err(|e| schema(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use levyhit::montecarlo::{ExitStudyConfig, LlnStudyConfig};

    #[test]
    fn study_overrides_and_seed() {
        let text = r#"
            seed = 9
            eps_grid = [0.2, 0.1]
            [model]
            kind = "cgmy"
            c = 1
            lambda_plus = 1
            lambda_minus = 1
            alpha = 1.5
            [study]
            n_paths = 50
            scheme = { cut_ratio = 0.01 }
        "#;
        let rc = RunConfig::parse(text, Path::new("t.toml")).unwrap();
        let c: ExitStudyConfig = rc.study_settings().unwrap();
        assert_eq!((c.seed, c.n_paths, c.eps_grid.clone()), (9, 50, vec![0.2, 0.1]));
        assert_eq!(c.scheme.cut_ratio, 0.01);
        assert_eq!(c.scheme.sd_fraction, StepScheme::default().sd_fraction);
        let t = rc.require_model().unwrap().to_triplet().unwrap();
        assert_eq!(t.classify().unwrap().condition, 3);
    }

    #[test]
    fn rejects_bad_input() {
        let p = Path::new("t.toml");
        assert!(matches!(RunConfig::parse("eps = -1", p), Err(Error::Parameter(_))));
        assert!(matches!(RunConfig::parse("bogus = 1", p), Err(Error::Schema(_))));
        assert!(matches!(RunConfig::parse("eps_grid = [0.1, 0.2]", p), Err(Error::Parameter(_))));
        let rc = RunConfig::parse("n_paths = 5", p).unwrap();
        assert!(matches!(rc.study_settings::<ExitStudyConfig>(), Err(Error::Parameter(_))));
        let rc = RunConfig::parse("seed = 1\nn_paths = 5", p).unwrap();
        assert!(matches!(rc.study_settings::<LlnStudyConfig>(), Err(Error::Schema(_))));
    }
}
