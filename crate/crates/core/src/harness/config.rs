//! JSON experiment configuration.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{SchemeConfig, SchemeId, Startup};
use crate::models::{
    InitialCondition, Model, KDV_ONE_SOLITON_DOMAIN, KDV_ONE_SOLITON_MU2, KDV_TWO_SOLITON_DOMAIN, NLS_DOMAIN,
    SG_COLLISION_DOMAIN, SG_RING_DOMAIN,
};
use crate::spectral::{Axis, Grid, State};

pub const MAX_LADDER_DEPTH: usize = 6;

/// Model and its parameters. Omitted parameters take the testbed values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Kdv {
        #[serde(default = "one")]
        eta: f64,
        #[serde(default)]
        mu: Option<f64>,
    },
    Nls {
        #[serde(default = "one")]
        beta: f64,
    },
    SineGordon {
        #[serde(default = "one")]
        phi0: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// Periodic domain `[lo, hi)` and point count per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub domain: Option<Vec<(f64, f64)>>,
    pub n: Vec<usize>,
}

/// How convergence errors are measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    /// GAUSS-FP with three stages at `Δt₀/64`.
    #[default]
    GaussFp,
    /// The closed-form solution; only the KdV one-soliton has one.
    Exact,
}

/// A scheme entry: either a bare id such as `"lm-gauss3"` or an object
/// with solver overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemeEntry {
    Id(String),
    Detailed(SchemeOverrides),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeOverrides {
    pub id: String,
    #[serde(default)]
    pub sweeps: Option<usize>,
    #[serde(default)]
    pub newton_tol: Option<f64>,
    #[serde(default)]
    pub newton_max_iter: Option<usize>,
    #[serde(default)]
    pub newton_min_iter: Option<usize>,
    #[serde(default)]
    pub sav_c0: Option<f64>,
    #[serde(default)]
    pub fp_tol: Option<f64>,
    #[serde(default)]
    pub fp_max_sweeps: Option<usize>,
    #[serde(default)]
    pub startup: Option<Startup>,
}

impl SchemeEntry {
    pub fn resolve(&self, dt: f64) -> Result<SchemeConfig> {
        match self {
            SchemeEntry::Id(id) => Ok(id.parse::<SchemeId>()?.config(dt)),
            SchemeEntry::Detailed(o) => {
                let mut c = o.id.parse::<SchemeId>()?.config(dt);
                if o.sweeps.is_some() {
                    c.sweeps = o.sweeps;
                }
                c.newton_tol = o.newton_tol.unwrap_or(c.newton_tol);
                c.newton_max_iter = o.newton_max_iter.unwrap_or(c.newton_max_iter);
                c.newton_min_iter = o.newton_min_iter.unwrap_or(c.newton_min_iter);
                c.sav_c0 = o.sav_c0.unwrap_or(c.sav_c0);
                c.fp_tol = o.fp_tol.unwrap_or(c.fp_tol);
                c.fp_max_sweeps = o.fp_max_sweeps.unwrap_or(c.fp_max_sweeps);
                c.startup = o.startup.unwrap_or(c.startup);
                Ok(c)
            }
        }
    }
}

impl From<&str> for SchemeEntry {
    fn from(id: &str) -> SchemeEntry {
        SchemeEntry::Id(id.to_string())
    }
}

impl From<&SchemeConfig> for SchemeEntry {
    fn from(c: &SchemeConfig) -> SchemeEntry {
        SchemeEntry::Detailed(SchemeOverrides {
            id: SchemeId::from(c).to_string(),
            sweeps: c.sweeps,
            newton_tol: Some(c.newton_tol),
            newton_max_iter: Some(c.newton_max_iter),
            newton_min_iter: Some(c.newton_min_iter),
            sav_c0: Some(c.sav_c0),
            fp_tol: Some(c.fp_tol),
            fp_max_sweeps: Some(c.fp_max_sweeps),
            startup: Some(c.startup),
        })
    }
}

/// One experiment: a model on a grid, an initial condition and the schemes
/// to run on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub grid: GridSpec,
    pub initial: InitialCondition,
    pub schemes: Vec<SchemeEntry>,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Number of `Δt` halvings in a convergence study.
    #[serde(default = "default_ladder_depth")]
    pub ladder_depth: usize,
    #[serde(default)]
    pub reference: ReferenceMode,
    #[serde(default)]
    pub seed: u64,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_ladder_depth() -> usize {
    3
}

impl ExperimentConfig {
    /// A config with testbed defaults for `initial` on `n` points per axis.
    pub fn testbed(initial: InitialCondition, n: usize, dt: f64, t_final: f64) -> ExperimentConfig {
        let (model, dim) = match initial {
            InitialCondition::KdvOneSoliton => (ModelSpec::Kdv { eta: 1.0, mu: None }, 1),
            InitialCondition::KdvTwoSoliton => (ModelSpec::Kdv { eta: 1.0, mu: Some(1.0) }, 1),
            InitialCondition::NlsOneSoliton | InitialCondition::NlsTwoSoliton => (ModelSpec::Nls { beta: 1.0 }, 1),
            InitialCondition::SgRing | InitialCondition::SgCollision => (ModelSpec::SineGordon { phi0: 1.0 }, 2),
        };
        ExperimentConfig {
            model,
            grid: GridSpec {
                domain: None,
                n: vec![n; dim],
            },
            initial,
            schemes: Vec::new(),
            dt,
            t_final,
            out_dir: default_out_dir(),
            ladder_depth: default_ladder_depth(),
            reference: ReferenceMode::default(),
            seed: 0,
        }
    }

    pub fn with_schemes<I, S>(mut self, schemes: I) -> ExperimentConfig
    where
        I: IntoIterator<Item = S>,
        S: Into<SchemeEntry>,
    {
        self.schemes = schemes.into_iter().map(Into::into).collect();
        self
    }

    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("cannot read {}: {e}", path.display())))?;
        ExperimentConfig::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if !(self.dt > 0.0) || self.dt > self.t_final {
            return bad(format!("dt must lie in (0, t_final], got {}", self.dt));
        }
        self.step_count(self.dt)?;
        if self.ladder_depth > MAX_LADDER_DEPTH {
            return bad(format!("ladder_depth must be at most {MAX_LADDER_DEPTH}, got {}", self.ladder_depth));
        }
        if self.schemes.is_empty() {
            return bad("at least one scheme is required".into());
        }
        for s in &self.schemes {
            s.resolve(self.dt)?.validate()?;
        }
        let dim = match self.model {
            ModelSpec::SineGordon { .. } => 2,
            _ => 1,
        };
        if self.grid.n.len() != dim {
            return bad(format!("grid.n needs {dim} entries for this model"));
        }
        if let Some(d) = &self.grid.domain {
            if d.len() != dim {
                return bad(format!("grid.domain needs {dim} entries for this model"));
            }
        }
        Ok(())
    }

    /// Number of steps of size `dt` that reach `t_final` exactly.
    pub fn step_count(&self, dt: f64) -> Result<usize> {
        let ratio = self.t_final / dt;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * n {
            return Err(Error::ConfigInvalid(format!(
                "t_final = {} is not an integer multiple of dt = {dt}",
                self.t_final
            )));
        }
        Ok(n as usize)
    }

    pub fn scheme_configs(&self) -> Result<Vec<SchemeConfig>> {
        self.schemes.iter().map(|s| s.resolve(self.dt)).collect()
    }

    /// Keeps only the scheme `id`. A configured entry with that id keeps
    /// its overrides; otherwise the bare id is used.
    pub fn override_scheme(&mut self, id: &str) -> Result<()> {
        let wanted = id.parse::<SchemeId>()?;
        let existing = self
            .schemes
            .iter()
            .find(|e| e.resolve(self.dt).is_ok_and(|c| SchemeId::from(&c) == wanted))
            .cloned();
        self.schemes = vec![existing.unwrap_or_else(|| SchemeEntry::Id(id.to_string()))];
        Ok(())
    }

    fn default_domain(&self) -> Vec<(f64, f64)> {
        match self.initial {
            InitialCondition::KdvOneSoliton => vec![KDV_ONE_SOLITON_DOMAIN],
            InitialCondition::KdvTwoSoliton => vec![KDV_TWO_SOLITON_DOMAIN],
            InitialCondition::NlsOneSoliton | InitialCondition::NlsTwoSoliton => vec![NLS_DOMAIN],
            InitialCondition::SgRing => SG_RING_DOMAIN.to_vec(),
            InitialCondition::SgCollision => SG_COLLISION_DOMAIN.to_vec(),
        }
    }

    pub fn build_grid(&self) -> Result<Arc<Grid>> {
        let domain = self.grid.domain.clone().unwrap_or_else(|| self.default_domain());
        let axes = domain
            .iter()
            .zip(&self.grid.n)
            .map(|(&(lo, hi), &n)| Axis { lo, hi, n })
            .collect();
        Grid::new(axes)
    }

    pub fn build_model(&self) -> Result<Arc<Model>> {
        let grid = self.build_grid()?;
        let model = match self.model {
            ModelSpec::Kdv { eta, mu } => Model::kdv(eta, mu.unwrap_or(KDV_ONE_SOLITON_MU2.sqrt()), grid)?,
            ModelSpec::Nls { beta } => Model::nls(beta, grid)?,
            ModelSpec::SineGordon { phi0 } => Model::sine_gordon(phi0, grid)?,
        };
        Ok(Arc::new(model))
    }

    pub fn initial_state(&self, model: &Model) -> Result<State> {
        self.initial.state(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KDV: &str = r#"{
        "model": {"kind": "kdv"},
        "grid": {"n": [128]},
        "initial": "kdv_one_soliton",
        "schemes": ["lm-cn", {"id": "lm-gauss2", "sweeps": 3}],
        "dt": 0.002,
        "t_final": 1.0
    }"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::from_json(KDV).unwrap();
        assert_eq!(cfg.ladder_depth, 3);
        assert_eq!(cfg.reference, ReferenceMode::GaussFp);
        assert_eq!(cfg.step_count(cfg.dt).unwrap(), 500);
        let schemes = cfg.scheme_configs().unwrap();
        assert_eq!(schemes[0].label(), "lm-cn");
        assert_eq!(schemes[1].label(), "lm-gauss2:3");
        let model = cfg.build_model().unwrap();
        assert_eq!(model.grid().axis(0).lo, -3.0);
        let back = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_unknown_keys() {
        let extra = KDV.replace("\"t_final\": 1.0", "\"t_final\": 1.0, \"colour\": 3");
        assert!(ExperimentConfig::from_json(&extra).is_err());
        let in_model = KDV.replace("{\"kind\": \"kdv\"}", "{\"kind\": \"kdv\", \"nu\": 1}");
        assert!(ExperimentConfig::from_json(&in_model).is_err());
        let in_scheme = KDV.replace("\"sweeps\": 3", "\"sweeps\": 3, \"order\": 2");
        assert!(ExperimentConfig::from_json(&in_scheme).is_err());
    }

    #[test]
    fn rejects_bad_values() {
        for (from, to) in [
            ("\"t_final\": 1.0", "\"t_final\": 1.001"),
            ("\"t_final\": 1.0", "\"t_final\": 0.001"),
            ("\"t_final\": 1.0", "\"t_final\": 1.0, \"ladder_depth\": 7"),
            ("\"lm-cn\"", "\"rk4\""),
            ("[128]", "[128, 128]"),
        ] {
            let text = KDV.replace(from, to);
            assert!(matches!(ExperimentConfig::from_json(&text), Err(Error::ConfigInvalid(_))), "{to}");
        }
    }

    #[test]
    fn scheme_override() {
        let mut cfg = ExperimentConfig::from_json(KDV).unwrap();
        cfg.override_scheme("sav-cn").unwrap();
        assert_eq!(cfg.scheme_configs().unwrap()[0].label(), "sav-cn");
        let mut cfg = ExperimentConfig::from_json(KDV).unwrap();
        cfg.override_scheme("lm-gauss2:3").unwrap();
        assert_eq!(cfg.schemes, vec![SchemeEntry::Detailed(SchemeOverrides {
            id: "lm-gauss2".into(),
            sweeps: Some(3),
            newton_tol: None,
            newton_max_iter: None,
            newton_min_iter: None,
            sav_c0: None,
            fp_tol: None,
            fp_max_sweeps: None,
            startup: None,
        })]);
        assert!(cfg.override_scheme("bogus").is_err());
    }
}
