//! Flat `key = value` run configuration.
//!
//! The bundled defaults define the set of valid keys. A config file and then
//! `--set key=value` overrides are applied on top; later values win.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chaplygin::brackets::BracketVariant;
use chaplygin::verify::{SampleSpec, VerifyConfig};
use chaplygin::{ReducedState, SphereParams, Vec3};

use crate::CliError;

pub const DEFAULT_CONFIG: &str = include_str!("../default.conf");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Reduced,
    Full,
    Multiplier,
    Rescaled,
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reduced" => Ok(Self::Reduced),
            "full" => Ok(Self::Full),
            "multiplier" => Ok(Self::Multiplier),
            "rescaled" => Ok(Self::Rescaled),
            other => Err(format!(
                "unknown model '{other}' (expected reduced, full, multiplier or rescaled)"
            )),
        }
    }
}

/// Raw key/value pairs in application order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn defaults() -> Self {
        let mut raw = Self::default();
        raw.merge_text(DEFAULT_CONFIG, "<defaults>", false)
            .expect("bundled defaults parse");
        raw
    }

    /// Applies `key = value` lines. `#` starts a comment.
    pub fn merge_text(
        &mut self,
        text: &str,
        origin: &str,
        known_only: bool,
    ) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("{origin}:{}: expected 'key = value'", n + 1))
            })?;
            self.set(key.trim(), value.trim(), known_only)
                .map_err(|e| CliError::Config(format!("{origin}:{}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.merge_text(&text, &path.display().to_string(), true)
    }

    /// Applies one `key=value` override.
    pub fn merge_override(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override '{assignment}' is not key=value")))?;
        self.set(key.trim(), value.trim(), true)
            .map_err(|e| CliError::Config(format!("--set {assignment}: {e}")))
    }

    fn set(&mut self, key: &str, value: &str, known_only: bool) -> Result<(), String> {
        if key.is_empty() {
            return Err("empty key".into());
        }
        if known_only && !self.values.contains_key(key) {
            return Err(format!("unknown key '{key}'"));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// The effective configuration as text, one key per line in key order.
    pub fn to_text(&self) -> String {
        self.values
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    fn raw(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::Config(format!("missing key '{key}'")))
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(key)?;
        raw.parse()
            .map_err(|e| CliError::Config(format!("{key} = {raw}: {e}")))
    }

    fn vector<const N: usize>(&self, key: &str) -> Result<[f64; N], CliError> {
        let raw = self.raw(key)?;
        let bad = |why: String| CliError::Config(format!("{key} = {raw}: {why}"));
        let parts: Vec<f64> = raw
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| bad(e.to_string())))
            .collect::<Result<_, _>>()?;
        parts.try_into().map_err(|v: Vec<f64>| {
            bad(format!(
                "expected {N} comma-separated numbers, got {}",
                v.len()
            ))
        })
    }

    fn vec3(&self, key: &str) -> Result<Vec3, CliError> {
        Ok(Vec3::from(self.vector::<3>(key)?))
    }

    fn optional<T>(
        &self,
        key: &str,
        f: impl FnOnce(&Self) -> Result<T, CliError>,
    ) -> Result<Option<T>, CliError> {
        match self.raw(key)? {
            "none" | "" => Ok(None),
            _ => f(self).map(Some),
        }
    }

    fn path(&self, key: &str) -> Result<Option<PathBuf>, CliError> {
        self.optional(key, |c| Ok(PathBuf::from(c.raw(key)?)))
    }
}

/// Validated configuration for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SphereParams,
    pub model: Model,
    pub initial: ReducedState,
    pub attitude: Option<Vec3>,
    pub position: [f64; 2],
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
    pub renormalize_every: Option<usize>,
    pub output: Option<PathBuf>,
    pub variants: Vec<BracketVariant>,
    pub report: Option<PathBuf>,
    pub verify: VerifyConfig,
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "{name} must be finite and positive, got {v}"
        )))
    }
}

fn at_least_one(name: &str, v: usize) -> Result<usize, CliError> {
    if v >= 1 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be at least 1")))
    }
}

impl RunConfig {
    pub fn from_raw(c: &RawConfig) -> Result<Self, CliError> {
        let params = SphereParams::new(c.parse("mass")?, c.parse("radius")?, c.vec3("inertia")?)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let model = c.parse("model")?;
        let attitude = c.optional("attitude", |c| c.vec3("attitude"))?;
        let gamma = match attitude {
            Some(v) => chaplygin::so3::poisson_vector(&chaplygin::so3::exp_rotation(&v)),
            None => c.vec3("gamma")?,
        };
        let initial = ReducedState::new(c.vec3("k")?, gamma)
            .map_err(|e| CliError::Config(format!("initial state: {e}")))?;
        let position = c.vector::<2>("position")?;
        if !position.iter().all(|v| v.is_finite()) {
            return Err(CliError::Config("position must be finite".into()));
        }

        let variants = match c.raw("variant")? {
            "all" => BracketVariant::ALL.to_vec(),
            one => vec![one
                .parse::<BracketVariant>()
                .map_err(|e| CliError::Config(format!("variant = {one}: {e}")))?],
        };

        let generic_fraction: f64 = c.parse("generic_fraction")?;
        if !(generic_fraction > 0.0 && generic_fraction <= 1.0) {
            return Err(CliError::Config(format!(
                "generic_fraction must lie in (0, 1], got {generic_fraction}"
            )));
        }
        let sample = SampleSpec {
            count: at_least_one("samples", c.parse("samples")?)?,
            seed: c.parse("seed")?,
            k_half_width: positive("k_box", c.parse("k_box")?)?,
        };
        let verify = VerifyConfig {
            sample,
            generic_fraction,
            jacobi_tol: positive("jacobi_tol", c.parse("jacobi_tol")?)?,
            standard_jacobi_threshold: positive(
                "standard_jacobi_threshold",
                c.parse("standard_jacobi_threshold")?,
            )?,
            affine_jacobi_threshold: positive(
                "affine_jacobi_threshold",
                c.parse("affine_jacobi_threshold")?,
            )?,
            casimir_tol: positive("casimir_tol", c.parse("casimir_tol")?)?,
            standard_casimir_threshold: positive(
                "standard_casimir_threshold",
                c.parse("standard_casimir_threshold")?,
            )?,
            nonintegrability_samples: at_least_one(
                "nonintegrability_samples",
                c.parse("nonintegrability_samples")?,
            )?,
            alpha_tol: positive("alpha_tol", c.parse("alpha_tol")?)?,
            dynamics_tol: positive("dynamics_tol", c.parse("dynamics_tol")?)?,
            involution_tol: positive("involution_tol", c.parse("involution_tol")?)?,
            commute_tol: positive("commute_tol", c.parse("commute_tol")?)?,
            commute_s: positive("commute_s", c.parse("commute_s")?)?,
            commute_t: positive("commute_t", c.parse("commute_t")?)?,
            commute_dt: positive("commute_dt", c.parse("commute_dt")?)?,
            commute_state: initial,
            measure_tol: positive("measure_tol", c.parse("measure_tol")?)?,
            measure_control_threshold: positive(
                "measure_control_threshold",
                c.parse("measure_control_threshold")?,
            )?,
            consistency_tol: positive("consistency_tol", c.parse("consistency_tol")?)?,
            consistency_time: positive("consistency_time", c.parse("consistency_time")?)?,
            consistency_dt: positive("consistency_dt", c.parse("consistency_dt")?)?,
            consistency_order_dt: positive(
                "consistency_order_dt",
                c.parse("consistency_order_dt")?,
            )?,
            consistency_min_order: positive(
                "consistency_min_order",
                c.parse("consistency_min_order")?,
            )?,
            consistency_attitude: c.vec3("consistency_attitude")?,
            consistency_k: c.vec3("consistency_k")?,
            conservation_tol: positive("conservation_tol", c.parse("conservation_tol")?)?,
            conservation_dt: positive("conservation_dt", c.parse("conservation_dt")?)?,
            conservation_steps: at_least_one("conservation_steps", c.parse("conservation_steps")?)?,
            conservation_state: initial,
            rescaled_dtau: positive("rescaled_dtau", c.parse("rescaled_dtau")?)?,
            rescaled_steps: at_least_one("rescaled_steps", c.parse("rescaled_steps")?)?,
            rescaled_tol: positive("rescaled_tol", c.parse("rescaled_tol")?)?,
            rescaled_time_tol: positive("rescaled_time_tol", c.parse("rescaled_time_tol")?)?,
            rescaled_uniform_inertia: positive(
                "rescaled_uniform_inertia",
                c.parse("rescaled_uniform_inertia")?,
            )?,
        };

        let renormalize_every = match c.parse::<usize>("renormalize_every")? {
            0 => None,
            k => Some(k),
        };

        Ok(Self {
            params,
            model,
            initial,
            attitude,
            position,
            dt: positive("dt", c.parse("dt")?)?,
            steps: at_least_one("steps", c.parse("steps")?)?,
            stride: at_least_one("stride", c.parse("stride")?)?,
            renormalize_every,
            output: c.path("output")?,
            variants,
            report: c.path("report")?,
            verify,
        })
    }

    /// Defaults, then the optional file, then the overrides.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<(Self, RawConfig), CliError> {
        let mut raw = RawConfig::defaults();
        if let Some(path) = file {
            raw.merge_file(path)?;
        }
        for o in overrides {
            raw.merge_override(o)?;
        }
        Ok((Self::from_raw(&raw)?, raw))
    }
}
