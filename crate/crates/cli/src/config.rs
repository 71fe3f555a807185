//! Experiment configuration files.
//!
//! Grammar (TOML):
//!
//! ```toml
//! name = "fig3a"            # optional, defaults to the instance name
//! horizon = 10000           # required
//! runs = 100                # default 100
//! seed = 0                  # default 0, at most 2^63 - 1
//! record_stride = 1         # default 1
//! per_run_csv = false       # default false; writes runs.csv when true
//!
//! [instance]
//! name = "instance1"        # instance1..4, general_normal, general_multimodal, general_lognormal
//! epsilon = 0.5             # default 0.5 (0.2 for the general_* family)
//! cv_mean_error = 0.0       # default 0
//! arms = 10                 # default 10
//! cv_count = 1              # default 1
//!
//! [[policies]]
//! kind = "ucb_lcv"          # ucb_lcv, ucb_normal, ucb1, ucb1_normal, kl_ucb, ucb_v, thompson
//! name = "ucb_lcv"          # default: the kind
//! alpha = 2.0               # default 2
//! q = 1                     # default 1
//! estimator = "gaussian"    # gaussian, jackknife, splitting, batching
//! batch_count = 5           # default 5
//! ucb_v_range = 1.0         # optional; derived from the warm-start sample when absent
//!
//! [sweep]                   # only read by the sweep command
//! parameter = "epsilon"     # epsilon or cv_mean_error
//! values = [0.0, 0.5, 1.0]
//! ```
//!
//! Overrides address keys by dotted path, with array positions as numbers:
//! `instance.epsilon=0.3`, `policies.1.alpha=3`.

use std::path::Path;

use lcv_bandit::environments::{InstanceFamily, InstanceParams};
use lcv_bandit::estimators::DEFAULT_BATCH_COUNT;
use lcv_bandit::policies::{EstimatorVariant, PolicyConfig, PolicyKind, DEFAULT_ALPHA, DEFAULT_CV_COUNT};
use lcv_bandit::simulator::{ExperimentConfig, InstanceConfig, SweepParameter};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub horizon: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default)]
    pub per_run_csv: bool,
    pub instance: InstanceSection,
    pub policies: Vec<PolicySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSection {
    pub name: InstanceFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub cv_mean_error: f64,
    #[serde(default = "default_arms")]
    pub arms: usize,
    #[serde(default = "default_cv_count")]
    pub cv_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    pub kind: PolicyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_cv_count")]
    pub q: usize,
    #[serde(default)]
    pub estimator: EstimatorVariant,
    #[serde(default = "default_batch_count")]
    pub batch_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ucb_v_range: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

fn default_runs() -> usize {
    100
}
fn default_stride() -> usize {
    1
}
fn default_arms() -> usize {
    lcv_bandit::environments::DEFAULT_ARMS
}
fn default_cv_count() -> usize {
    DEFAULT_CV_COUNT
}
fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_batch_count() -> usize {
    DEFAULT_BATCH_COUNT
}

/// Where a configuration value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override,
    Unknown,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{}", fmt_invalid(.path, .origin, .message))]
    Invalid { path: String, origin: Origin, message: String },
    #[error("malformed override '{0}': expected KEY=VALUE")]
    MalformedOverride(String),
}

fn fmt_invalid(path: &str, origin: &Origin, message: &str) -> String {
    let key = if path.is_empty() { "config".to_owned() } else { format!("`{path}`") };
    match origin {
        Origin::Line(line) => format!("{key} (line {line}): {message}"),
        Origin::Override => format!("{key} (from --set): {message}"),
        Origin::Unknown => format!("{key}: {message}"),
    }
}

impl ConfigError {
    pub fn path(&self) -> Option<&str> {
        match self {
            Self::Invalid { path, .. } => Some(path),
            _ => None,
        }
    }

    pub fn origin(&self) -> Option<&Origin> {
        match self {
            Self::Invalid { origin, .. } => Some(origin),
            _ => None,
        }
    }
}

/// A parsed, defaulted and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub file: ConfigFile,
    pub experiment: ExperimentConfig,
}

impl LoadedConfig {
    /// Resolved configuration as TOML; parsing it again yields the same config.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.file).expect("resolved configs always serialize")
    }
}

pub fn parse_config(path: &Path, overrides: &[String]) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config_str(&text, overrides)
}

pub fn parse_config_str(text: &str, overrides: &[String]) -> Result<LoadedConfig, ConfigError> {
    let locator = Locator::new(text);
    let mut file: ConfigFile = serde_path_to_error::deserialize(toml::Deserializer::new(text)).map_err(|e| {
        let origin = e.inner().span().map_or(Origin::Unknown, |s| Origin::Line(locator.line_of(s.start)));
        ConfigError::Invalid { path: dotted(e.path()), origin, message: e.inner().message().to_owned() }
    })?;
    resolve(&mut file);
    let mut overridden = Vec::new();
    if !overrides.is_empty() {
        let mut value = toml::Value::try_from(&file).expect("resolved configs always serialize");
        for raw in overrides {
            let (key, v) = raw.split_once('=').ok_or_else(|| ConfigError::MalformedOverride(raw.clone()))?;
            let key = key.trim();
            set_path(&mut value, key, parse_override_value(v.trim()))?;
            overridden.push(key.to_owned());
        }
        file = serde_path_to_error::deserialize(value).map_err(|e| ConfigError::Invalid {
            path: dotted(e.path()),
            origin: Origin::Override,
            message: e.inner().message().to_owned(),
        })?;
        resolve(&mut file);
    }
    let experiment = validate(&file).map_err(|(path, message)| {
        let origin = if overridden.iter().any(|k| path == *k || path.starts_with(&format!("{k}."))) {
            Origin::Override
        } else {
            locator.origin_of(&path)
        };
        ConfigError::Invalid { path, origin, message }
    })?;
    Ok(LoadedConfig { file, experiment })
}

/// `policies[0].kind` → `policies.0.kind`, the override syntax.
fn dotted(path: &serde_path_to_error::Path) -> String {
    path.to_string().replace('[', ".").replace(']', "")
}

fn resolve(file: &mut ConfigFile) {
    let family = file.instance.name;
    file.instance.epsilon.get_or_insert(family.default_epsilon());
    file.name.get_or_insert_with(|| family.name().to_owned());
    for p in &mut file.policies {
        p.name.get_or_insert_with(|| p.kind.name().to_owned());
    }
}

fn parse_override_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()))
}

fn set_path(root: &mut toml::Value, key: &str, new: toml::Value) -> Result<(), ConfigError> {
    let missing = || ConfigError::Invalid {
        path: key.to_owned(),
        origin: Origin::Override,
        message: "no such key in the configuration".into(),
    };
    let mut node = root;
    for segment in key.split('.') {
        node = match node {
            toml::Value::Table(t) => t.get_mut(segment).ok_or_else(missing)?,
            toml::Value::Array(a) => {
                let i: usize = segment.parse().map_err(|_| missing())?;
                a.get_mut(i).ok_or_else(missing)?
            }
            _ => return Err(missing()),
        };
    }
    *node = new;
    Ok(())
}

type Invalid = (String, String);

fn invalid<T>(path: impl Into<String>, message: impl Into<String>) -> Result<T, Invalid> {
    Err((path.into(), message.into()))
}

fn validate(file: &ConfigFile) -> Result<ExperimentConfig, Invalid> {
    if file.horizon == 0 {
        return invalid("horizon", "must be positive");
    }
    if file.runs < 2 {
        return invalid("runs", format!("must be at least 2, got {}", file.runs));
    }
    if file.record_stride == 0 {
        return invalid("record_stride", "must be positive");
    }
    if file.seed > i64::MAX as u64 {
        return invalid("seed", format!("must be at most {}, got {}", i64::MAX, file.seed));
    }
    let inst = &file.instance;
    let epsilon = inst.epsilon.unwrap_or(inst.name.default_epsilon());
    if !(0.0..=1.0).contains(&epsilon) {
        return invalid("instance.epsilon", format!("must lie in [0, 1], got {epsilon}"));
    }
    if !inst.cv_mean_error.is_finite() {
        return invalid("instance.cv_mean_error", "must be finite");
    }
    if inst.arms < 2 {
        return invalid("instance.arms", format!("must be at least 2, got {}", inst.arms));
    }
    if inst.cv_count == 0 {
        return invalid("instance.cv_count", "must be at least 1");
    }
    if file.policies.is_empty() {
        return invalid("policies", "at least one policy is required");
    }
    let mut policies: Vec<PolicyConfig> = Vec::with_capacity(file.policies.len());
    for (i, p) in file.policies.iter().enumerate() {
        let pc = PolicyConfig {
            name: p.name.clone().unwrap_or_else(|| p.kind.name().to_owned()),
            kind: p.kind,
            alpha: p.alpha,
            q: p.q,
            estimator: p.estimator,
            batch_count: p.batch_count,
            ucb_v_range: p.ucb_v_range,
        };
        if policies.iter().any(|o| o.name == pc.name) {
            return invalid(format!("policies.{i}.name"), format!("duplicate policy name '{}'", pc.name));
        }
        if let Err(e) = pc.validate() {
            return invalid(format!("policies.{i}"), plain(e));
        }
        if pc.kind == PolicyKind::UcbLcv && pc.q != inst.cv_count {
            return invalid(
                format!("policies.{i}.q"),
                format!("ucb_lcv expects q = instance.cv_count = {}, got {}", inst.cv_count, pc.q),
            );
        }
        let warm = pc.warm_start_pulls() * inst.arms;
        if file.horizon < warm {
            return invalid(
                "horizon",
                format!("{} is shorter than the {warm}-round warm-start of policy '{}'", file.horizon, pc.name),
            );
        }
        policies.push(pc);
    }
    if let Some(sweep) = &file.sweep {
        if sweep.values.is_empty() {
            return invalid("sweep.values", "at least one value is required");
        }
        for (i, &v) in sweep.values.iter().enumerate() {
            let ok = match sweep.parameter {
                SweepParameter::Epsilon => (0.0..=1.0).contains(&v),
                SweepParameter::CvMeanError => v.is_finite(),
            };
            if !ok {
                return invalid(format!("sweep.values.{i}"), format!("{v} is not a valid {}", sweep.parameter.name()));
            }
        }
    }
    let params = InstanceParams {
        arms: inst.arms,
        epsilon,
        cv_mean_error: inst.cv_mean_error,
        cv_count: inst.cv_count,
        horizon: file.horizon,
    };
    let experiment = ExperimentConfig {
        name: file.name.clone().unwrap_or_else(|| inst.name.name().to_owned()),
        instance: InstanceConfig { family: inst.name, params },
        policies,
        horizon: file.horizon,
        runs: file.runs,
        base_seed: file.seed,
        record_stride: file.record_stride,
    };
    experiment.validate().map_err(|e| (String::new(), plain(e)))?;
    Ok(experiment)
}

fn plain(e: lcv_bandit::Error) -> String {
    match e {
        lcv_bandit::Error::Config(m) => m,
        other => other.to_string(),
    }
}

/// Maps dotted key paths to line numbers in the source text.
struct Locator<'a> {
    text: &'a str,
    doc: Option<toml_edit::ImDocument<&'a str>>,
}

impl<'a> Locator<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, doc: toml_edit::ImDocument::parse(text).ok() }
    }

    fn line_of(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    /// Line of the deepest existing key on `path`.
    fn origin_of(&self, path: &str) -> Origin {
        let Some(doc) = &self.doc else { return Origin::Unknown };
        let segments: Vec<&str> = path.split('.').filter(|s| !s.is_empty()).collect();
        locate(doc.as_item(), &segments, None).map_or(Origin::Unknown, |o| Origin::Line(self.line_of(o)))
    }
}

fn locate(item: &toml_edit::Item, segments: &[&str], best: Option<usize>) -> Option<usize> {
    let Some((segment, rest)) = segments.split_first() else { return best };
    let index = segment.parse::<usize>().ok();
    match item {
        toml_edit::Item::ArrayOfTables(a) => match index.and_then(|i| a.get(i)) {
            Some(t) => {
                let here = t.span().map(|s| s.start).or(best);
                locate_in(t, rest, here)
            }
            None => best,
        },
        toml_edit::Item::Value(toml_edit::Value::Array(a)) => {
            index.and_then(|i| a.get(i)).and_then(|v| v.span()).map(|s| s.start).or(best)
        }
        _ => match item.as_table_like() {
            Some(t) => locate_in(t, segments, best),
            None => best,
        },
    }
}

fn locate_in(table: &dyn toml_edit::TableLike, segments: &[&str], best: Option<usize>) -> Option<usize> {
    let Some((segment, rest)) = segments.split_first() else { return best };
    match table.get_key_value(segment) {
        Some((key, child)) => {
            let here = key.span().map(|s| s.start).or(best);
            locate(child, rest, here)
        }
        None => best,
    }
}
