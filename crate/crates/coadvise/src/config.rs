//! Experiment configuration documents.
//!
//! A config names instances (inline, by file, or from the bundled catalog),
//! algorithms with optional rates, a horizon, and seeds. Parsing resolves
//! every reference and checks algorithm/barrier compatibility, so a config
//! that parses can run. [`ExperimentConfig::to_canonical_json`] writes the
//! resolved form, which parses back to an equal config.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use coadvise_core::engine::{check_mode, dimensions, AlgorithmId, AlgorithmSpec};
use coadvise_core::model::Instance;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::catalog;
use crate::error::ConfigError;
use crate::spec::{instance_spec_from_value, parse_instance_spec, InstanceSpec};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEEDS: u64 = 50;
pub const DEFAULT_COUPLE_HORIZONS: [u64; 2] = [500, 2000];
pub const DEFAULT_COUPLE_SEEDS: u64 = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub instances: Vec<InstanceSpec>,
    pub algorithms: Vec<AlgorithmConfig>,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub emit: Emit,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    pub couple: CoupleGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    #[serde(with = "algorithm_name")]
    pub id: AlgorithmId,
    #[serde(default)]
    pub params: AlgorithmParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmParams {
    /// Learning rate; omitted means the tuned default for the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default)]
    pub gamma: f64,
    /// Machine-side rate of the independent pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub machine_eta: Option<f64>,
}

impl AlgorithmConfig {
    pub fn new(id: AlgorithmId) -> Self {
        Self { id, params: AlgorithmParams::default() }
    }

    pub fn spec(&self) -> AlgorithmSpec {
        AlgorithmSpec { id: self.id, eta: self.params.eta, gamma: self.params.gamma, machine_eta: self.params.machine_eta }
    }
}

mod algorithm_name {
    use coadvise_core::engine::AlgorithmId;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(id: &AlgorithmId, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(id.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<AlgorithmId, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(|_| {
            let known: Vec<_> = AlgorithmId::ALL.iter().map(|a| a.name()).collect();
            serde::de::Error::custom(format!("unknown algorithm `{name}` (expected one of {})", known.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Emit {
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub jsonl: bool,
    #[serde(default = "yes")]
    pub plotdata: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Self { csv: true, jsonl: true, plotdata: true }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub horizons: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupleGrid {
    pub horizons: Vec<u64>,
    pub seeds: Vec<u64>,
    pub tol: f64,
}

impl Default for CoupleGrid {
    fn default() -> Self {
        Self { horizons: DEFAULT_COUPLE_HORIZONS.to_vec(), seeds: (0..DEFAULT_COUPLE_SEEDS).collect(), tol: 1e-9 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: Option<u32>,
    instance: Option<Value>,
    #[serde(default)]
    instances: Vec<Value>,
    #[serde(alias = "algorithm")]
    algo: Option<Value>,
    #[serde(default)]
    algorithms: Vec<Value>,
    #[serde(alias = "T")]
    horizon: Option<u64>,
    seeds: Option<Seeds>,
    out: Option<PathBuf>,
    #[serde(default)]
    emit: Emit,
    sweep: Option<Sweep>,
    couple: Option<RawCouple>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCouple {
    horizons: Option<Vec<u64>>,
    seeds: Option<Seeds>,
    tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    fn resolve(self, path: &str) -> Result<Vec<u64>, ConfigError> {
        let seeds = match self {
            Seeds::Count(n) => (0..n).collect(),
            Seeds::List(l) => l,
        };
        if seeds.is_empty() {
            return Err(ConfigError::at(path, "need at least one seed"));
        }
        let distinct: BTreeSet<_> = seeds.iter().collect();
        if distinct.len() != seeds.len() {
            return Err(ConfigError::at(path, "seeds must be distinct"));
        }
        Ok(seeds)
    }
}

/// Reads and validates a config file. Relative instance file paths resolve
/// against the config's directory.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::at("", format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text, path.parent().unwrap_or(Path::new(".")))
}

pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(ConfigError::from_path)?;
    let schema_version = raw.schema_version.unwrap_or(SCHEMA_VERSION);
    if schema_version != SCHEMA_VERSION {
        return Err(ConfigError::at(
            "schema_version",
            format!("unsupported version {schema_version} (this build reads {SCHEMA_VERSION})"),
        ));
    }

    let (refs, field) = match (raw.instance, raw.instances.is_empty()) {
        (Some(_), false) => return Err(ConfigError::at("instance", "give `instance` or `instances`, not both")),
        (Some(one), true) => (vec![one], "instance"),
        (None, false) => (raw.instances, "instances"),
        (None, true) => return Err(ConfigError::at("instances", "need at least one instance")),
    };
    let mut instances = Vec::with_capacity(refs.len());
    for (i, r) in refs.into_iter().enumerate() {
        let path = if field == "instance" { field.to_string() } else { format!("{field}[{i}]") };
        let mut spec = resolve_instance(r, base_dir).map_err(|e| e.within(&path))?;
        if spec.name.is_none() {
            spec.name = Some(spec.generator.name().to_string());
        }
        instances.push((path, spec));
    }
    dedupe_names(&mut instances);

    let (entries, field) = match (raw.algo, raw.algorithms.is_empty()) {
        (Some(_), false) => return Err(ConfigError::at("algo", "give `algo` or `algorithms`, not both")),
        (Some(one), true) => (vec![one], "algo"),
        (None, false) => (raw.algorithms, "algorithms"),
        (None, true) => return Err(ConfigError::at("algorithms", "need at least one algorithm")),
    };
    let mut algorithms = Vec::with_capacity(entries.len());
    for (j, entry) in entries.into_iter().enumerate() {
        let path = if field == "algo" { field.to_string() } else { format!("{field}[{j}]") };
        let algo = match entry {
            Value::String(name) => AlgorithmConfig::new(name.parse().map_err(|_| {
                let known: Vec<_> = AlgorithmId::ALL.iter().map(|a| a.name()).collect();
                ConfigError::at(&path, format!("unknown algorithm `{name}` (expected one of {})", known.join(", ")))
            })?),
            other => serde_path_to_error::deserialize::<_, AlgorithmConfig>(other)
                .map_err(|e| ConfigError::from_path(e).within(&path))?,
        };
        check_rate(algo.params.eta, &format!("{path}.params.eta"))?;
        check_rate(algo.params.machine_eta, &format!("{path}.params.machine_eta"))?;
        check_rate(Some(algo.params.gamma), &format!("{path}.params.gamma"))?;
        algorithms.push((path, algo));
    }

    let horizon = raw.horizon.ok_or_else(|| ConfigError::at("horizon", "missing horizon"))?;
    if horizon == 0 {
        return Err(ConfigError::at("horizon", "must be at least 1"));
    }
    let seeds = raw.seeds.unwrap_or(Seeds::Count(DEFAULT_SEEDS)).resolve("seeds")?;
    if let Some(sweep) = &raw.sweep {
        if sweep.horizons.is_empty() || sweep.horizons.contains(&0) {
            return Err(ConfigError::at("sweep.horizons", "need one or more horizons, each at least 1"));
        }
    }
    let couple = match raw.couple {
        None => CoupleGrid::default(),
        Some(c) => {
            let defaults = CoupleGrid::default();
            let grid = CoupleGrid {
                horizons: c.horizons.unwrap_or(defaults.horizons),
                seeds: match c.seeds {
                    Some(s) => s.resolve("couple.seeds")?,
                    None => defaults.seeds,
                },
                tol: c.tol.unwrap_or(defaults.tol),
            };
            if grid.horizons.is_empty() || grid.horizons.contains(&0) {
                return Err(ConfigError::at("couple.horizons", "need one or more horizons, each at least 1"));
            }
            if !(grid.tol >= 0.0 && grid.tol.is_finite()) {
                return Err(ConfigError::at("couple.tol", "must be finite and non-negative"));
            }
            grid
        }
    };

    for (ipath, spec) in &instances {
        let inst = spec.build(horizon).map_err(|e| ConfigError::at(ipath, e.to_string()))?;
        for (apath, algo) in &algorithms {
            check_mode(algo.id, &inst).map_err(|e| {
                ConfigError::at(apath, format!("{e} (instance `{}` at {ipath})", spec.label()))
            })?;
        }
    }

    Ok(ExperimentConfig {
        schema_version,
        instances: instances.into_iter().map(|(_, s)| s).collect(),
        algorithms: algorithms.into_iter().map(|(_, a)| a).collect(),
        horizon,
        seeds,
        out: raw.out,
        emit: raw.emit,
        sweep: raw.sweep,
        couple,
    })
}

fn check_rate(v: Option<f64>, path: &str) -> Result<(), ConfigError> {
    match v {
        Some(x) if !(x.is_finite() && x >= 0.0) => Err(ConfigError::at(path, format!("{x} is not a finite non-negative rate"))),
        _ => Ok(()),
    }
}

/// An instance entry is a file path, `{"bundled": name}`, or an inline spec.
fn resolve_instance(r: Value, base_dir: &Path) -> Result<InstanceSpec, ConfigError> {
    match r {
        Value::Object(map) if map.contains_key("bundled") => {
            if map.len() != 1 {
                return Err(ConfigError::at("", "a bundled reference takes no other fields"));
            }
            let Some(Value::String(bundled)) = map.get("bundled") else {
                return Err(ConfigError::at("bundled", "expected a catalog name"));
            };
            catalog::lookup(bundled).ok_or_else(|| {
                let have = catalog::names().join(", ");
                ConfigError::at("bundled", format!("unknown bundled instance `{bundled}` (have {have})"))
            })
        }
        Value::String(file) => {
            let file = PathBuf::from(file);
            let path = if file.is_absolute() { file } else { base_dir.join(file) };
            let text = std::fs::read_to_string(&path)
                .map_err(|e| ConfigError::at("", format!("cannot read instance spec {}: {e}", path.display())))?;
            let mut spec = parse_instance_spec(&text)
                .map_err(|e| ConfigError::at(e.path, format!("{} (in {})", e.message, path.display())))?;
            if spec.name.is_none() {
                spec.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
            }
            Ok(spec)
        }
        other => instance_spec_from_value(other),
    }
}

/// Appends `#2`, `#3`, … to repeated names so every output row is unambiguous.
fn dedupe_names(instances: &mut [(String, InstanceSpec)]) {
    let mut seen: Vec<String> = Vec::new();
    for (_, spec) in instances.iter_mut() {
        let base = spec.label().to_string();
        let mut name = base.clone();
        let mut n = 1;
        while seen.contains(&name) {
            n += 1;
            name = format!("{base}#{n}");
        }
        seen.push(name.clone());
        spec.name = Some(name);
    }
}

impl ExperimentConfig {
    /// Pretty-printed resolved config; parsing it yields an equal config.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes to JSON");
        s.push('\n');
        s
    }

    /// `(learner η, machine η)` for one algorithm on one built instance.
    pub fn rates(&self, algorithm: usize, inst: &Instance, horizon: u64) -> (Option<f64>, Option<f64>) {
        self.algorithms[algorithm].spec().resolved_rates(dimensions(inst, horizon))
    }

    /// Horizons of a sweep, or the single configured horizon.
    pub fn sweep_horizons(&self) -> Vec<u64> {
        self.sweep.as_ref().map_or_else(|| vec![self.horizon], |s| s.horizons.clone())
    }

    pub fn with_seed_count(mut self, n: u64) -> Self {
        self.seeds = (0..n).collect();
        self
    }
}
