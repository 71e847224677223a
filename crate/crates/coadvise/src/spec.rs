//! Instance spec documents: `{generator, params, env_seed}`.

use std::fmt;

use coadvise_core::envgen::{
    make_conjecture, make_opacity_lb, make_private_info_lb, make_randomized_lb, make_tabular, AllocationRule, Atom,
    BernoulliArms, Payoff, RandomTabular,
};
use coadvise_core::model::{ContextRule, HumanPolicy, Instance, MachinePolicy, RecommendationSpace};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ConfigError;

/// Generator names accepted in the `generator` field.
pub const GENERATORS: [&str; 8] =
    ["private_info_lb", "opacity_lb", "randomized_lb", "conjecture", "random_tabular", "allocation", "defer", "tabular"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstanceSpec", into = "RawInstanceSpec")]
pub struct InstanceSpec {
    pub name: Option<String>,
    pub generator: Generator,
    pub env_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstanceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    generator: String,
    #[serde(default = "empty_params")]
    params: Value,
    #[serde(default)]
    env_seed: u64,
}

fn empty_params() -> Value {
    Value::Object(Default::default())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    PrivateInfo(ArmsParams),
    Opacity(ArmsParams),
    Randomized(ArmsParams),
    Conjecture(ConjectureParams),
    RandomTabular(TabularParams),
    Allocation(AllocationParams),
    Defer(DeferParams),
    Tabular(ExplicitParams),
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Self::PrivateInfo(_) => "private_info_lb",
            Self::Opacity(_) => "opacity_lb",
            Self::Randomized(_) => "randomized_lb",
            Self::Conjecture(_) => "conjecture",
            Self::RandomTabular(_) => "random_tabular",
            Self::Allocation(_) => "allocation",
            Self::Defer(_) => "defer",
            Self::Tabular(_) => "tabular",
        }
    }
}

/// Arm means, either listed or as one arm `gap` above the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmsParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<Gap>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gap {
    Value(f64),
    Rule(GapRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapRule {
    /// `√(N₁/T)`, recomputed for every horizon.
    SqrtArmsOverHorizon,
}

impl ArmsParams {
    fn validate(&self) -> Result<(), ConfigError> {
        match (&self.means, self.arms, self.base, self.gap) {
            (Some(m), None, None, None) if m.iter().all(|v| (0.0..=1.0).contains(v)) && m.len() >= 2 => Ok(()),
            (Some(_), None, None, None) => {
                Err(ConfigError::at("params.means", "need at least two means, each in [0, 1]"))
            }
            (None, Some(n), Some(b), Some(_)) if n >= 2 && (0.0..=1.0).contains(&b) => Ok(()),
            (None, Some(_), Some(_), Some(_)) => {
                Err(ConfigError::at("params", "need arms >= 2 and base in [0, 1]"))
            }
            _ => Err(ConfigError::at("params", "give either `means` or all of `arms`, `base`, `gap`")),
        }
    }

    pub fn resolve(&self, horizon: u64) -> coadvise_core::Result<BernoulliArms> {
        if let Some(m) = &self.means {
            return BernoulliArms::new(m.clone());
        }
        let n = self.arms.unwrap_or(0);
        let gap = match self.gap {
            Some(Gap::Value(g)) => g,
            Some(Gap::Rule(GapRule::SqrtArmsOverHorizon)) => (n as f64 / horizon.max(1) as f64).sqrt(),
            None => 0.0,
        };
        BernoulliArms::single_gap(n, self.base.unwrap_or(0.5), gap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjectureParams {
    pub n1: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabularParams {
    pub n1: usize,
    pub n2: usize,
    #[serde(default = "two")]
    pub actions: usize,
    #[serde(default = "four")]
    pub contexts: usize,
    #[serde(default)]
    pub shared: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recommendations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationParams {
    pub n1: usize,
    pub n2: usize,
    #[serde(default = "two")]
    pub actions: usize,
    #[serde(default = "four")]
    pub contexts: usize,
    pub rule: AllocationRuleSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AllocationRuleSpec {
    Machine,
    Human,
    /// Probability that a human context is handed to the human.
    Random(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeferParams {
    pub n1: usize,
    #[serde(default = "two")]
    pub actions: usize,
    #[serde(default = "four")]
    pub contexts: usize,
}

fn two() -> usize {
    2
}

fn four() -> usize {
    4
}

/// A hand-written tabular instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitParams {
    pub atoms: Vec<AtomSpec>,
    pub machine: Vec<MachineSpec>,
    pub human: Vec<HumanSpec>,
    #[serde(default)]
    pub recommendations: RecommendationSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub prob: f64,
    pub x: u64,
    pub z: u64,
    pub payoff: PayoffSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PayoffSpec {
    Bernoulli(Vec<f64>),
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MachineSpec {
    Constant(usize),
    /// Output per context `x`.
    Table(Vec<usize>),
    ContextBit(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HumanSpec {
    Follow,
    ContextBit,
    Constant(usize),
    /// Action per context `z`, ignoring the recommendation.
    ContextTable(Vec<usize>),
    /// Action at `actions[r * contexts + z]`.
    Table { contexts: usize, actions: Vec<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RecommendationSpec {
    #[default]
    Actions,
    ActionsPlusDefer,
    Finite(usize),
}

fn parse_params<T: DeserializeOwned>(params: Value) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(params).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { "params".to_string() } else { format!("params.{inner}") };
        ConfigError::at(path, e.into_inner().to_string())
    })
}

impl TryFrom<RawInstanceSpec> for InstanceSpec {
    type Error = ConfigError;

    fn try_from(raw: RawInstanceSpec) -> Result<Self, ConfigError> {
        let generator = match raw.generator.as_str() {
            "private_info_lb" => Generator::PrivateInfo(parse_params(raw.params)?),
            "opacity_lb" => Generator::Opacity(parse_params(raw.params)?),
            "randomized_lb" => Generator::Randomized(parse_params(raw.params)?),
            "conjecture" => Generator::Conjecture(parse_params(raw.params)?),
            "random_tabular" => Generator::RandomTabular(parse_params(raw.params)?),
            "allocation" => Generator::Allocation(parse_params(raw.params)?),
            "defer" => Generator::Defer(parse_params(raw.params)?),
            "tabular" => Generator::Tabular(parse_params(raw.params)?),
            other => {
                return Err(ConfigError::at(
                    "generator",
                    format!("unknown generator `{other}` (expected one of {})", GENERATORS.join(", ")),
                ))
            }
        };
        let spec = InstanceSpec { name: raw.name, generator, env_seed: raw.env_seed };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<InstanceSpec> for RawInstanceSpec {
    fn from(spec: InstanceSpec) -> Self {
        let params = match &spec.generator {
            Generator::PrivateInfo(p) | Generator::Opacity(p) | Generator::Randomized(p) => serde_json::to_value(p),
            Generator::Conjecture(p) => serde_json::to_value(p),
            Generator::RandomTabular(p) => serde_json::to_value(p),
            Generator::Allocation(p) => serde_json::to_value(p),
            Generator::Defer(p) => serde_json::to_value(p),
            Generator::Tabular(p) => serde_json::to_value(p),
        }
        .expect("parameter structs serialize to JSON");
        RawInstanceSpec { name: spec.name, generator: spec.generator.name().into(), params, env_seed: spec.env_seed }
    }
}

impl InstanceSpec {
    pub fn new(generator: Generator, env_seed: u64) -> Self {
        Self { name: None, generator, env_seed }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Display name: the explicit name, else the generator name.
    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or(self.generator.name())
    }

    /// Range checks that do not need the instance built.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |v: usize, field: &str| {
            if v == 0 {
                Err(ConfigError::at(format!("params.{field}"), "must be at least 1"))
            } else {
                Ok(())
            }
        };
        match &self.generator {
            Generator::PrivateInfo(p) | Generator::Opacity(p) | Generator::Randomized(p) => p.validate(),
            Generator::Conjecture(p) => {
                if p.n1 == 0 || p.n1 > 32 {
                    return Err(ConfigError::at("params.n1", "must be in 1..=32"));
                }
                if !(p.delta > 0.0 && p.delta <= 0.5) {
                    return Err(ConfigError::at("params.delta", format!("delta {} outside (0, 0.5]", p.delta)));
                }
                Ok(())
            }
            Generator::RandomTabular(p) => {
                positive(p.n1, "n1")?;
                positive(p.n2, "n2")?;
                positive(p.contexts, "contexts")?;
                if p.actions < 2 {
                    return Err(ConfigError::at("params.actions", "need at least two actions"));
                }
                Ok(())
            }
            Generator::Allocation(p) => {
                positive(p.n1, "n1")?;
                positive(p.n2, "n2")?;
                positive(p.contexts, "contexts")?;
                if p.actions < 2 {
                    return Err(ConfigError::at("params.actions", "need at least two actions"));
                }
                match p.rule {
                    AllocationRuleSpec::Random(q) if !(0.0..=1.0).contains(&q) => {
                        Err(ConfigError::at("params.rule.random", "probability outside [0, 1]"))
                    }
                    _ => Ok(()),
                }
            }
            Generator::Defer(p) => {
                positive(p.n1, "n1")?;
                positive(p.contexts, "contexts")?;
                if p.actions < 2 {
                    return Err(ConfigError::at("params.actions", "need at least two actions"));
                }
                Ok(())
            }
            Generator::Tabular(p) => {
                if p.atoms.is_empty() {
                    return Err(ConfigError::at("params.atoms", "must not be empty"));
                }
                if p.machine.is_empty() {
                    return Err(ConfigError::at("params.machine", "must not be empty"));
                }
                if p.human.is_empty() {
                    return Err(ConfigError::at("params.human", "must not be empty"));
                }
                Ok(())
            }
        }
    }

    /// Builds the instance for an episode of length `horizon`. Some
    /// generators size their context range or gap from the horizon.
    pub fn build(&self, horizon: u64) -> coadvise_core::Result<Instance> {
        let seed = self.env_seed;
        let inst = match &self.generator {
            Generator::PrivateInfo(p) => make_private_info_lb(&p.resolve(horizon)?)?,
            Generator::Opacity(p) => make_opacity_lb(&p.resolve(horizon)?, horizon, seed)?,
            Generator::Randomized(p) => make_randomized_lb(&p.resolve(horizon)?, horizon, seed)?,
            Generator::Conjecture(p) => make_conjecture(p.n1, p.delta, seed)?,
            Generator::RandomTabular(p) => {
                let mut g = RandomTabular::new(p.n1, p.n2, p.actions, p.contexts);
                g.shared_context = p.shared;
                g.recommendations = p.recommendations;
                g.build(seed)?
            }
            Generator::Allocation(p) => {
                let rule = match p.rule {
                    AllocationRuleSpec::Machine => AllocationRule::AlwaysMachine,
                    AllocationRuleSpec::Human => AllocationRule::AlwaysHuman,
                    AllocationRuleSpec::Random(q) => AllocationRule::Random(q),
                };
                RandomTabular::new(p.n1, p.n2, p.actions, p.contexts).build_allocation(rule, seed)?
            }
            Generator::Defer(p) => RandomTabular::new(p.n1, 1, p.actions, p.contexts).build_defer(seed)?,
            Generator::Tabular(p) => build_explicit(p)?,
        };
        Ok(inst.with_name(self.label()))
    }
}

fn build_explicit(p: &ExplicitParams) -> coadvise_core::Result<Instance> {
    let atoms: Vec<Atom> = p
        .atoms
        .iter()
        .map(|a| Atom {
            prob: a.prob,
            x: a.x,
            z: a.z,
            payoff: match &a.payoff {
                PayoffSpec::Bernoulli(m) => Payoff::Bernoulli(m.clone()),
                PayoffSpec::Fixed(v) => Payoff::Fixed(v.clone()),
            },
        })
        .collect();
    let k = atoms.first().map_or(0, |a| a.payoff.means().len());
    let machine = p
        .machine
        .iter()
        .map(|m| match m {
            MachineSpec::Constant(r) => MachinePolicy::Constant(*r),
            MachineSpec::Table(t) => MachinePolicy::Table(t.clone()),
            MachineSpec::ContextBit(b) => MachinePolicy::ContextBit(*b),
        })
        .collect();
    let human = p
        .human
        .iter()
        .map(|h| match h {
            HumanSpec::Follow => HumanPolicy::Follow,
            HumanSpec::ContextBit => HumanPolicy::ContextBit,
            HumanSpec::Constant(a) => HumanPolicy::Rule(ContextRule::Constant(*a)),
            HumanSpec::ContextTable(t) => HumanPolicy::Rule(ContextRule::Table(t.clone())),
            HumanSpec::Table { contexts, actions } => HumanPolicy::Table { contexts: *contexts, actions: actions.clone() },
        })
        .collect();
    let recs = match p.recommendations {
        RecommendationSpec::Actions => RecommendationSpace::Actions(k),
        RecommendationSpec::ActionsPlusDefer => RecommendationSpace::ActionsPlusDefer(k),
        RecommendationSpec::Finite(n) => RecommendationSpace::Finite(n),
    };
    make_tabular(atoms, machine, human, recs)
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}, env_seed {})", self.label(), self.generator.name(), self.env_seed)
    }
}

/// Parses a standalone spec document.
pub fn parse_instance_spec(text: &str) -> Result<InstanceSpec, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::at("", e.to_string()))?;
    instance_spec_from_value(value)
}

/// Like deserializing an [`InstanceSpec`], but keeps the path of a bad
/// parameter instead of flattening it into the message.
pub fn instance_spec_from_value(value: Value) -> Result<InstanceSpec, ConfigError> {
    let raw: RawInstanceSpec = serde_path_to_error::deserialize(value).map_err(ConfigError::from_path)?;
    InstanceSpec::try_from(raw)
}
