//! Instance constructions: generic tabular environments, the two lower-bound
//! families and their randomized variant, the conjectured hard instance, and
//! the allocation and learning-to-defer settings.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::env::{Atom, Conjecture, Environment, OpaqueArms, Payoff, PrivateArms, ShuffledArms, Tabular};
use super::lazy::{BernoulliTable, PermutationTable, WinnerTable, MAX_ARMS};
use crate::error::{Error, Result};
use crate::model::{
    Allocator, ContextRule, HumanPolicy, Instance, MachinePolicy, Oracle, RecommendationSpace, DEFAULT_MC_SAMPLES,
};
use crate::rng::Stream;

const PLANT_DOMAIN: u64 = 0xc0;
const TABULAR_DOMAIN: u64 = 0x7a;

/// Means of an `N₁`-armed Bernoulli bandit.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliArms {
    means: Vec<f64>,
}

impl BernoulliArms {
    pub fn new(means: Vec<f64>) -> Result<Self> {
        if means.is_empty() || means.len() > MAX_ARMS {
            return Err(Error::Validation(format!("need 1..={MAX_ARMS} arms, got {}", means.len())));
        }
        if let Some(m) = means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(Error::Validation(format!("arm mean {m} outside [0, 1]")));
        }
        Ok(Self { means })
    }

    /// One arm at `base + gap`, the rest at `base`.
    pub fn single_gap(n: usize, base: f64, gap: f64) -> Result<Self> {
        let mut means = vec![base; n];
        if let Some(first) = means.first_mut() {
            *first = base + gap;
        }
        Self::new(means)
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    fn require_two(&self) -> Result<()> {
        if self.means.len() < 2 {
            return Err(Error::Validation("lower-bound constructions need at least two arms".into()));
        }
        Ok(())
    }
}

/// Context range `M = 50·T²`: a repeat among `T` uniform draws has
/// probability at most `T²/(2M) = 1%`.
pub fn contexts_for_horizon(horizon: u64) -> Result<u64> {
    horizon
        .checked_mul(horizon)
        .and_then(|t2| t2.checked_mul(50))
        .filter(|_| horizon > 0)
        .ok_or_else(|| Error::Validation(format!("horizon {horizon} gives no usable context range")))
}

pub fn make_tabular(
    atoms: Vec<Atom>,
    machine: Vec<MachinePolicy>,
    human: Vec<HumanPolicy>,
    recommendations: RecommendationSpace,
) -> Result<Instance> {
    let env = Environment::Tabular(Tabular::new(atoms)?);
    Instance::new("tabular", env, machine, human, recommendations, Oracle::Auto { mc_samples: DEFAULT_MC_SAMPLES, seed: 0 })
}

fn constant_policies(n: usize) -> Vec<MachinePolicy> {
    (0..n).map(MachinePolicy::Constant).collect()
}

/// Lower bound through private information: the machine must solve the
/// Bernoulli bandit `arms` blind, the fixed human reads arm payoffs from `z`.
pub fn make_private_info_lb(arms: &BernoulliArms) -> Result<Instance> {
    arms.require_two()?;
    let n1 = arms.len();
    Instance::new(
        format!("private_info_lb(n1={n1})"),
        Environment::PrivateArms(PrivateArms { means: arms.means.clone() }),
        constant_policies(n1),
        vec![HumanPolicy::ContextBit],
        RecommendationSpace::Finite(n1),
        Oracle::ClosedForm(arms.means.clone()),
    )
}

/// Lower bound through opacity: both players see `x`, but only the human's
/// policy knows the lookup `ĝ` that turns it into arm payoffs.
pub fn make_opacity_lb(arms: &BernoulliArms, horizon: u64, env_seed: u64) -> Result<Instance> {
    arms.require_two()?;
    let n1 = arms.len();
    let table = BernoulliTable::new(env_seed, &arms.means)?;
    Instance::new(
        format!("opacity_lb(n1={n1})"),
        Environment::OpaqueArms(OpaqueArms { contexts: contexts_for_horizon(horizon)?, table: table.clone() }),
        constant_policies(n1),
        vec![HumanPolicy::LazyBit(table)],
        RecommendationSpace::Finite(n1),
        Oracle::ClosedForm(arms.means.clone()),
    )
}

/// Private-information lower bound with recommendations shuffled per context
/// and a random winning action per context, so neither the policy behind a
/// recommendation nor the paying action can be learned before `T`.
pub fn make_randomized_lb(arms: &BernoulliArms, horizon: u64, env_seed: u64) -> Result<Instance> {
    arms.require_two()?;
    let n1 = arms.len();
    let permutation = PermutationTable::new(env_seed, n1)?;
    let winners = WinnerTable::new(env_seed);
    Instance::new(
        format!("randomized_lb(n1={n1})"),
        Environment::ShuffledArms(ShuffledArms {
            contexts: contexts_for_horizon(horizon)?,
            means: arms.means.clone(),
            permutation,
            winners,
        }),
        (0..n1).map(|slot| MachinePolicy::Permuted { slot, table: permutation }).collect(),
        vec![HumanPolicy::PermutedArm { permutation, winners }],
        RecommendationSpace::Finite(n1),
        Oracle::ClosedForm(arms.means.clone()),
    )
}

/// The conjectured hard instance with `R = A = {0,1}` and `N₁ = N₂ = n1`.
/// The planted pair is drawn from `env_seed`.
pub fn make_conjecture(n1: usize, delta: f64, env_seed: u64) -> Result<Instance> {
    let mut s = Stream::keyed(env_seed, PLANT_DOMAIN, 0);
    let conj = Conjecture {
        n: n1,
        delta,
        optimal_machine: s.below(n1.max(1) as u64) as usize,
        optimal_human: s.below(n1.max(1) as u64) as usize,
    };
    let mut values = vec![0.5; n1 * n1];
    if conj.optimal_machine < n1 {
        values[conj.optimal_machine * n1 + conj.optimal_human] = 0.5 + delta;
    }
    Instance::new(
        format!("conjecture(n1={n1},delta={delta})"),
        Environment::Conjecture(conj),
        (0..n1 as u32).map(MachinePolicy::ContextBit).collect(),
        (0..n1).map(HumanPolicy::MapSlot).collect(),
        RecommendationSpace::Actions(2),
        Oracle::ClosedForm(values),
    )
}

/// Fixed allocation of decisions: each human policy plays its own rule where
/// `allocator` hands the case to the human and follows the machine elsewhere.
pub fn make_allocation(
    base_env: Environment,
    recommendations: RecommendationSpace,
    allocator: Allocator,
    human_rules: Vec<ContextRule>,
    machine: Vec<MachinePolicy>,
    oracle: Oracle,
) -> Result<Instance> {
    if !recommendations.is_actions() {
        return Err(Error::Validation("allocation rules need recommendations equal to actions".into()));
    }
    let human = human_rules
        .into_iter()
        .map(|rule| HumanPolicy::Allocated { allocator: allocator.clone(), rule })
        .collect();
    Instance::new("allocation", base_env, machine, human, recommendations, oracle)
}

/// Learning to defer: the machine plays an action or the defer symbol, and a
/// fixed human decides the deferred cases.
pub fn make_defer(base_env: Environment, fixed_human: ContextRule, machine: Vec<MachinePolicy>, oracle: Oracle) -> Result<Instance> {
    let k = base_env.action_count();
    if fixed_human.max_output().is_some_and(|a| a >= k) {
        return Err(Error::Validation("fixed human plays outside the action set".into()));
    }
    let human = vec![HumanPolicy::Defer { defer: k, rule: fixed_human }];
    Instance::new("defer", base_env, machine, human, RecommendationSpace::ActionsPlusDefer(k), oracle)
}

/// Who decides in a randomly generated allocation instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AllocationRule {
    AlwaysMachine,
    AlwaysHuman,
    /// Each human context goes to the human with this probability.
    Random(f64),
}

/// Random tabular instances with uniform contexts, Bernoulli payoffs with
/// uniform means, and uniformly random policy tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomTabular {
    pub n1: usize,
    pub n2: usize,
    pub actions: usize,
    pub contexts: usize,
    /// `x = z` on every atom.
    pub shared_context: bool,
    /// Size of a finite recommendation alphabet; `None` means `R = A`.
    pub recommendations: Option<usize>,
}

impl RandomTabular {
    pub fn new(n1: usize, n2: usize, actions: usize, contexts: usize) -> Self {
        Self { n1, n2, actions, contexts, shared_context: false, recommendations: None }
    }

    pub fn shared(mut self) -> Self {
        self.shared_context = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 || self.actions < 2 || self.contexts == 0 {
            return Err(Error::Validation(format!("degenerate random tabular dimensions {self:?}")));
        }
        if self.contexts > 4096 {
            return Err(Error::Validation("random tabular instances support at most 4096 contexts".into()));
        }
        Ok(())
    }

    fn rec_space(&self) -> RecommendationSpace {
        match self.recommendations {
            Some(n) => RecommendationSpace::Finite(n),
            None => RecommendationSpace::Actions(self.actions),
        }
    }

    /// Environment alone, drawn from `stream`.
    pub fn environment(&self, stream: &mut Stream) -> Result<Environment> {
        self.validate()?;
        let c = self.contexts as u64;
        let pairs: Vec<(u64, u64)> = if self.shared_context {
            (0..c).map(|x| (x, x)).collect()
        } else {
            (0..c).flat_map(|x| (0..c).map(move |z| (x, z))).collect()
        };
        let prob = 1.0 / pairs.len() as f64;
        let atoms = pairs
            .into_iter()
            .map(|(x, z)| Atom {
                prob,
                x,
                z,
                payoff: Payoff::Bernoulli((0..self.actions).map(|_| stream.uniform()).collect()),
            })
            .collect();
        Ok(Environment::Tabular(Tabular::new(atoms)?))
    }

    fn machine_tables(&self, recs: usize, stream: &mut Stream) -> Vec<MachinePolicy> {
        (0..self.n1)
            .map(|_| MachinePolicy::Table((0..self.contexts).map(|_| stream.below(recs as u64) as usize).collect()))
            .collect()
    }

    fn context_rule(&self, stream: &mut Stream) -> ContextRule {
        ContextRule::Table((0..self.contexts).map(|_| stream.below(self.actions as u64) as usize).collect())
    }

    pub fn build(&self, seed: u64) -> Result<Instance> {
        let mut s = Stream::keyed(seed, TABULAR_DOMAIN, 0);
        let env = self.environment(&mut s)?;
        let recs = self.rec_space();
        let machine = self.machine_tables(recs.size(), &mut s);
        let human = (0..self.n2)
            .map(|_| HumanPolicy::Table {
                contexts: self.contexts,
                actions: (0..recs.size() * self.contexts).map(|_| s.below(self.actions as u64) as usize).collect(),
            })
            .collect();
        let name = format!("random_tabular(n1={},n2={},k={})", self.n1, self.n2, self.actions);
        Instance::new(name, env, machine, human, recs, Oracle::Auto { mc_samples: DEFAULT_MC_SAMPLES, seed })
    }

    pub fn build_allocation(&self, rule: AllocationRule, seed: u64) -> Result<Instance> {
        let mut s = Stream::keyed(seed, TABULAR_DOMAIN, 1);
        let env = self.environment(&mut s)?;
        let machine = self.machine_tables(self.actions, &mut s);
        let allocator = match rule {
            AllocationRule::AlwaysMachine => Allocator::Constant(false),
            AllocationRule::AlwaysHuman => Allocator::Constant(true),
            AllocationRule::Random(p) => Allocator::Table((0..self.contexts).map(|_| s.bernoulli(p)).collect()),
        };
        let rules = (0..self.n2).map(|_| self.context_rule(&mut s)).collect();
        let inst = make_allocation(
            env,
            RecommendationSpace::Actions(self.actions),
            allocator,
            rules,
            machine,
            Oracle::Auto { mc_samples: DEFAULT_MC_SAMPLES, seed },
        )?;
        Ok(inst.with_name(format!("allocation(n1={},n2={},k={})", self.n1, self.n2, self.actions)))
    }

    /// Learning-to-defer instance; `n2` is ignored since the human is fixed.
    pub fn build_defer(&self, seed: u64) -> Result<Instance> {
        let mut s = Stream::keyed(seed, TABULAR_DOMAIN, 2);
        let env = self.environment(&mut s)?;
        let machine = self.machine_tables(self.actions + 1, &mut s);
        let human = self.context_rule(&mut s);
        let inst = make_defer(env, human, machine, Oracle::Auto { mc_samples: DEFAULT_MC_SAMPLES, seed })?;
        Ok(inst.with_name(format!("defer(n1={},k={})", self.n1, self.actions)))
    }
}
