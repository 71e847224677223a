use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::policy::{eval_joint, HumanPolicy, MachinePolicy};
use super::spaces::{ActionSpace, JointPolicyIndex, RecommendationSpace};
use crate::envgen::{Draw, Environment};
use crate::error::{range, Error, Result};
use crate::rng::{Stream, Substream};

/// Default Monte Carlo sample count per value table.
pub const DEFAULT_MC_SAMPLES: u64 = 1_000_000;

/// How an instance obtains `Y(π)` for every joint policy.
#[derive(Debug, Clone, PartialEq)]
pub enum Oracle {
    /// Generator-supplied exact values, row-major `n1 × n2`.
    ClosedForm(Vec<f64>),
    /// Enumerate the support when possible, else Monte Carlo.
    Auto { mc_samples: u64, seed: u64 },
}

impl Default for Oracle {
    fn default() -> Self {
        Self::Auto { mc_samples: DEFAULT_MC_SAMPLES, seed: 0 }
    }
}

/// Expected reward of every joint policy, row-major `n1 × n2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    n2: usize,
    values: Vec<f64>,
    std_errors: Option<Vec<f64>>,
    samples: u64,
}

impl ValueTable {
    pub fn exact(&self) -> bool {
        self.std_errors.is_none()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n2 + j]
    }

    pub fn std_error(&self, i: usize, j: usize) -> f64 {
        self.std_errors.as_ref().map_or(0.0, |se| se[i * self.n2 + j])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }
}

/// An environment bundled with both policy sets and its value oracle.
#[derive(Debug, Clone)]
pub struct Instance {
    name: String,
    env: Environment,
    machine: Vec<MachinePolicy>,
    human: Vec<HumanPolicy>,
    actions: ActionSpace,
    recommendations: RecommendationSpace,
    values: ValueTable,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        env: Environment,
        machine: Vec<MachinePolicy>,
        human: Vec<HumanPolicy>,
        recommendations: RecommendationSpace,
        oracle: Oracle,
    ) -> Result<Self> {
        env.validate()?;
        let actions = ActionSpace::new(env.action_count())?;
        recommendations.validate(actions)?;
        if machine.is_empty() || human.is_empty() {
            return Err(Error::Validation("both policy sets must be non-empty".into()));
        }
        let atoms = env.atoms();
        if let Some(atoms) = &atoms {
            check_totality(atoms, &machine, &human, actions, recommendations)?;
        }
        let (n1, n2) = (machine.len(), human.len());
        let values = match oracle {
            Oracle::ClosedForm(values) => {
                if values.len() != n1 * n2 {
                    return Err(Error::Validation(format!("closed form has {} values, need {}", values.len(), n1 * n2)));
                }
                ValueTable { n2, values, std_errors: None, samples: 0 }
            }
            Oracle::Auto { mc_samples, seed } => match &atoms {
                Some(atoms) => enumerate_values(atoms, &machine, &human)?,
                None => monte_carlo_values(&env, &machine, &human, mc_samples, seed)?,
            },
        };
        Ok(Self { name: name.into(), env, machine, human, actions, recommendations, values })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn machine_policies(&self) -> &[MachinePolicy] {
        &self.machine
    }

    pub fn human_policies(&self) -> &[HumanPolicy] {
        &self.human
    }

    pub fn n1(&self) -> usize {
        self.machine.len()
    }

    pub fn n2(&self) -> usize {
        self.human.len()
    }

    pub fn actions(&self) -> ActionSpace {
        self.actions
    }

    pub fn recommendations(&self) -> RecommendationSpace {
        self.recommendations
    }

    pub fn values(&self) -> &ValueTable {
        &self.values
    }

    pub fn exact_oracle(&self) -> bool {
        self.values.exact()
    }

    pub fn shared_context(&self) -> bool {
        self.env.shared_context()
    }

    pub fn joint_action(&self, i: usize, j: usize, x: u64, z: u64) -> Result<usize> {
        eval_joint(&self.machine[i], &self.human[j], x, z)
    }

    /// Realized payoff of every joint policy on one draw, row-major.
    pub fn realized_rewards(&self, draw: &Draw, out: &mut Vec<f64>) -> Result<()> {
        out.clear();
        for f in &self.machine {
            let r = f.recommend(draw.x)?;
            for g in &self.human {
                out.push(draw.payoffs[g.act(r, draw.z)?]);
            }
        }
        Ok(())
    }
}

/// `Y(π)` with its standard error (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub exact: bool,
}

pub fn expected_reward(inst: &Instance, i: usize, j: usize) -> Result<Estimate> {
    if i >= inst.n1() {
        return Err(range("machine policy", i, inst.n1()));
    }
    if j >= inst.n2() {
        return Err(range("human policy", j, inst.n2()));
    }
    Ok(Estimate { value: inst.values.get(i, j), std_error: inst.values.std_error(i, j), exact: inst.exact_oracle() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestPair {
    pub index: JointPolicyIndex,
    pub value: f64,
}

/// Argmax of `Y(π)`; the lowest `(i, j)` wins ties.
pub fn best_pair(inst: &Instance) -> BestPair {
    let n2 = inst.n2();
    let (flat, value) = inst
        .values
        .values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best });
    BestPair { index: JointPolicyIndex::from_flat(flat, n2), value }
}

fn check_totality(
    atoms: &[crate::envgen::Atom],
    machine: &[MachinePolicy],
    human: &[HumanPolicy],
    actions: ActionSpace,
    recs: RecommendationSpace,
) -> Result<()> {
    for (i, f) in machine.iter().enumerate() {
        for atom in atoms {
            let r = f.recommend(atom.x).map_err(|e| Error::Validation(format!("machine policy {i}: {e}")))?;
            if r >= recs.size() {
                return Err(Error::Validation(format!("machine policy {i} recommends {r} outside 0..{}", recs.size())));
            }
        }
    }
    for (j, g) in human.iter().enumerate() {
        for atom in atoms {
            for r in 0..recs.size() {
                let a = g.act(r, atom.z).map_err(|e| Error::Validation(format!("human policy {j}: {e}")))?;
                if a >= actions.count() {
                    return Err(Error::Validation(format!("human policy {j} plays {a} outside 0..{}", actions.count())));
                }
            }
        }
    }
    Ok(())
}

fn enumerate_values(atoms: &[crate::envgen::Atom], machine: &[MachinePolicy], human: &[HumanPolicy]) -> Result<ValueTable> {
    let n2 = human.len();
    let mut values = vec![0.0; machine.len() * n2];
    for atom in atoms {
        if atom.prob == 0.0 {
            continue;
        }
        let means = atom.payoff.means();
        for (i, f) in machine.iter().enumerate() {
            let r = f.recommend(atom.x)?;
            for (j, g) in human.iter().enumerate() {
                values[i * n2 + j] += atom.prob * means[g.act(r, atom.z)?];
            }
        }
    }
    Ok(ValueTable { n2, values, std_errors: None, samples: 0 })
}

/// Common-random-number Monte Carlo estimate of every `Y(π)`.
pub fn monte_carlo_values(
    env: &Environment,
    machine: &[MachinePolicy],
    human: &[HumanPolicy],
    samples: u64,
    seed: u64,
) -> Result<ValueTable> {
    if samples == 0 {
        return Err(Error::Config("Monte Carlo oracle needs a positive sample count".into()));
    }
    let n2 = human.len();
    let n = machine.len() * n2;
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    let mut stream = Stream::new(seed, Substream::Oracle);
    let mut draw = Draw::default();
    for _ in 0..samples {
        env.sample_into(&mut stream, &mut draw);
        for (i, f) in machine.iter().enumerate() {
            let r = f.recommend(draw.x)?;
            for (j, g) in human.iter().enumerate() {
                let y = draw.payoffs[g.act(r, draw.z)?];
                sum[i * n2 + j] += y;
                sum_sq[i * n2 + j] += y * y;
            }
        }
    }
    let m = samples as f64;
    let values: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let std_errors = values
        .iter()
        .zip(&sum_sq)
        .map(|(mean, sq)| {
            let var = (sq / m - mean * mean).max(0.0) * m / (m - 1.0).max(1.0);
            libm::sqrt(var / m)
        })
        .collect();
    Ok(ValueTable { n2, values, std_errors: Some(std_errors), samples })
}
