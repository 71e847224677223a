use alloc::boxed::Box;
use alloc::format;

use super::barrier::{BarrierMode, HumanAgent, MachineAgent};
use crate::agents::sides::{
    DirectedMachine, Exp4Human, FixedMachine, IndepHuman, IndepMachine, JointHuman, JointMachine, MossHuman,
    MossMachine, P2Exp4Human,
};
use crate::agents::{Exp4Params, JointExp4, MossState, P2Exp4};
use crate::error::{Error, Result};
use crate::model::{BoundKind, Dimensions, Instance};
use crate::rng::{Stream, Substream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmId {
    /// One decision maker running EXP4 over every joint policy.
    Exp4,
    /// Joint EXP4 split into machine and human replicas.
    JointExp4,
    /// Exponential weights with a human-to-machine directive channel.
    P2Exp4,
    /// MOSS over all policy pairs, replayed by both players.
    MossPairs,
    /// Two independent EXP4 learners.
    IndepPair,
}

impl AlgorithmId {
    pub const ALL: [Self; 5] = [Self::Exp4, Self::JointExp4, Self::P2Exp4, Self::MossPairs, Self::IndepPair];

    pub fn name(self) -> &'static str {
        match self {
            Self::Exp4 => "exp4",
            Self::JointExp4 => "joint_exp4",
            Self::P2Exp4 => "p2exp4",
            Self::MossPairs => "moss_pairs",
            Self::IndepPair => "indep_pair",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn mode(self) -> BarrierMode {
        match self {
            Self::Exp4 | Self::JointExp4 => BarrierMode::Open,
            Self::P2Exp4 => BarrierMode::Directive,
            Self::MossPairs | Self::IndepPair => BarrierMode::Full,
        }
    }

    pub fn bound_kind(self) -> BoundKind {
        match self {
            Self::Exp4 | Self::JointExp4 => BoundKind::JointExp4,
            Self::P2Exp4 => BoundKind::P2Exp4,
            Self::MossPairs => BoundKind::MossPairs,
            Self::IndepPair => BoundKind::Independent,
        }
    }
}

/// The barrier an instance admits without further assumptions: open when
/// both players always share one context, full otherwise.
pub fn instance_mode(inst: &Instance) -> BarrierMode {
    if inst.shared_context() {
        BarrierMode::Open
    } else {
        BarrierMode::Full
    }
}

/// Fails when the algorithm needs more visibility than the instance allows.
pub fn check_mode(id: AlgorithmId, inst: &Instance) -> Result<()> {
    let found = instance_mode(inst);
    if id.mode() == BarrierMode::Open && found != BarrierMode::Open {
        return Err(Error::Mode { required: BarrierMode::Open, found });
    }
    Ok(())
}

pub fn dimensions(inst: &Instance, horizon: u64) -> Dimensions {
    Dimensions {
        horizon,
        actions: inst.actions().count(),
        recommendations: inst.recommendations().size(),
        n1: inst.n1(),
        n2: inst.n2(),
    }
}

/// Algorithm choice with optional overrides of the tuned learning rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmSpec {
    pub id: AlgorithmId,
    /// Human-side (or single-learner) rate; `None` picks the tuned default.
    pub eta: Option<f64>,
    pub gamma: f64,
    /// Machine-side rate for independent exploration.
    pub machine_eta: Option<f64>,
}

impl AlgorithmSpec {
    pub fn new(id: AlgorithmId) -> Self {
        Self { id, eta: None, gamma: 0.0, machine_eta: None }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = Some(eta);
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// `(learner η, machine η)` after defaults; `None` where unused.
    pub fn resolved_rates(&self, d: Dimensions) -> (Option<f64>, Option<f64>) {
        let (t, k, n1, n2) = (d.horizon as f64, d.actions as f64, d.n1 as f64, d.n2 as f64);
        let ln_n = libm::log(n1 * n2);
        match self.id {
            AlgorithmId::Exp4 | AlgorithmId::JointExp4 => {
                (Some(self.eta.unwrap_or_else(|| libm::sqrt(2.0 * ln_n / (t * k)))), None)
            }
            AlgorithmId::P2Exp4 => (Some(self.eta.unwrap_or_else(|| libm::sqrt(2.0 * ln_n / (t * k * n1)))), None),
            AlgorithmId::MossPairs => (None, None),
            AlgorithmId::IndepPair => {
                let r = d.recommendations as f64;
                let human = self.eta.unwrap_or_else(|| libm::sqrt(2.0 * libm::log(n2) / (t * k)));
                let machine = self.machine_eta.unwrap_or_else(|| libm::sqrt(2.0 * libm::log(n1) / (t * r)));
                (Some(human), Some(machine))
            }
        }
    }
}

pub type Team = (Box<dyn MachineAgent + Send>, Box<dyn HumanAgent + Send>);

/// Builds both sides with their own random substreams.
pub fn build_team(inst: &Instance, spec: &AlgorithmSpec, horizon: u64, seed: u64) -> Result<Team> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    check_mode(spec.id, inst)?;
    let d = dimensions(inst, horizon);
    let (eta, machine_eta) = spec.resolved_rates(d);
    let params = |eta: Option<f64>| Exp4Params::new(eta.unwrap_or(0.0), spec.gamma);
    let machine_stream = Stream::new(seed, Substream::Machine);
    let human_stream = Stream::new(seed, Substream::Human);
    let (n1, n2, k, r) = (d.n1, d.n2, d.actions, d.recommendations);
    Ok(match spec.id {
        AlgorithmId::Exp4 => {
            (Box::new(FixedMachine::new(0)), Box::new(Exp4Human::new(n1, n2, k, params(eta)?, human_stream)?))
        }
        AlgorithmId::JointExp4 => {
            let joint = JointExp4::new(n1, n2, r, k, params(eta)?)?;
            (
                Box::new(JointMachine::new(joint.clone(), machine_stream)),
                Box::new(JointHuman::new(joint, human_stream)),
            )
        }
        AlgorithmId::P2Exp4 => (
            Box::new(DirectedMachine::new()),
            Box::new(P2Exp4Human::new(P2Exp4::new(n1, n2, k, params(eta)?)?, human_stream)),
        ),
        AlgorithmId::MossPairs => {
            let state = MossState::new(n1, n2, horizon)?;
            (Box::new(MossMachine::new(state.clone())), Box::new(MossHuman::new(state)))
        }
        AlgorithmId::IndepPair => (
            Box::new(IndepMachine::new(n1, r, params(machine_eta)?, machine_stream)?),
            Box::new(IndepHuman::new(n2, k, params(eta)?, human_stream)?),
        ),
    })
}

impl core::fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_name(s).ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(horizon: u64, actions: usize, recommendations: usize, n1: usize, n2: usize) -> Dimensions {
        Dimensions { horizon, actions, recommendations, n1, n2 }
    }

    #[test]
    fn default_rates() {
        let (eta, _) = AlgorithmSpec::new(AlgorithmId::P2Exp4).resolved_rates(dims(10_000, 2, 2, 2, 1));
        let expect = libm::sqrt(2.0 * libm::log(2.0) / (10_000.0 * 2.0 * 2.0));
        assert_eq!(eta, Some(expect));
        assert!((expect - 0.005887).abs() < 1e-6);

        let (human, machine) = AlgorithmSpec::new(AlgorithmId::IndepPair).resolved_rates(dims(10_000, 2, 2, 4, 8));
        assert!((machine.unwrap() - 0.011774).abs() < 1e-6);
        assert!((human.unwrap() - 0.0144203).abs() < 1e-6);
        assert_eq!(AlgorithmSpec::new(AlgorithmId::MossPairs).resolved_rates(dims(10, 2, 2, 2, 2)), (None, None));
    }

    #[test]
    fn names_round_trip() {
        for id in AlgorithmId::ALL {
            assert_eq!(id.name().parse::<AlgorithmId>().unwrap(), id);
        }
        assert!("nope".parse::<AlgorithmId>().is_err());
    }
}
