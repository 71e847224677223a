//! Per-side agents for every algorithm, written against the engine's views.

use alloc::vec::Vec;

use super::exp4::{Exp4, Exp4Params};
use super::joint::JointExp4;
use super::moss::MossState;
use super::p2exp4::P2Exp4;
use crate::engine::{Feedback, HumanAgent, HumanView, MachineAgent, MachineView, SideLaw};
use crate::error::{range, Error, Result};
use crate::model::{HumanPolicy, MachinePolicy};
use crate::rng::Stream;

/// `rec[i] = f_i(x)` and `joint[i·N₂ + j] = g_j(f_i(x), z)`.
fn joint_advice(
    machine: &[MachinePolicy],
    human: &[HumanPolicy],
    x: u64,
    z: u64,
    rec: &mut Vec<usize>,
    joint: &mut Vec<usize>,
) -> Result<()> {
    rec.clear();
    joint.clear();
    for f in machine {
        let r = f.recommend(x)?;
        rec.push(r);
        for g in human {
            joint.push(g.act(r, z)?);
        }
    }
    Ok(())
}

fn human_advice(human: &[HumanPolicy], r: usize, z: u64, out: &mut Vec<usize>) -> Result<()> {
    out.clear();
    for g in human {
        out.push(g.act(r, z)?);
    }
    Ok(())
}

/// Recommends `f_i(x)` for a fixed `i` every round.
#[derive(Debug, Clone)]
pub struct FixedMachine {
    policy: usize,
}

impl FixedMachine {
    pub fn new(policy: usize) -> Self {
        Self { policy }
    }
}

impl MachineAgent for FixedMachine {
    fn recommend(&mut self, view: &MachineView<'_>) -> Result<usize> {
        let f = view.policies().get(self.policy).ok_or_else(|| range("machine policy", self.policy, view.policies().len()))?;
        f.recommend(view.context())
    }

    fn observe(&mut self, _view: &MachineView<'_>, _feedback: &Feedback) -> Result<()> {
        Ok(())
    }

    fn law(&self) -> SideLaw<'_> {
        SideLaw::Index(self.policy)
    }
}

/// A single decision maker running EXP4 over all joint policies. Needs both
/// contexts and both policy sets.
#[derive(Debug, Clone)]
pub struct Exp4Human {
    exp4: Exp4,
    stream: Stream,
    rec: Vec<usize>,
    joint: Vec<usize>,
}

impl Exp4Human {
    pub fn new(n1: usize, n2: usize, actions: usize, params: Exp4Params, stream: Stream) -> Result<Self> {
        Ok(Self { exp4: Exp4::new(n1 * n2, actions, params)?, stream, rec: Vec::new(), joint: Vec::new() })
    }
}

impl HumanAgent for Exp4Human {
    fn act(&mut self, view: &HumanView<'_>, _recommendation: usize) -> Result<usize> {
        let x = view.peer_context()?;
        let machine = view.peer_policies()?;
        joint_advice(machine, view.policies(), x, view.context(), &mut self.rec, &mut self.joint)?;
        self.exp4.prepare(&self.joint)?;
        Ok(self.exp4.sample(self.stream.uniform()))
    }

    fn observe(&mut self, _view: &HumanView<'_>, feedback: &Feedback) -> Result<()> {
        self.exp4.update(feedback.action, feedback.reward)
    }

    fn weights(&self) -> &[f64] {
        self.exp4.weights().probs()
    }

    fn law(&self) -> SideLaw<'_> {
        SideLaw::Joint(self.exp4.weights().probs())
    }
}

/// Machine replica of joint EXP4: samples the recommendation from `q_r`.
#[derive(Debug, Clone)]
pub struct JointMachine {
    joint: JointExp4,
    stream: Stream,
    rec: Vec<usize>,
    advice: Vec<usize>,
}

impl JointMachine {
    pub fn new(joint: JointExp4, stream: Stream) -> Self {
        Self { joint, stream, rec: Vec::new(), advice: Vec::new() }
    }
}

impl MachineAgent for JointMachine {
    fn recommend(&mut self, view: &MachineView<'_>) -> Result<usize> {
        let z = view.peer_context()?;
        let human = view.peer_policies()?;
        joint_advice(view.policies(), human, view.context(), z, &mut self.rec, &mut self.advice)?;
        self.joint.prepare(&self.rec, &self.advice)?;
        Ok(self.joint.sample_recommendation(self.stream.uniform()))
    }

    fn observe(&mut self, _view: &MachineView<'_>, feedback: &Feedback) -> Result<()> {
        self.joint.update(feedback.action, feedback.reward)
    }

    fn weights(&self) -> &[f64] {
        self.joint.weights().probs()
    }

    fn law(&self) -> SideLaw<'_> {
        SideLaw::Joint(self.joint.weights().probs())
    }
}

/// Human replica of joint EXP4: plays from `p_{k|r}`.
#[derive(Debug, Clone)]
pub struct JointHuman {
    joint: JointExp4,
    stream: Stream,
    rec: Vec<usize>,
    advice: Vec<usize>,
}

impl JointHuman {
    pub fn new(joint: JointExp4, stream: Stream) -> Self {
        Self { joint, stream, rec: Vec::new(), advice: Vec::new() }
    }
}

impl HumanAgent for JointHuman {
    fn act(&mut self, view: &HumanView<'_>, recommendation: usize) -> Result<usize> {
        let x = view.peer_context()?;
        let machine = view.peer_policies()?;
        joint_advice(machine, view.policies(), x, view.context(), &mut self.rec, &mut self.advice)?;
        self.joint.prepare(&self.rec, &self.advice)?;
        self.joint.conditional_law(recommendation)?;
        Ok(self.joint.sample_action(self.stream.uniform()))
    }

    fn observe(&mut self, _view: &HumanView<'_>, feedback: &Feedback) -> Result<()> {
        self.joint.update(feedback.action, feedback.reward)
    }

    fn weights(&self) -> &[f64] {
        self.joint.weights().probs()
    }

    fn law(&self) -> SideLaw<'_> {
        SideLaw::Joint(self.joint.weights().probs())
    }
}

/// Plays whichever machine policy the human names.
#[derive(Debug, Clone, Default)]
pub struct DirectedMachine {
    last: Option<usize>,
}

impl DirectedMachine {
    pub fn new() -> Self {
        Self::default()
    }
}

impl MachineAgent for DirectedMachine {
    fn recommend(&mut self, view: &MachineView<'_>) -> Result<usize> {
        let i = view
            .directive()
            .ok_or_else(|| Error::Protocol { round: view.round(), detail: "no directive received".into() })?;
        let f = view.policies().get(i).ok_or_else(|| range("directed policy", i, view.policies().len()))?;
        self.last = Some(i);
        f.recommend(view.context())
    }

    fn observe(&mut self, _view: &MachineView<'_>, _feedback: &Feedback) -> Result<()> {
        Ok(())
    }

    fn law(&self) -> SideLaw<'_> {
        self.last.map_or(SideLaw::Unspecified, SideLaw::Index)
    }
}

/// The human side of the directive-channel algorithm.
#[derive(Debug, Clone)]
pub struct P2Exp4Human {
    state: P2Exp4,
    stream: Stream,
    advice: Vec<usize>,
}

impl P2Exp4Human {
    pub fn new(state: P2Exp4, stream: Stream) -> Self {
        Self { state, stream, advice: Vec::new() }
    }

    pub fn state(&self) -> &P2Exp4 {
        &self.state
    }
}

impl HumanAgent for P2Exp4Human {
    fn directive(&mut self, _view: &HumanView<'_>) -> Result<Option<usize>> {
        Ok(Some(self.state.select_policy(self.stream.uniform())))
    }

    fn act(&mut self, view: &HumanView<'_>, recommendation: usize) -> Result<usize> {
        human_advice(view.policies(), recommendation, view.context(), &mut self.advice)?;
        self.state.prepare(&self.advice)?;
        Ok(self.state.sample(self.stream.uniform()))
    }

    fn observe(&mut self, _view: &HumanView<'_>, feedback: &Feedback) -> Result<()> {
        self.state.update(feedback.action, feedback.reward)
    }

    fn weights(&self) -> &[f64] {
        self.state.weights().probs()
    }

    fn law(&self) -> SideLaw<'_> {
        SideLaw::Joint(self.state.weights().probs())
    }
}

/// Machine replica of MOSS over policy pairs.
#[derive(Debug, Clone)]
pub struct MossMachine {
    state: MossState,
    arm: usize,
}

impl MossMachine {
    pub fn new(state: MossState) -> Self {
        Self { state, arm: 0 }
    }
}

impl MachineAgent for MossMachine {
    fn recommend(&mut self, view: &MachineView<'_>) -> Result<usize> {
        self.arm = self.state.select();
        let i = self.state.decode(self.arm).machine;
        view.policies()[i].recommend(view.context())
    }

    fn observe(&mut self, _view: &MachineView<'_>, feedback: &Feedback) -> Result<()> {
        self.state.update(self.arm, feedback.reward)
    }

    fn law(&self) -> SideLaw<'_> {
        SideLaw::Index(self.state.decode(self.arm).machine)
    }
}

/// Human replica of MOSS over policy pairs.
#[derive(Debug, Clone)]
pub struct MossHuman {
    state: MossState,
    arm: usize,
}

impl MossHuman {
    pub fn new(state: MossState) -> Self {
        Self { state, arm: 0 }
    }
}

impl HumanAgent for MossHuman {
    fn act(&mut self, view: &HumanView<'_>, recommendation: usize) -> Result<usize> {
        self.arm = self.state.select();
        let j = self.state.decode(self.arm).human;
        view.policies()[j].act(recommendation, view.context())
    }

    fn observe(&mut self, _view: &HumanView<'_>, feedback: &Feedback) -> Result<()> {
        self.state.update(self.arm, feedback.reward)
    }

    fn law(&self) -> SideLaw<'_> {
        SideLaw::Index(self.state.decode(self.arm).human)
    }
}

/// Machine half of independent exploration: EXP4 with recommendations as
/// actions and `Π₁` as experts.
#[derive(Debug, Clone)]
pub struct IndepMachine {
    exp4: Exp4,
    stream: Stream,
    advice: Vec<usize>,
}

impl IndepMachine {
    pub fn new(n1: usize, recommendations: usize, params: Exp4Params, stream: Stream) -> Result<Self> {
        Ok(Self { exp4: Exp4::new(n1, recommendations, params)?, stream, advice: Vec::new() })
    }
}

impl MachineAgent for IndepMachine {
    fn recommend(&mut self, view: &MachineView<'_>) -> Result<usize> {
        self.advice.clear();
        for f in view.policies() {
            self.advice.push(f.recommend(view.context())?);
        }
        self.exp4.prepare(&self.advice)?;
        Ok(self.exp4.sample(self.stream.uniform()))
    }

    fn observe(&mut self, _view: &MachineView<'_>, feedback: &Feedback) -> Result<()> {
        self.exp4.update(feedback.recommendation, feedback.reward)
    }

    fn weights(&self) -> &[f64] {
        self.exp4.weights().probs()
    }

    fn law(&self) -> SideLaw<'_> {
        SideLaw::Marginal(self.exp4.weights().probs())
    }
}

/// Human half of independent exploration: EXP4 over actions with `Π₂` as
/// experts advising on `(r, z)`.
#[derive(Debug, Clone)]
pub struct IndepHuman {
    exp4: Exp4,
    stream: Stream,
    advice: Vec<usize>,
}

impl IndepHuman {
    pub fn new(n2: usize, actions: usize, params: Exp4Params, stream: Stream) -> Result<Self> {
        Ok(Self { exp4: Exp4::new(n2, actions, params)?, stream, advice: Vec::new() })
    }
}

impl HumanAgent for IndepHuman {
    fn act(&mut self, view: &HumanView<'_>, recommendation: usize) -> Result<usize> {
        human_advice(view.policies(), recommendation, view.context(), &mut self.advice)?;
        self.exp4.prepare(&self.advice)?;
        Ok(self.exp4.sample(self.stream.uniform()))
    }

    fn observe(&mut self, _view: &HumanView<'_>, feedback: &Feedback) -> Result<()> {
        self.exp4.update(feedback.action, feedback.reward)
    }

    fn weights(&self) -> &[f64] {
        self.exp4.weights().probs()
    }

    fn law(&self) -> SideLaw<'_> {
        SideLaw::Marginal(self.exp4.weights().probs())
    }
}
