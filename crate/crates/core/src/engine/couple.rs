//! Lock-step equivalence harnesses.
//!
//! Both harnesses sample once from the algorithm under test, inject that
//! outcome into the reference EXP4, and compare laws and weights round by
//! round.

use alloc::vec::Vec;

use super::algorithm::{check_mode, dimensions, AlgorithmId, AlgorithmSpec};
use super::barrier::SideLaw;
use super::episode::expected_under;
use super::lift::lift_instance;
use crate::agents::{Exp4, Exp4Params, JointExp4, P2Exp4};
use crate::envgen::Draw;
use crate::error::Result;
use crate::model::{best_pair, Accounting, Instance, RegretTrace};
use crate::rng::{Stream, Substream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupleOptions {
    pub tol: f64,
    /// Learning rate for both sides; `None` uses the tuned default.
    pub eta: Option<f64>,
    pub gamma: f64,
    /// Multiplies the lifted side's learning rate. Anything but 1 should fail.
    pub lifted_eta_scale: f64,
}

impl Default for CoupleOptions {
    fn default() -> Self {
        Self { tol: 1e-9, eta: None, gamma: 0.0, lifted_eta_scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupleReport {
    pub rounds: usize,
    pub max_weight_divergence: f64,
    pub max_law_divergence: f64,
    /// Largest gap between the best realized payoff over lifted experts and
    /// over joint policies in any round.
    pub max_identity_gap: f64,
    /// First round (from 1) in which a divergence exceeded the tolerance.
    /// The run stops there.
    pub first_failure: Option<usize>,
    pub pass: bool,
}

/// Runs the directive-channel learner on `inst` and EXP4 on its lift in lock
/// step. Each round checks `P(ã = i·K + k) = q_i p_{k|i}`, plays the coupled
/// outcome `ã = i_t·K + a_t` on the lifted side, and compares `Q_t` with
/// `Q̃_t` (the final weights are checked in the last round).
pub fn couple_check(inst: &Instance, horizon: u64, seed: u64, opts: &CoupleOptions) -> Result<CoupleReport> {
    let d = dimensions(inst, horizon);
    let eta = AlgorithmSpec { eta: opts.eta, ..AlgorithmSpec::new(AlgorithmId::P2Exp4) }.resolved_rates(d).0.unwrap_or(0.0);
    let (n1, n2, k) = (d.n1, d.n2, d.actions);
    let lifted = lift_instance(inst);
    let mut p2 = P2Exp4::new(n1, n2, k, Exp4Params::new(eta, opts.gamma)?)?;
    let mut exp4 = Exp4::new(lifted.experts(), lifted.actions(), Exp4Params::new(eta * opts.lifted_eta_scale, opts.gamma)?)?;
    let mut env = Stream::new(seed, Substream::Environment);
    let mut human = Stream::new(seed, Substream::Human);

    let mut draw = Draw::default();
    let (mut lifted_advice, mut advice, mut row, mut realized) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut report = CoupleReport {
        rounds: 0,
        max_weight_divergence: 0.0,
        max_law_divergence: 0.0,
        max_identity_gap: 0.0,
        first_failure: None,
        pass: true,
    };
    let t_max = usize::try_from(horizon).unwrap_or(usize::MAX);
    for t in 1..=t_max {
        inst.env().sample_into(&mut env, &mut draw);

        lifted.advice_all(draw.x, draw.z, &mut lifted_advice)?;
        let lifted_law = exp4.prepare(&lifted_advice)?;
        let mut law_div = 0.0f64;
        for (i, f) in inst.machine_policies().iter().enumerate() {
            let r = f.recommend(draw.x)?;
            advice.clear();
            for g in inst.human_policies() {
                advice.push(g.act(r, draw.z)?);
            }
            p2.row_law(i, &advice, &mut row)?;
            let q = p2.marginals()[i];
            for (a, p) in row.iter().enumerate() {
                law_div = law_div.max((lifted_law[lifted.embed(i, a)] - q * p).abs());
            }
        }

        let mut weight_div = exp4.weights().divergence(p2.weights().probs());
        let it = p2.select_policy(human.uniform());
        let r = inst.machine_policies()[it].recommend(draw.x)?;
        advice.clear();
        for g in inst.human_policies() {
            advice.push(g.act(r, draw.z)?);
        }
        p2.prepare(&advice)?;
        let a = p2.sample(human.uniform());
        let y = draw.payoffs[a];
        let lifted_a = lifted.embed(it, a);
        p2.update(a, y)?;
        exp4.update(lifted_a, lifted.payoff(lifted_a, &draw.payoffs))?;
        if t == t_max {
            weight_div = weight_div.max(exp4.weights().divergence(p2.weights().probs()));
        }

        inst.realized_rewards(&draw, &mut realized)?;
        let joint_max = realized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gap = (lifted.max_realized(&draw, &mut lifted_advice)? - joint_max).abs();

        report.rounds = t;
        report.max_law_divergence = report.max_law_divergence.max(law_div);
        report.max_weight_divergence = report.max_weight_divergence.max(weight_div);
        report.max_identity_gap = report.max_identity_gap.max(gap);
        if report.first_failure.is_none() && (law_div > opts.tol || weight_div > opts.tol || gap > 0.0) {
            report.first_failure = Some(t);
            break;
        }
    }
    report.pass = report.first_failure.is_none();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointCoupleReport {
    pub max_law_divergence: f64,
    pub max_weight_divergence: f64,
    /// Trace of joint EXP4, split into recommendation and action stages.
    pub joint: RegretTrace,
    /// Trace of plain EXP4 on the joint expert set, fed the same outcomes.
    pub plain: RegretTrace,
}

impl JointCoupleReport {
    pub fn traces_identical(&self) -> bool {
        self.joint == self.plain
    }
}

/// Runs joint EXP4 the way its two replicas do inside an episode, with plain
/// EXP4 on the joint expert set updated from the same `(a_t, y_t)`. Compares
/// the induced action law `Σ_r q_r p_{k|r}` with EXP4's `p_k` each round.
pub fn couple_joint_exp4(inst: &Instance, spec: &AlgorithmSpec, horizon: u64, seed: u64) -> Result<JointCoupleReport> {
    check_mode(AlgorithmId::JointExp4, inst)?;
    let d = dimensions(inst, horizon);
    let eta = AlgorithmSpec { id: AlgorithmId::JointExp4, ..*spec }.resolved_rates(d).0.unwrap_or(0.0);
    let params = Exp4Params::new(eta, spec.gamma)?;
    let (n1, n2) = (d.n1, d.n2);
    let mut joint = JointExp4::new(n1, n2, d.recommendations, d.actions, params)?;
    let mut plain = Exp4::new(n1 * n2, d.actions, params)?;
    let mut env = Stream::new(seed, Substream::Environment);
    let mut machine = Stream::new(seed, Substream::Machine);
    let mut human = Stream::new(seed, Substream::Human);

    let accounting = if inst.exact_oracle() { Accounting::Pseudo } else { Accounting::Realized };
    let optimal = best_pair(inst).value;
    let t_max = usize::try_from(horizon).unwrap_or(usize::MAX);
    let mut joint_trace = RegretTrace::new(accounting, optimal, t_max);
    let mut plain_trace = RegretTrace::new(accounting, optimal, t_max);
    let (mut max_law, mut max_weight) = (0.0f64, 0.0f64);
    let mut draw = Draw::default();
    let (mut rec, mut advice, mut induced) = (Vec::new(), Vec::new(), Vec::new());
    let regret = |q: &[f64], y: f64| match accounting {
        Accounting::Pseudo => {
            let v = expected_under(inst.values().as_slice(), n2, SideLaw::Unspecified, SideLaw::Joint(q)).unwrap_or(0.0);
            (optimal - v).clamp(0.0, 1.0)
        }
        _ => optimal - y,
    };

    for _ in 0..t_max {
        inst.env().sample_into(&mut env, &mut draw);
        rec.clear();
        advice.clear();
        for f in inst.machine_policies() {
            let r = f.recommend(draw.x)?;
            rec.push(r);
            for g in inst.human_policies() {
                advice.push(g.act(r, draw.z)?);
            }
        }
        let rec_law = joint.prepare(&rec, &advice)?.to_vec();
        induced.clear();
        induced.resize(d.actions, 0.0);
        for (r, &q_r) in rec_law.iter().enumerate().filter(|(_, q)| **q > 0.0) {
            for (acc, p) in induced.iter_mut().zip(joint.conditional_law(r)?) {
                *acc += q_r * p;
            }
        }
        let plain_law = plain.prepare(&advice)?;
        max_law = induced.iter().zip(plain_law).map(|(a, b)| (a - b).abs()).fold(max_law, f64::max);

        let r = joint.sample_recommendation(machine.uniform());
        joint.conditional_law(r)?;
        let a = joint.sample_action(human.uniform());
        let y = draw.payoffs[a];
        joint_trace.push(regret(joint.weights().probs(), y), y, optimal - y);
        plain_trace.push(regret(plain.weights().probs(), y), y, optimal - y);
        joint.update(a, y)?;
        plain.update(a, y)?;
        max_weight = max_weight.max(joint.weights().divergence(plain.weights().probs()));
    }
    Ok(JointCoupleReport {
        max_law_divergence: max_law,
        max_weight_divergence: max_weight,
        joint: joint_trace,
        plain: plain_trace,
    })
}
