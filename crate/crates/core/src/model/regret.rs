use alloc::vec::Vec;

/// Which worst-case upper bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// `√(2TK ln(N₁N₂))`: EXP4 on the joint policy set with no private
    /// information and no opacity.
    JointExp4,
    /// `√(2TKN₁ ln(N₁N₂))`: the directive-channel algorithm.
    P2Exp4,
    /// `√(8T max{K,|R|} ln max{N₁,N₂})`: independent exploration under
    /// policy space independence.
    Independent,
    /// `25√(TN₁N₂)`: MOSS over all policy pairs.
    MossPairs,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::JointExp4 => "joint_exp4",
            Self::P2Exp4 => "directive_exp4",
            Self::Independent => "independent",
            Self::MossPairs => "moss_pairs",
        }
    }
}

/// Problem dimensions a bound depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimensions {
    pub horizon: u64,
    pub actions: usize,
    pub recommendations: usize,
    pub n1: usize,
    pub n2: usize,
}

pub fn regret_bound(kind: BoundKind, d: Dimensions) -> f64 {
    let t = d.horizon as f64;
    let k = d.actions as f64;
    let ln_n = libm::log((d.n1 as f64) * (d.n2 as f64));
    match kind {
        BoundKind::JointExp4 => libm::sqrt(2.0 * t * k * ln_n),
        BoundKind::P2Exp4 => libm::sqrt(2.0 * t * k * d.n1 as f64 * ln_n),
        BoundKind::Independent => {
            let width = d.actions.max(d.recommendations) as f64;
            libm::sqrt(8.0 * t * width * libm::log(d.n1.max(d.n2) as f64))
        }
        BoundKind::MossPairs => 25.0 * libm::sqrt(t * (d.n1 * d.n2) as f64),
    }
}

/// How per-round regret was accounted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accounting {
    /// `Y(π*) − E[y_t | agent state]` against exact values.
    Pseudo,
    /// Against the best fixed joint policy on a supplied sequence.
    Hindsight,
    /// No usable play law or oracle: realized shortfall per round.
    Realized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub accounting: Accounting,
    pub optimal_value: f64,
    pub per_round: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub cumulative_reward: Vec<f64>,
    /// `t·Y(π*) − Σ y_s`, logged next to the pseudo-regret.
    pub cumulative_realized_regret: Vec<f64>,
}

impl RegretTrace {
    pub fn new(accounting: Accounting, optimal_value: f64, horizon: usize) -> Self {
        Self {
            accounting,
            optimal_value,
            per_round: Vec::with_capacity(horizon),
            cumulative: Vec::with_capacity(horizon),
            cumulative_reward: Vec::with_capacity(horizon),
            cumulative_realized_regret: Vec::with_capacity(horizon),
        }
    }

    pub fn push(&mut self, regret: f64, reward: f64, realized_regret: f64) {
        let last = |v: &Vec<f64>| v.last().copied().unwrap_or(0.0);
        let cum = last(&self.cumulative) + regret;
        let rew = last(&self.cumulative_reward) + reward;
        let real = last(&self.cumulative_realized_regret) + realized_regret;
        self.per_round.push(regret);
        self.cumulative.push(cum);
        self.cumulative_reward.push(rew);
        self.cumulative_realized_regret.push(real);
    }

    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.per_round.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_round.is_empty()
    }
}
