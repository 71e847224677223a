use alloc::vec::Vec;

use crate::envgen::Draw;
use crate::error::{range, Result};
use crate::model::Instance;

/// The `K·N₁`-action contextual bandit on which the directive-channel
/// algorithm is plain EXP4. Expert `h_ij` advises `i·K + g_j(f_i(x), z)`, so
/// all of `h_i·` advise inside block `i`; lifted action `k` pays `Y(k mod K)`.
#[derive(Debug, Clone, Copy)]
pub struct LiftedInstance<'a> {
    inst: &'a Instance,
    k: usize,
}

pub fn lift_instance(inst: &Instance) -> LiftedInstance<'_> {
    LiftedInstance { inst, k: inst.actions().count() }
}

impl<'a> LiftedInstance<'a> {
    pub fn base(&self) -> &'a Instance {
        self.inst
    }

    pub fn actions(&self) -> usize {
        self.k * self.inst.n1()
    }

    /// Experts are the joint policies, row-major.
    pub fn experts(&self) -> usize {
        self.inst.n1() * self.inst.n2()
    }

    pub fn advice(&self, i: usize, j: usize, x: u64, z: u64) -> Result<usize> {
        if i >= self.inst.n1() {
            return Err(range("machine policy", i, self.inst.n1()));
        }
        if j >= self.inst.n2() {
            return Err(range("human policy", j, self.inst.n2()));
        }
        Ok(i * self.k + self.inst.joint_action(i, j, x, z)?)
    }

    pub fn advice_all(&self, x: u64, z: u64, out: &mut Vec<usize>) -> Result<()> {
        out.clear();
        for (i, f) in self.inst.machine_policies().iter().enumerate() {
            let r = f.recommend(x)?;
            for g in self.inst.human_policies() {
                out.push(i * self.k + g.act(r, z)?);
            }
        }
        Ok(())
    }

    /// `Ỹ(k) = Y(k mod K)`.
    pub fn payoff(&self, lifted_action: usize, payoffs: &[f64]) -> f64 {
        payoffs[lifted_action % self.k]
    }

    /// Lifted action of playing `a` under machine policy `i`.
    pub fn embed(&self, i: usize, a: usize) -> usize {
        i * self.k + a
    }

    /// `(i, a)` for a lifted action.
    pub fn split(&self, lifted_action: usize) -> (usize, usize) {
        (lifted_action / self.k, lifted_action % self.k)
    }

    /// Best realized payoff over lifted experts on one draw.
    pub fn max_realized(&self, draw: &Draw, scratch: &mut Vec<usize>) -> Result<f64> {
        self.advice_all(draw.x, draw.z, scratch)?;
        Ok(scratch.iter().map(|&k| self.payoff(k, &draw.payoffs)).fold(f64::NEG_INFINITY, f64::max))
    }
}
