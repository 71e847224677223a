use alloc::format;
use alloc::vec::Vec;

use super::exp4::{Exp4, Exp4Params};
use super::weights::WeightMatrix;
use crate::error::{range, Error, Result};
use crate::rng::sample_index;

/// EXP4 on the joint policy set, split into a recommendation stage and a
/// conditional action stage. Both players can run identical replicas when
/// they see every context and both policy sets.
#[derive(Debug, Clone)]
pub struct JointExp4 {
    exp4: Exp4,
    n2: usize,
    recommendations: usize,
    rec_advice: Vec<usize>,
    rec_law: Vec<f64>,
    cond_law: Vec<f64>,
}

impl JointExp4 {
    pub fn new(n1: usize, n2: usize, recommendations: usize, actions: usize, params: Exp4Params) -> Result<Self> {
        if recommendations == 0 {
            return Err(Error::Config("recommendation space is empty".into()));
        }
        Ok(Self {
            exp4: Exp4::new(n1 * n2, actions, params)?,
            n2,
            recommendations,
            rec_advice: Vec::with_capacity(n1),
            rec_law: Vec::with_capacity(recommendations),
            cond_law: Vec::with_capacity(actions),
        })
    }

    /// Row-major `n1 × n2` weights.
    pub fn weights(&self) -> &WeightMatrix {
        self.exp4.weights()
    }

    /// `rec_advice[i] = f_i(x)`, `joint_advice[i·n2 + j] = g_j(f_i(x), z)`.
    /// Returns the recommendation law `q_r = Σ_ij Q_ij 1{f_i(x) = r}`.
    pub fn prepare(&mut self, rec_advice: &[usize], joint_advice: &[usize]) -> Result<&[f64]> {
        if rec_advice.len() * self.n2 != joint_advice.len() {
            return Err(Error::Validation(format!(
                "{} recommendations do not match {} joint advice entries",
                rec_advice.len(),
                joint_advice.len()
            )));
        }
        self.exp4.prepare(joint_advice)?;
        self.rec_advice.clear();
        self.rec_advice.extend_from_slice(rec_advice);
        self.rec_law.clear();
        self.rec_law.resize(self.recommendations, 0.0);
        for (row, &r) in self.exp4.weights().probs().chunks(self.n2).zip(rec_advice) {
            *self.rec_law.get_mut(r).ok_or_else(|| range("recommendation", r, self.recommendations))? +=
                row.iter().sum::<f64>();
        }
        Ok(&self.rec_law)
    }

    pub fn recommendation_law(&self) -> &[f64] {
        &self.rec_law
    }

    /// `p_{k|r} = Σ_ij Q_ij 1{f_i(x) = r ∧ g_j(r, z) = k} / q_r`.
    pub fn conditional_law(&mut self, r: usize) -> Result<&[f64]> {
        let q_r = *self.rec_law.get(r).ok_or_else(|| range("recommendation", r, self.recommendations))?;
        if !(q_r > 0.0) {
            return Err(Error::Numeric(format!("recommendation {r} has zero mass")));
        }
        self.cond_law.clear();
        self.cond_law.resize(self.exp4.actions(), 0.0);
        let q = self.exp4.weights().probs();
        let advice = self.exp4.advice();
        for (i, _) in self.rec_advice.iter().enumerate().filter(|(_, &f)| f == r) {
            for k in i * self.n2..(i + 1) * self.n2 {
                self.cond_law[advice[k]] += q[k] / q_r;
            }
        }
        Ok(&self.cond_law)
    }

    /// Action law of plain EXP4 on the joint expert set.
    pub fn action_law(&self) -> &[f64] {
        self.exp4.law()
    }

    pub fn sample_recommendation(&self, u: f64) -> usize {
        sample_index(&self.rec_law, u)
    }

    pub fn sample_action(&self, u: f64) -> usize {
        sample_index(&self.cond_law, u)
    }

    /// Same update as EXP4 over the joint experts.
    pub fn update(&mut self, a: usize, y: f64) -> Result<()> {
        self.exp4.update(a, y)
    }
}
