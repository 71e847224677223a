use alloc::format;
use alloc::vec::Vec;

use super::exp4::{reward_estimates, Exp4Params};
use super::weights::WeightMatrix;
use crate::error::{range, Error, Result};
use crate::rng::sample_index;

/// The human's state in the directive-channel algorithm: a weight matrix
/// over machine × human policies. Each round the human names a machine
/// policy `i_t` drawn from the row marginal, then plays from row `i_t`.
#[derive(Debug, Clone)]
pub struct P2Exp4 {
    weights: WeightMatrix,
    params: Exp4Params,
    actions: usize,
    marginals: Vec<f64>,
    directive: Option<usize>,
    advice: Vec<usize>,
    law: Vec<f64>,
    estimates: Vec<f64>,
}

impl P2Exp4 {
    pub fn new(n1: usize, n2: usize, actions: usize, params: Exp4Params) -> Result<Self> {
        if actions == 0 {
            return Err(Error::Config("action set is empty".into()));
        }
        let weights = WeightMatrix::uniform(n1, n2)?;
        let mut marginals = Vec::with_capacity(n1);
        weights.row_sums(&mut marginals);
        Ok(Self {
            weights,
            params,
            actions,
            marginals,
            directive: None,
            advice: Vec::with_capacity(n2),
            law: Vec::with_capacity(actions),
            estimates: Vec::with_capacity(actions),
        })
    }

    /// Starts from the given weight matrix instead of uniform.
    pub fn with_weights(weights: WeightMatrix, actions: usize, params: Exp4Params) -> Result<Self> {
        let mut agent = Self::new(weights.rows(), weights.cols(), actions, params)?;
        weights.row_sums(&mut agent.marginals);
        agent.weights = weights;
        Ok(agent)
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    pub fn params(&self) -> Exp4Params {
        self.params
    }

    /// `q_i = Σ_j Q_ij`.
    pub fn marginals(&self) -> &[f64] {
        &self.marginals
    }

    /// Draws `i_t` from the row marginal.
    pub fn select_policy(&mut self, u: f64) -> usize {
        let i = sample_index(&self.marginals, u);
        self.directive = Some(i);
        i
    }

    /// Action law of row `i` given `advice[j] = g_j(r, z)`:
    /// `p_k = Σ_j Q_ij 1{advice_j = k} / q_i`.
    pub fn row_law(&self, i: usize, advice: &[usize], out: &mut Vec<f64>) -> Result<()> {
        if i >= self.weights.rows() {
            return Err(range("machine policy", i, self.weights.rows()));
        }
        if advice.len() != self.weights.cols() {
            return Err(Error::Validation(format!(
                "advice covers {} human policies, agent tracks {}",
                advice.len(),
                self.weights.cols()
            )));
        }
        let q = self.marginals[i];
        if !(q > 0.0) {
            return Err(Error::Numeric(format!("row {i} has zero mass")));
        }
        out.clear();
        out.resize(self.actions, 0.0);
        for (&w, &a) in self.weights.row(i).iter().zip(advice) {
            *out.get_mut(a).ok_or_else(|| range("advised action", a, self.actions))? += w / q;
        }
        Ok(())
    }

    /// Fixes `i_t` without sampling (used when replaying a coupled run).
    pub fn set_directive(&mut self, i: usize) -> Result<()> {
        if i >= self.weights.rows() {
            return Err(range("machine policy", i, self.weights.rows()));
        }
        self.directive = Some(i);
        Ok(())
    }

    pub fn directive(&self) -> Option<usize> {
        self.directive
    }

    /// Stores `advice[j] = g_j(r_t, z_t)` and returns the action law of row `i_t`.
    pub fn prepare(&mut self, advice: &[usize]) -> Result<&[f64]> {
        let i = self.directive.ok_or_else(|| Error::Validation("no policy selected this round".into()))?;
        let mut law = core::mem::take(&mut self.law);
        let res = self.row_law(i, advice, &mut law);
        self.law = law;
        res?;
        self.advice.clear();
        self.advice.extend_from_slice(advice);
        Ok(&self.law)
    }

    pub fn law(&self) -> &[f64] {
        &self.law
    }

    pub fn sample(&self, u: f64) -> usize {
        sample_index(&self.law, u)
    }

    /// `ŷ_k = 1 − 1{a=k}(1−y)/(q_{i_t} p_k + γ)`; rows other than `i_t` gain 1.
    pub fn update(&mut self, a: usize, y: f64) -> Result<()> {
        let it = self.directive.take().ok_or_else(|| Error::Validation("no policy selected this round".into()))?;
        if a >= self.actions {
            return Err(range("played action", a, self.actions));
        }
        // q_{i_t} p_a summed directly so the lifted EXP4 sees the same bits
        let mass: f64 = self.weights.row(it).iter().zip(&self.advice).filter(|(_, &g)| g == a).map(|(w, _)| w).sum();
        reward_estimates(self.actions, a, mass + self.params.gamma, y, &mut self.estimates)?;
        let (est, advice, n2) = (&self.estimates, &self.advice, self.weights.cols());
        self.weights.update(self.params.eta, |k| if k / n2 == it { est[advice[k % n2]] } else { 1.0 })?;
        self.weights.row_sums(&mut self.marginals);
        Ok(())
    }
}
