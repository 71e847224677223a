use alloc::format;
use alloc::vec::Vec;

use super::weights::WeightMatrix;
use crate::error::{range, Error, Result};
use crate::rng::sample_index;

/// Learning rate and implicit-exploration bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exp4Params {
    pub eta: f64,
    pub gamma: f64,
}

impl Exp4Params {
    pub fn new(eta: f64, gamma: f64) -> Result<Self> {
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::Config(format!("eta must be finite and non-negative, got {eta}")));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::Config(format!("gamma must be finite and non-negative, got {gamma}")));
        }
        Ok(Self { eta, gamma })
    }
}

/// `p_k = Σ_i Q_i 1{advice_i = k}`.
pub fn action_law(weights: &[f64], advice: &[usize], k: usize, out: &mut Vec<f64>) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Config("expert set is empty".into()));
    }
    out.clear();
    out.resize(k, 0.0);
    for (&w, &a) in weights.iter().zip(advice) {
        *out.get_mut(a).ok_or_else(|| range("advised action", a, k))? += w;
    }
    Ok(())
}

/// Reward estimates `ŷ_k = 1 − 1{a = k}(1 − y)/denominator`, where the
/// denominator is the probability of having played `a` plus `γ`.
pub fn reward_estimates(k: usize, a: usize, denominator: f64, y: f64, out: &mut Vec<f64>) -> Result<()> {
    if a >= k {
        return Err(range("played action", a, k));
    }
    if !(denominator > 0.0) {
        return Err(Error::Numeric(format!("estimator denominator {denominator} for action {a}")));
    }
    out.clear();
    out.resize(k, 1.0);
    out[a] = 1.0 - (1.0 - y) / denominator;
    Ok(())
}

/// EXP4 over `N` experts and `K` actions.
#[derive(Debug, Clone)]
pub struct Exp4 {
    weights: WeightMatrix,
    params: Exp4Params,
    actions: usize,
    advice: Vec<usize>,
    law: Vec<f64>,
    estimates: Vec<f64>,
}

impl Exp4 {
    pub fn new(experts: usize, actions: usize, params: Exp4Params) -> Result<Self> {
        if experts == 0 {
            return Err(Error::Config("expert set is empty".into()));
        }
        if actions == 0 {
            return Err(Error::Config("action set is empty".into()));
        }
        Ok(Self {
            weights: WeightMatrix::uniform(1, experts)?,
            params,
            actions,
            advice: Vec::with_capacity(experts),
            law: Vec::with_capacity(actions),
            estimates: Vec::with_capacity(actions),
        })
    }

    /// Starts from the given expert weights instead of uniform.
    pub fn with_weights(weights: WeightMatrix, actions: usize, params: Exp4Params) -> Result<Self> {
        let mut agent = Self::new(weights.rows() * weights.cols(), actions, params)?;
        agent.weights = weights;
        Ok(agent)
    }

    pub fn params(&self) -> Exp4Params {
        self.params
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    /// Stores this round's advice and returns the induced action law.
    pub fn prepare(&mut self, advice: &[usize]) -> Result<&[f64]> {
        if advice.len() != self.weights.cols() {
            return Err(Error::Validation(format!(
                "advice covers {} experts, agent tracks {}",
                advice.len(),
                self.weights.cols()
            )));
        }
        self.advice.clear();
        self.advice.extend_from_slice(advice);
        action_law(self.weights.probs(), advice, self.actions, &mut self.law)?;
        Ok(&self.law)
    }

    pub fn law(&self) -> &[f64] {
        &self.law
    }

    pub fn advice(&self) -> &[usize] {
        &self.advice
    }

    /// Inverse-CDF draw from the prepared law.
    pub fn sample(&self, u: f64) -> usize {
        sample_index(&self.law, u)
    }

    /// Exponential-weights step for the prepared round after playing `a`.
    pub fn update(&mut self, a: usize, y: f64) -> Result<()> {
        let p_a = *self.law.get(a).ok_or_else(|| range("played action", a, self.actions))?;
        reward_estimates(self.actions, a, p_a + self.params.gamma, y, &mut self.estimates)?;
        let (est, advice) = (&self.estimates, &self.advice);
        self.weights.update(self.params.eta, |i| est[advice[i]])
    }
}

#[cfg(test)]
mod tests {
    use alloc::vec;

    use super::*;

    #[test]
    fn law_examples() {
        let mut p = Vec::new();
        action_law(&[0.5, 0.5], &[0, 1], 2, &mut p).unwrap();
        assert_eq!(p, [0.5, 0.5]);
        action_law(&[0.3, 0.7], &[0, 0], 3, &mut p).unwrap();
        assert_eq!(p, [1.0, 0.0, 0.0]);
        action_law(&[0.8, 0.2], &[1, 0], 2, &mut p).unwrap();
        assert!((p[0] - 0.2).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        assert!(matches!(action_law(&[], &[], 2, &mut p), Err(Error::Config(_))));
        assert!(matches!(action_law(&[1.0], &[2], 2, &mut p), Err(Error::Range { .. })));
    }

    #[test]
    fn estimate_arithmetic() {
        let mut e = Vec::new();
        reward_estimates(2, 1, 0.25, 0.0, &mut e).unwrap();
        assert_eq!(e, [1.0, -3.0]);
        reward_estimates(2, 1, 0.25, 1.0, &mut e).unwrap();
        assert_eq!(e, [1.0, 1.0]);
        assert!(matches!(reward_estimates(2, 0, 0.0, 0.0, &mut e), Err(Error::Numeric(_))));
    }

    #[test]
    fn full_reward_leaves_weights() {
        let mut agent = Exp4::new(3, 2, Exp4Params::new(0.5, 0.0).unwrap()).unwrap();
        agent.prepare(&[0, 1, 1]).unwrap();
        let before = agent.weights().probs().to_vec();
        agent.update(1, 1.0).unwrap();
        assert!(agent.weights().divergence(&before) < 1e-15);
    }

    #[test]
    fn zero_reward_moves_mass_away() {
        let mut agent = Exp4::new(2, 2, Exp4Params::new(0.5, 0.0).unwrap()).unwrap();
        agent.prepare(&[0, 1]).unwrap();
        agent.update(0, 0.0).unwrap();
        let q = agent.weights().probs();
        assert!(q[0] < q[1]);
        let expect = 1.0 / (1.0 + libm::exp(0.5 * (1.0 - (1.0 - 1.0 / 0.5))));
        assert!((q[0] - expect).abs() < 1e-15);
        assert_eq!(agent.advice(), vec![0, 1].as_slice());
    }

    #[test]
    fn params_reject_bad_values() {
        assert!(Exp4Params::new(f64::NAN, 0.0).is_err());
        assert!(Exp4Params::new(0.1, -1.0).is_err());
    }
}
