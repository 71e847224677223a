use alloc::vec;
use alloc::vec::Vec;

use crate::error::{range, Error, Result};
use crate::model::JointPolicyIndex;

/// `mean + √(max(ln(T/(N n)), 0)/n)`.
pub fn moss_index(mean: f64, pulls: u64, horizon: u64, arms: usize) -> f64 {
    let n = pulls as f64;
    let bonus = libm::log(horizon as f64 / (arms as f64 * n)).max(0.0);
    mean + libm::sqrt(bonus / n)
}

/// Pull statistics for MOSS over all `N = N₁·N₂` policy pairs. The arm
/// choice is a deterministic function of the shared reward history, so both
/// players can replay it and always agree on the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MossState {
    horizon: u64,
    n2: usize,
    counts: Vec<u64>,
    sums: Vec<f64>,
    round: u64,
}

impl MossState {
    pub fn new(n1: usize, n2: usize, horizon: u64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Config("MOSS needs a positive horizon".into()));
        }
        let arms = n1 * n2;
        if arms == 0 {
            return Err(Error::Config("MOSS needs at least one policy pair".into()));
        }
        Ok(Self { horizon, n2, counts: vec![0; arms], sums: vec![0.0; arms], round: 0 })
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Unpulled arms first in index order, then the highest index; ties go to
    /// the lowest arm.
    pub fn select(&self) -> usize {
        if let Some(arm) = self.counts.iter().position(|&n| n == 0) {
            return arm;
        }
        let arms = self.arms();
        let mut best = (0, f64::NEG_INFINITY);
        for (arm, (&n, &s)) in self.counts.iter().zip(&self.sums).enumerate() {
            let idx = moss_index(s / n as f64, n, self.horizon, arms);
            if idx > best.1 {
                best = (arm, idx);
            }
        }
        best.0
    }

    /// Arm `a·N₂ + b` plays machine policy `a` with human policy `b`.
    pub fn decode(&self, arm: usize) -> JointPolicyIndex {
        JointPolicyIndex::from_flat(arm, self.n2)
    }

    pub fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        if arm >= self.arms() {
            return Err(range("arm", arm, self.arms()));
        }
        self.counts[arm] += 1;
        self.sums[arm] += reward;
        self.round += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_arithmetic() {
        let v = moss_index(0.6, 10, 1000, 4);
        let expect = 0.6 + libm::sqrt(libm::log(25.0) / 10.0);
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 1.16736).abs() < 1e-5);
        // clamp: T/(N n) < 1 gives no bonus
        assert_eq!(moss_index(0.3, 100, 10, 4), 0.3);
    }

    #[test]
    fn first_rounds_sweep_arms() {
        let mut s = MossState::new(2, 3, 100).unwrap();
        for arm in 0..6 {
            assert_eq!(s.select(), arm);
            s.update(arm, 0.5).unwrap();
        }
        assert_eq!(s.round(), 6);
    }

    #[test]
    fn decode_example() {
        let s = MossState::new(3, 3, 10).unwrap();
        assert_eq!(s.decode(7), JointPolicyIndex::new(2, 1));
    }

    #[test]
    fn zero_horizon_rejected() {
        assert!(matches!(MossState::new(2, 2, 0), Err(Error::Config(_))));
    }
}
