use crate::error::{Error, Result};

/// Actions are indices `0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActionSpace {
    count: usize,
}

impl ActionSpace {
    pub fn new(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Validation("action space must be non-empty".into()));
        }
        Ok(Self { count })
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// What the machine may transmit to the human.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecommendationSpace {
    /// An arbitrary finite alphabet `0..size`.
    Finite(usize),
    /// Recommendations are actions.
    Actions(usize),
    /// Actions `0..k` plus the defer symbol `k`.
    ActionsPlusDefer(usize),
}

impl RecommendationSpace {
    pub fn size(&self) -> usize {
        match *self {
            Self::Finite(n) | Self::Actions(n) => n,
            Self::ActionsPlusDefer(k) => k + 1,
        }
    }

    pub fn defer_symbol(&self) -> Option<usize> {
        match *self {
            Self::ActionsPlusDefer(k) => Some(k),
            _ => None,
        }
    }

    pub fn is_actions(&self) -> bool {
        matches!(self, Self::Actions(_))
    }

    pub(crate) fn validate(&self, actions: ActionSpace) -> Result<()> {
        match *self {
            Self::Finite(0) => Err(Error::Validation("recommendation space must be non-empty".into())),
            Self::Actions(k) | Self::ActionsPlusDefer(k) if k != actions.count() => Err(Error::Validation(
                alloc::format!("recommendation space built on {k} actions, instance has {}", actions.count()),
            )),
            _ => Ok(()),
        }
    }
}

/// Index of a joint policy `g_j ∘ f_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointPolicyIndex {
    pub machine: usize,
    pub human: usize,
}

impl JointPolicyIndex {
    pub fn new(machine: usize, human: usize) -> Self {
        Self { machine, human }
    }

    /// Row-major position in an `n1 × n2` grid.
    pub fn flat(&self, n2: usize) -> usize {
        self.machine * n2 + self.human
    }

    pub fn from_flat(flat: usize, n2: usize) -> Self {
        Self { machine: flat / n2, human: flat % n2 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defer_symbol_sits_after_actions() {
        let r = RecommendationSpace::ActionsPlusDefer(3);
        assert_eq!(r.size(), 4);
        assert_eq!(r.defer_symbol(), Some(3));
        assert_eq!(RecommendationSpace::Actions(3).defer_symbol(), None);
    }

    #[test]
    fn mismatched_action_count_rejected() {
        let a = ActionSpace::new(2).unwrap();
        assert!(RecommendationSpace::Actions(3).validate(a).is_err());
        assert!(RecommendationSpace::Finite(0).validate(a).is_err());
        assert!(RecommendationSpace::Finite(9).validate(a).is_ok());
        assert!(ActionSpace::new(0).is_err());
    }

    #[test]
    fn flat_round_trips() {
        for flat in 0..12 {
            assert_eq!(JointPolicyIndex::from_flat(flat, 3).flat(3), flat);
        }
        assert_eq!(JointPolicyIndex::from_flat(7, 3), JointPolicyIndex::new(2, 1));
    }
}
