//! Information barriers between the two players.
//!
//! Each agent only ever sees a view built by the engine for its side. Reads
//! of the peer's context, policy set or weights go through accessors that
//! check the barrier mode; a forbidden read returns a [`BarrierFault`] and
//! also latches it in the round, so an agent that swallows the error still
//! aborts the episode.

use core::cell::Cell;

use crate::error::{BarrierFault, Result, Secret, Side};
use crate::model::{HumanPolicy, MachinePolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BarrierMode {
    /// Private information and opacity: each side sees only its own context
    /// and policy set.
    Full,
    /// No private information and no opacity: both contexts and both policy
    /// sets are visible to both sides.
    Open,
    /// As `Full`, plus a per-round policy index sent from human to machine.
    Directive,
}

impl BarrierMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::Open => "open",
            Self::Directive => "directive",
        }
    }

    pub fn allows_peer_reads(self) -> bool {
        self == Self::Open
    }
}

/// Shared reward feedback, visible to both sides after a round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedback {
    pub round: usize,
    pub recommendation: usize,
    pub action: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Guard<'a> {
    pub mode: BarrierMode,
    pub round: usize,
    pub fault: &'a Cell<Option<BarrierFault>>,
}

impl Guard<'_> {
    fn check(&self, side: Side, secret: Secret) -> Result<(), BarrierFault> {
        if self.mode.allows_peer_reads() {
            return Ok(());
        }
        let fault = BarrierFault { side, secret, round: self.round };
        if self.fault.get().is_none() {
            self.fault.set(Some(fault));
        }
        Err(fault)
    }
}

/// What the machine may read in one round.
#[derive(Clone, Copy)]
pub struct MachineView<'a> {
    pub(crate) guard: Guard<'a>,
    pub(crate) x: u64,
    pub(crate) z: u64,
    pub(crate) own: &'a [MachinePolicy],
    pub(crate) peer: &'a [HumanPolicy],
    pub(crate) peer_weights: &'a [f64],
    pub(crate) directive: Option<usize>,
    pub(crate) horizon: u64,
    pub(crate) recommendations: usize,
}

impl<'a> MachineView<'a> {
    pub fn round(&self) -> usize {
        self.guard.round
    }

    pub fn mode(&self) -> BarrierMode {
        self.guard.mode
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn context(&self) -> u64 {
        self.x
    }

    pub fn policies(&self) -> &'a [MachinePolicy] {
        self.own
    }

    pub fn recommendation_count(&self) -> usize {
        self.recommendations
    }

    /// Policy index sent by the human this round, if the channel is open.
    pub fn directive(&self) -> Option<usize> {
        self.directive
    }

    /// Sizes are public: both players know `N₁` and `N₂`.
    pub fn peer_policy_count(&self) -> usize {
        self.peer.len()
    }

    pub fn peer_context(&self) -> Result<u64, BarrierFault> {
        self.guard.check(Side::Machine, Secret::Context).map(|_| self.z)
    }

    pub fn peer_policies(&self) -> Result<&'a [HumanPolicy], BarrierFault> {
        self.guard.check(Side::Machine, Secret::Policies).map(|_| self.peer)
    }

    pub fn peer_weights(&self) -> Result<&'a [f64], BarrierFault> {
        self.guard.check(Side::Machine, Secret::Weights).map(|_| self.peer_weights)
    }
}

/// What the human may read in one round. The context is present from the
/// directive step on; the recommendation arrives separately in `act`.
#[derive(Clone, Copy)]
pub struct HumanView<'a> {
    pub(crate) guard: Guard<'a>,
    pub(crate) x: u64,
    pub(crate) z: u64,
    pub(crate) own: &'a [HumanPolicy],
    pub(crate) peer: &'a [MachinePolicy],
    pub(crate) peer_weights: &'a [f64],
    pub(crate) horizon: u64,
    pub(crate) actions: usize,
    pub(crate) recommendations: usize,
}

impl<'a> HumanView<'a> {
    pub fn round(&self) -> usize {
        self.guard.round
    }

    pub fn mode(&self) -> BarrierMode {
        self.guard.mode
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn context(&self) -> u64 {
        self.z
    }

    pub fn policies(&self) -> &'a [HumanPolicy] {
        self.own
    }

    pub fn action_count(&self) -> usize {
        self.actions
    }

    pub fn recommendation_count(&self) -> usize {
        self.recommendations
    }

    pub fn peer_policy_count(&self) -> usize {
        self.peer.len()
    }

    pub fn peer_context(&self) -> Result<u64, BarrierFault> {
        self.guard.check(Side::Human, Secret::Context).map(|_| self.x)
    }

    pub fn peer_policies(&self) -> Result<&'a [MachinePolicy], BarrierFault> {
        self.guard.check(Side::Human, Secret::Policies).map(|_| self.peer)
    }

    pub fn peer_weights(&self) -> Result<&'a [f64], BarrierFault> {
        self.guard.check(Side::Human, Secret::Weights).map(|_| self.peer_weights)
    }
}

/// One side's contribution to the law over policy pairs it plays this round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SideLaw<'a> {
    Unspecified,
    /// Distribution over this side's own policies.
    Marginal(&'a [f64]),
    /// Row-major distribution over all pairs.
    Joint(&'a [f64]),
    /// A single policy of this side, chosen deterministically.
    Index(usize),
}

pub trait MachineAgent {
    fn recommend(&mut self, view: &MachineView<'_>) -> Result<usize>;

    fn observe(&mut self, view: &MachineView<'_>, feedback: &Feedback) -> Result<()>;

    /// Weights the agent keeps, if any.
    fn weights(&self) -> &[f64] {
        &[]
    }

    /// Law over the policies used in the round just played.
    fn law(&self) -> SideLaw<'_> {
        SideLaw::Unspecified
    }
}

pub trait HumanAgent {
    /// Policy index sent to the machine before it recommends. Only the
    /// directive mode accepts `Some`.
    fn directive(&mut self, _view: &HumanView<'_>) -> Result<Option<usize>> {
        Ok(None)
    }

    fn act(&mut self, view: &HumanView<'_>, recommendation: usize) -> Result<usize>;

    fn observe(&mut self, view: &HumanView<'_>, feedback: &Feedback) -> Result<()>;

    fn weights(&self) -> &[f64] {
        &[]
    }

    fn law(&self) -> SideLaw<'_> {
        SideLaw::Unspecified
    }
}
