//! Deterministic policies for both players.
//!
//! A machine policy maps a context `x` to a recommendation; a human policy
//! maps `(r, z)` to an action. Each is either a dense table over a finite
//! context range or a closed-form rule with its parameters spelled out, so
//! instances stay auditable and every randomness source lives in the
//! environment or the agent.

use alloc::vec::Vec;

use crate::envgen::lazy::{BernoulliTable, PermutationTable, WinnerTable};
use crate::error::{range, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum MachinePolicy {
    /// `outputs[x]`.
    Table(Vec<usize>),
    Constant(usize),
    /// Bit `b` of the context.
    ContextBit(u32),
    /// `π_x(slot)` for a per-context permutation.
    Permuted { slot: usize, table: PermutationTable },
}

impl MachinePolicy {
    pub fn recommend(&self, x: u64) -> Result<usize> {
        match self {
            Self::Table(outputs) => lookup(outputs, x, "machine context"),
            Self::Constant(r) => Ok(*r),
            Self::ContextBit(b) => Ok(((x >> b) & 1) as usize),
            Self::Permuted { slot, table } => Ok(table.image(x, *slot)),
        }
    }
}

/// A human decision rule that ignores the recommendation.
#[derive(Debug, Clone, PartialEq)]
pub enum ContextRule {
    Constant(usize),
    /// `actions[z]`.
    Table(Vec<usize>),
}

impl ContextRule {
    pub fn apply(&self, z: u64) -> Result<usize> {
        match self {
            Self::Constant(a) => Ok(*a),
            Self::Table(actions) => lookup(actions, z, "human context"),
        }
    }

    pub(crate) fn max_output(&self) -> Option<usize> {
        match self {
            Self::Constant(a) => Some(*a),
            Self::Table(t) => t.iter().copied().max(),
        }
    }
}

/// Fixed rule deciding who decides: `true` hands the decision to the human.
#[derive(Debug, Clone, PartialEq)]
pub enum Allocator {
    Constant(bool),
    /// `to_human[z]`.
    Table(Vec<bool>),
}

impl Allocator {
    pub fn to_human(&self, z: u64) -> Result<bool> {
        match self {
            Self::Constant(b) => Ok(*b),
            Self::Table(t) => t
                .get(usize::try_from(z).unwrap_or(usize::MAX))
                .copied()
                .ok_or_else(|| range("allocator context", z, t.len())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HumanPolicy {
    /// `actions[r * contexts + z]`.
    Table { contexts: usize, actions: Vec<usize> },
    /// Play the recommendation.
    Follow,
    Rule(ContextRule),
    /// Bit `r` of the context.
    ContextBit,
    /// Bit `r` of the private lookup `ĝ(z)`.
    LazyBit(BernoulliTable),
    /// `z` packs a shuffled-arm context `x` above `arms` payoff bits. Plays the
    /// winning action of `x` when arm `π_x^{-1}(r)` paid out, the losing one
    /// otherwise.
    PermutedArm {
        permutation: PermutationTable,
        winners: WinnerTable,
    },
    /// Per-round map read from `z`: bits `2·slot + r`.
    MapSlot(usize),
    /// `rule(z)` when the allocator hands `z` to the human, else `r`.
    Allocated { allocator: Allocator, rule: ContextRule },
    /// `rule(z)` when `r` is the defer symbol, else `r`.
    Defer { defer: usize, rule: ContextRule },
}

impl HumanPolicy {
    pub fn act(&self, r: usize, z: u64) -> Result<usize> {
        match self {
            Self::Table { contexts, actions } => {
                let z = usize::try_from(z).ok().filter(|z| z < contexts).ok_or_else(|| range("human context", z, *contexts))?;
                let idx = r.checked_mul(*contexts).and_then(|v| v.checked_add(z)).unwrap_or(usize::MAX);
                actions.get(idx).copied().ok_or_else(|| range("recommendation", r, actions.len() / contexts.max(&1)))
            }
            Self::Follow => Ok(r),
            Self::Rule(rule) => rule.apply(z),
            Self::ContextBit => bit_of(z, r),
            Self::LazyBit(table) => {
                if r >= table.arms() {
                    return Err(range("recommendation", r, table.arms()));
                }
                Ok(table.bit(z, r) as usize)
            }
            Self::PermutedArm { permutation, winners } => {
                let arms = permutation.len();
                if r >= arms {
                    return Err(range("recommendation", r, arms));
                }
                let x = z >> arms;
                let arm = permutation.preimage(x, r);
                let paid = (z >> arm) & 1 == 1;
                let w = winners.winner(x);
                Ok(if paid { w } else { 1 - w })
            }
            Self::MapSlot(slot) => {
                if r > 1 {
                    return Err(range("recommendation", r, 2));
                }
                bit_of(z, 2 * slot + r)
            }
            Self::Allocated { allocator, rule } => {
                if allocator.to_human(z)? {
                    rule.apply(z)
                } else {
                    Ok(r)
                }
            }
            Self::Defer { defer, rule } => {
                if r == *defer {
                    rule.apply(z)
                } else if r < *defer {
                    Ok(r)
                } else {
                    Err(range("recommendation", r, defer + 1))
                }
            }
        }
    }
}

/// The joint policy `π(x, z) = g(f(x), z)`.
pub fn eval_joint(f: &MachinePolicy, g: &HumanPolicy, x: u64, z: u64) -> Result<usize> {
    g.act(f.recommend(x)?, z)
}

fn lookup(table: &[usize], key: u64, what: &'static str) -> Result<usize> {
    usize::try_from(key)
        .ok()
        .and_then(|k| table.get(k))
        .copied()
        .ok_or_else(|| range(what, key, table.len()))
}

fn bit_of(z: u64, bit: usize) -> Result<usize> {
    if bit >= 64 {
        return Err(range("context bit", bit, 64));
    }
    Ok(((z >> bit) & 1) as usize)
}
