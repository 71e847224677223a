//! Simulation of a two-player contextual bandit in which a machine sees
//! context `x` and recommends `r = f(x)`, and a human sees `(r, z)` and acts
//! `a = g(r, z)`.
//!
//! The crate is `no_std` (it needs `alloc`). It provides the policy and
//! instance model with exact value oracles, generators for the lower-bound,
//! allocation, deferral and worst-case constructions, five learning
//! strategies, and an episode engine that enforces what each player may see.

#![no_std]
// `!(x > 0.0)` is used on purpose so NaN takes the error branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod agents;
pub mod engine;
pub mod envgen;
pub mod error;
pub mod model;
pub mod rng;

pub use error::{BarrierFault, Error, Result, Secret, Side};
