//! Environment generators for every construction, plus the policy space
//! independence checker.

mod env;
mod generators;
mod independence;
pub mod lazy;

pub use env::{Atom, Conjecture, Draw, Environment, OpaqueArms, Payoff, PrivateArms, ShuffledArms, Tabular, MAX_ENUMERATED_ATOMS};
pub use generators::{
    contexts_for_horizon, make_allocation, make_conjecture, make_defer, make_opacity_lb, make_private_info_lb,
    make_randomized_lb, make_tabular, AllocationRule, BernoulliArms, RandomTabular,
};
pub use independence::{check_independence, IndependenceReport, Witness, EXACT_TOLERANCE, MC_STANDARD_ERRORS};
