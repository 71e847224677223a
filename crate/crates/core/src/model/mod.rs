//! Domain types shared by every module: spaces, policies, instances with
//! their value oracles, and regret arithmetic.

mod instance;
mod policy;
mod regret;
mod spaces;

pub use instance::{
    best_pair, expected_reward, monte_carlo_values, BestPair, Estimate, Instance, Oracle, ValueTable,
    DEFAULT_MC_SAMPLES,
};
pub use policy::{eval_joint, Allocator, ContextRule, HumanPolicy, MachinePolicy};
pub use regret::{regret_bound, Accounting, BoundKind, Dimensions, RegretTrace};
pub use spaces::{ActionSpace, JointPolicyIndex, RecommendationSpace};
