//! Learning strategies: EXP4, joint EXP4, the directive-channel variant,
//! MOSS over policy pairs and independent dual EXP4, plus the per-side
//! agents the engine drives.

mod exp4;
mod joint;
mod moss;
mod p2exp4;
pub mod sides;
mod weights;

pub use exp4::{action_law, reward_estimates, Exp4, Exp4Params};
pub use joint::JointExp4;
pub use moss::{moss_index, MossState};
pub use p2exp4::P2Exp4;
pub use weights::WeightMatrix;
