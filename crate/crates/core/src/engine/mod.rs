//! The interaction loop with enforced information barriers, regret
//! accounting, and the lifted-bandit coupling harnesses.

mod algorithm;
mod barrier;
mod couple;
mod episode;
mod lift;

pub use algorithm::{build_team, check_mode, dimensions, instance_mode, AlgorithmId, AlgorithmSpec, Team};
pub use barrier::{BarrierMode, Feedback, HumanAgent, HumanView, MachineAgent, MachineView, SideLaw};
pub use couple::{couple_check, couple_joint_exp4, CoupleOptions, CoupleReport, JointCoupleReport};
pub use episode::{
    draw_sequence, expected_under, hindsight_best, run_agents, run_episode, run_fixed_sequence, DrawSource, EnvSource,
    Episode, RoundRecord, SequenceSource,
};
pub use lift::{lift_instance, LiftedInstance};
