//! Circuit simulation: exact noiseless evolution and noisy trajectories.

pub mod exact;
pub mod noise;
pub mod trajectory;

pub use exact::{exact_outcome_distribution, run_exact, ExactBranch, ExactResult, StateVector};
pub use noise::{NoiseConvention, NoiseSpec};
pub use trajectory::{run_records, run_shots, success_counts, ShotCounts, ShotRecord, SuccessCounts};
