//! Synthetic worlds with known ratings and the experiment protocols built on
//! them: threshold sweeps, Fisher-information sweeps and chronological replay.

mod replay;
mod sweep;
mod world;

pub use replay::{
    replay_experiment, roster_of, synthetic_stream, RefitCadence, ReplayConfig, ReplayOutcome, ReplayStrategy,
    TimelinePoint,
};
pub use sweep::{fim_sweep, practical_counts, threshold_sweep, FimMode, SweepResult, SweepRow};
pub use world::{generate_battles, generate_matrices, sample_outcome, GeneratedBattles, Strategy, SyntheticWorld};
