//! Rating and scheduling engine for pairwise-comparison leaderboards.
//!
//! Battles between models are aggregated into [`ComparisonMatrices`], fitted
//! with a Bradley-Terry maximum-likelihood solver into Elo-scale
//! [`RatingVector`]s, and analysed through the Fisher information of the fit.
//! The [`scheduler`] decides which models should meet next (proximity
//! sampling) and where a new model enters the ladder (placement matches).

pub mod analysis;
pub mod disc;
pub mod error;
pub mod graph;
pub mod information;
pub mod io;
pub mod matrices;
pub mod rating;
pub mod rng;
pub mod scheduler;
pub mod simulator;
pub mod types;

pub use error::{Error, Result};
pub use matrices::{build_matrices, payoff, ComparisonMatrices, PayoffMatrix};
pub use rating::{elo_update, fit_bt_mle, win_prob, EloConfig, SolverConfig};
pub use types::{
    numbered_roster, BattleRecord, ModelRef, RatingVector, Source, DEFAULT_GAUGE_ANCHOR, ELO_ALPHA,
};
