//! Ranking-agreement metrics and bootstrap stability of fitted ratings.

mod bootstrap;
mod metrics;

pub use bootstrap::{
    bootstrap_matrices, bootstrap_variance, compare, BootstrapReport, ModelSpread, VarianceComparison, MAX_ATTEMPTS_PER_ROUND,
};
pub use metrics::{descending_ranks, kendall_tau_b, rank_metrics, score_metrics, spearman, RankMetrics};
