use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::count_components;
use crate::matrices::{build_matrices, ComparisonMatrices};
use crate::rating::{fit_bt_mle, SolverConfig};
use crate::rng::{derive_seed, seeded};
use crate::types::{BattleRecord, ModelRef};

/// Redraws allowed per round before giving up.
pub const MAX_ATTEMPTS_PER_ROUND: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpread {
    pub model: ModelRef,
    pub mean: f64,
    pub variance: f64,
    pub q025: f64,
    pub median: f64,
    pub q975: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub label: String,
    pub rounds: usize,
    pub seed: u64,
    /// Resamples discarded because they could not be fitted.
    pub redraws: usize,
    pub per_model: Vec<ModelSpread>,
    /// `ratings[r][i]`: model `i` in round `r`.
    pub ratings: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceComparison {
    pub roster: Vec<ModelRef>,
    /// Uniform variance minus proximity variance, per model.
    pub variance_reduction: Vec<f64>,
    pub mean_variance_reduction: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

// (winner, loser) pairs in a fixed order, so the input order is irrelevant
fn canonical(m: &ComparisonMatrices) -> Vec<(usize, usize)> {
    let n = m.len();
    let mut out = Vec::with_capacity(m.total_battles() as usize);
    for i in 0..n {
        for j in 0..n {
            for _ in 0..m.wins(i, j) {
                out.push((i, j));
            }
        }
    }
    out
}

fn fit_round(
    outcomes: &[(usize, usize)],
    roster: &[ModelRef],
    solver: &SolverConfig,
    seed: u64,
    round: usize,
) -> Result<(Vec<f64>, usize)> {
    let mut rng = seeded(derive_seed(seed, &[round as u64]));
    for attempt in 0..MAX_ATTEMPTS_PER_ROUND {
        let mut m = ComparisonMatrices::empty(roster.to_vec())?;
        for _ in 0..outcomes.len() {
            let (w, l) = outcomes[rng.random_range(0..outcomes.len())];
            m.add_outcome(w, l);
        }
        match fit_bt_mle(&m, solver) {
            Ok(r) => return Ok((r.scores().to_vec(), attempt)),
            Err(e) if e.is_numerical() => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::BootstrapExhausted {
        round,
        attempts: MAX_ATTEMPTS_PER_ROUND,
    })
}

/// Per-model rating spread over `rounds` resample-and-refit rounds.
///
/// Valid records are resampled with replacement. Rounds run in parallel with
/// seeds derived from `seed` and the round index, so the report does not
/// depend on scheduling or on the order of `records`.
pub fn bootstrap_variance(
    records: &[BattleRecord],
    roster: &[ModelRef],
    rounds: usize,
    seed: u64,
    solver: &SolverConfig,
    label: &str,
) -> Result<BootstrapReport> {
    bootstrap_matrices(&build_matrices(records, roster)?, rounds, seed, solver, label)
}

/// [`bootstrap_variance`] on already aggregated outcomes.
pub fn bootstrap_matrices(
    original: &ComparisonMatrices,
    rounds: usize,
    seed: u64,
    solver: &SolverConfig,
    label: &str,
) -> Result<BootstrapReport> {
    if rounds < 2 {
        return Err(Error::InvalidConfig("bootstrap needs at least 2 rounds".into()));
    }
    let roster = original.roster();
    let outcomes = canonical(original);
    if outcomes.len() < roster.len() {
        return Err(Error::InvalidConfig(format!(
            "{} valid records for {} models",
            outcomes.len(),
            roster.len()
        )));
    }
    if count_components(original).len() != 1 {
        return Err(Error::DisconnectedOriginal);
    }

    let fitted: Vec<(Vec<f64>, usize)> = (0..rounds)
        .into_par_iter()
        .map(|r| fit_round(&outcomes, roster, solver, seed, r))
        .collect::<Result<_>>()?;
    let redraws = fitted.iter().map(|f| f.1).sum();
    let ratings: Vec<Vec<f64>> = fitted.into_iter().map(|f| f.0).collect();

    let per_model = roster
        .iter()
        .enumerate()
        .map(|(i, model)| {
            let mut xs: Vec<f64> = ratings.iter().map(|r| r[i]).collect();
            let mean = xs.iter().sum::<f64>() / rounds as f64;
            let variance = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (rounds - 1) as f64;
            xs.sort_by(f64::total_cmp);
            ModelSpread {
                model: model.clone(),
                mean,
                variance,
                q025: quantile(&xs, 0.025),
                median: quantile(&xs, 0.5),
                q975: quantile(&xs, 0.975),
            }
        })
        .collect();

    Ok(BootstrapReport {
        label: label.to_string(),
        rounds,
        seed,
        redraws,
        per_model,
        ratings,
    })
}

pub fn compare(uniform: &BootstrapReport, proximity: &BootstrapReport) -> Result<VarianceComparison> {
    let same = uniform.per_model.len() == proximity.per_model.len()
        && uniform.per_model.iter().zip(&proximity.per_model).all(|(a, b)| a.model == b.model);
    if !same {
        return Err(Error::RosterMismatch);
    }
    let variance_reduction: Vec<f64> = uniform
        .per_model
        .iter()
        .zip(&proximity.per_model)
        .map(|(a, b)| a.variance - b.variance)
        .collect();
    let mean_variance_reduction = variance_reduction.iter().sum::<f64>() / variance_reduction.len().max(1) as f64;
    Ok(VarianceComparison {
        roster: uniform.per_model.iter().map(|s| s.model.clone()).collect(),
        variance_reduction,
        mean_variance_reduction,
    })
}
