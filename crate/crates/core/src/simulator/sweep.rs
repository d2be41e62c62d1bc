use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::world::{generate_matrices, SyntheticWorld, Strategy};
use crate::analysis::rank_metrics;
use crate::error::Result;
use crate::information::{fisher_matrix, ideal_allocation, information_from_counts};
use crate::matrices::ComparisonMatrices;
use crate::rating::{fit_bt_mle, SolverConfig};
use crate::rng::{derive_seed, seeded};
use crate::scheduler::{ProximityConfig, ProximitySampler};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub h: f64,
    pub budget: u64,
    pub strategy: String,
    pub seed: u64,
    pub rmse: f64,
    pub mse: f64,
    pub kendall_tau: f64,
    pub spearman_rho: f64,
    pub avg_rank_diff: f64,
    /// `tr[I^-1]` at the golden ratings; infinite iff disconnected.
    pub trace_inv_fim: f64,
    pub connected: bool,
    /// Failure message when the cell could not be evaluated.
    pub error: Option<String>,
}

impl SweepRow {
    fn blank(h: f64, budget: u64, strategy: &str, seed: u64) -> Self {
        Self {
            h,
            budget,
            strategy: strategy.to_string(),
            seed,
            rmse: f64::NAN,
            mse: f64::NAN,
            kendall_tau: f64::NAN,
            spearman_rho: f64::NAN,
            avg_rank_diff: f64::NAN,
            trace_inv_fim: f64::INFINITY,
            connected: false,
            error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Rows matching `(h, budget, strategy)`, in seed order.
    pub fn cell(&self, h: f64, budget: u64, strategy: &str) -> Vec<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.h == h && r.budget == budget && r.strategy == strategy)
            .collect()
    }

    /// Mean of `f` over the seeds of one cell, ignoring failed rows.
    pub fn mean_of(&self, h: f64, budget: u64, strategy: &str, f: impl Fn(&SweepRow) -> f64) -> f64 {
        let vals: Vec<f64> = self
            .cell(h, budget, strategy)
            .into_iter()
            .filter(|r| r.error.is_none())
            .map(f)
            .collect();
        if vals.is_empty() {
            f64::NAN
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    }
}

fn strategy_code(s: &Strategy) -> u64 {
    match s {
        Strategy::Proximity { .. } => 1,
        Strategy::Uniform => 2,
    }
}

type Cell = (f64, u64, Strategy, u64);

fn threshold_cell(world: &SyntheticWorld, (h, budget, strategy, seed): Cell, solver: &SolverConfig) -> SweepRow {
    let mut row = SweepRow::blank(h, budget, strategy.label(), seed);
    let cell_seed = derive_seed(world.seed, &[seed, budget, strategy_code(&strategy), h.to_bits()]);
    let strategy = match strategy {
        Strategy::Proximity { .. } => Strategy::Proximity { h },
        Strategy::Uniform => Strategy::Uniform,
    };
    let m = match generate_matrices(world, strategy, budget as usize, &mut seeded(cell_seed)) {
        Ok(m) => m,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    if let Ok(info) = fisher_matrix(&world.golden, &m) {
        row.connected = info.connected;
        row.trace_inv_fim = info.trace_inverse_fim();
    }
    match fit_bt_mle(&m, solver).and_then(|fit| rank_metrics(&fit, &world.golden)) {
        Ok(metrics) => {
            row.rmse = metrics.rmse;
            row.mse = metrics.mse();
            row.kendall_tau = metrics.kendall_tau;
            row.spearman_rho = metrics.spearman_rho;
            row.avg_rank_diff = metrics.avg_rank_diff;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Generate, fit and score every `(h, C, strategy, seed)` cell in parallel.
/// The `h` inside a proximity strategy is replaced by each swept value.
/// Failed cells are kept with their error message.
pub fn threshold_sweep(
    world: &SyntheticWorld,
    hs: &[f64],
    budgets: &[u64],
    strategies: &[Strategy],
    seeds: &[u64],
    solver: &SolverConfig,
) -> SweepResult {
    let cells: Vec<Cell> = hs
        .iter()
        .flat_map(|&h| {
            budgets.iter().flat_map(move |&c| {
                strategies.iter().flat_map(move |&s| seeds.iter().map(move |&seed| (h, c, s, seed)))
            })
        })
        .collect();
    let rows = cells.into_par_iter().map(|cell| threshold_cell(world, cell, solver)).collect();
    SweepResult { rows }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FimMode {
    /// Equal counts `C / |S(h)|` on every proximity pair.
    Ideal,
    /// Counts from repeated two-model proximity draws.
    Practical,
}

impl FimMode {
    pub fn label(&self) -> &'static str {
        match self {
            FimMode::Ideal => "ideal",
            FimMode::Practical => "practical",
        }
    }
}

/// Counts accumulated by `budget` two-model proximity draws at threshold `h`.
pub fn practical_counts(world: &SyntheticWorld, h: f64, budget: u64, seed: u64) -> Result<ComparisonMatrices> {
    let cfg = ProximityConfig {
        h,
        sample_size_k: 2,
        ..ProximityConfig::default()
    };
    let sampler = ProximitySampler::new(world.golden.clone(), cfg)?;
    let mut m = ComparisonMatrices::empty(world.golden.roster().to_vec())?;
    let mut rng = seeded(seed);
    let mut s_max = 0;
    for _ in 0..budget {
        let set = sampler.sample_with_max(&m, s_max, &mut rng);
        let (i, j) = (set[0], set[1]);
        m.add_outcome(i, j);
        s_max = s_max.max(m.count(i, j));
    }
    Ok(m)
}

fn fim_cell(world: &SyntheticWorld, h: f64, budget: u64, mode: FimMode, seed: u64) -> SweepRow {
    let mut row = SweepRow::blank(h, budget, mode.label(), seed);
    let n = world.len();
    let counts = match mode {
        FimMode::Ideal => ideal_allocation(&world.golden, h, budget as f64),
        FimMode::Practical => {
            let cell_seed = derive_seed(world.seed, &[seed, budget, h.to_bits()]);
            practical_counts(world, h, budget, cell_seed)
                .map(|m| DMatrix::from_fn(n, n, |i, j| m.count(i, j) as f64))
        }
    };
    match counts.and_then(|c| information_from_counts(&world.golden, &c)) {
        Ok(info) => {
            row.connected = info.connected;
            row.trace_inv_fim = info.trace_inverse_fim();
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// `tr[I^-1]` at the golden ratings for each `(h, C, seed)` cell.
pub fn fim_sweep(world: &SyntheticWorld, hs: &[f64], budgets: &[u64], mode: FimMode, seeds: &[u64]) -> SweepResult {
    let cells: Vec<(f64, u64, u64)> = hs
        .iter()
        .flat_map(|&h| budgets.iter().flat_map(move |&c| seeds.iter().map(move |&s| (h, c, s))))
        .collect();
    let rows = cells
        .into_par_iter()
        .map(|(h, c, s)| fim_cell(world, h, c, mode, s))
        .collect();
    SweepResult { rows }
}
