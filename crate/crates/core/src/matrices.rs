//! Battle-count and win-count matrices aggregated from battle records.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{check_unique, BattleRecord, ModelRef};

/// Symmetric battle counts `N` and directed win counts `W` over a roster.
///
/// Roster order is the index order of both matrices. `N[i][j] = W[i][j] + W[j][i]`
/// and the diagonals are zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonMatrices {
    roster: Vec<ModelRef>,
    /// Row-major `n * n` win counts.
    wins: Vec<u64>,
}

impl ComparisonMatrices {
    pub fn empty(roster: Vec<ModelRef>) -> Result<Self> {
        check_unique(&roster)?;
        let n = roster.len();
        Ok(Self {
            roster,
            wins: vec![0; n * n],
        })
    }

    /// Builds from a dense row-major win matrix; the diagonal must be zero.
    pub fn from_wins(roster: Vec<ModelRef>, wins: Vec<u64>) -> Result<Self> {
        check_unique(&roster)?;
        let n = roster.len();
        if wins.len() != n * n {
            return Err(Error::RosterMismatch);
        }
        if let Some(i) = (0..n).find(|&i| wins[i * n + i] != 0) {
            return Err(Error::SelfBattle {
                index: i,
                id: roster[i].id.clone(),
            });
        }
        Ok(Self { roster, wins })
    }

    pub fn roster(&self) -> &[ModelRef] {
        &self.roster
    }

    pub fn len(&self) -> usize {
        self.roster.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roster.is_empty()
    }

    /// Times model `i` beat model `j`.
    pub fn wins(&self, i: usize, j: usize) -> u64 {
        self.wins[i * self.len() + j]
    }

    /// Battles between `i` and `j`.
    pub fn count(&self, i: usize, j: usize) -> u64 {
        if i == j {
            0
        } else {
            self.wins(i, j) + self.wins(j, i)
        }
    }

    /// Largest entry of the count matrix.
    pub fn max_count(&self) -> u64 {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.count(i, j))
            .max()
            .unwrap_or(0)
    }

    pub fn total_battles(&self) -> u64 {
        self.wins.iter().sum()
    }

    pub fn add_outcome(&mut self, winner: usize, loser: usize) {
        assert_ne!(winner, loser, "self battle");
        let n = self.len();
        self.wins[winner * n + loser] += 1;
    }

    /// Dense row-major count matrix.
    pub fn counts_dense(&self) -> Vec<u64> {
        let n = self.len();
        let mut out = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.count(i, j);
            }
        }
        out
    }

    pub fn wins_dense(&self) -> &[u64] {
        &self.wins
    }

    /// Pairs `(i, j)` with `i < j` that have at least one battle.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.len();
        (0..n)
            .flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.count(i, j) > 0)
    }

    /// Sub-matrices over the distinct models at `idx`, in that order.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut wins = vec![0; k * k];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                wins[a * k + b] = self.wins(i, j);
            }
        }
        Self {
            roster: idx.iter().map(|&i| self.roster[i].clone()).collect(),
            wins,
        }
    }

    /// Keeps only pairs whose battle count exceeds `min_count`.
    pub fn filter_pairs(&self, min_count: u64) -> Self {
        let n = self.len();
        let mut wins = self.wins.clone();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.count(i, j) <= min_count {
                    wins[i * n + j] = 0;
                }
            }
        }
        Self {
            roster: self.roster.clone(),
            wins,
        }
    }
}

/// Aggregates records into count and win matrices over `roster`.
///
/// Records naming a model outside the roster, or a model against itself, are
/// errors carrying the offending record index. Invalid records are skipped.
pub fn build_matrices(records: &[BattleRecord], roster: &[ModelRef]) -> Result<ComparisonMatrices> {
    let mut m = ComparisonMatrices::empty(roster.to_vec())?;
    let index: HashMap<&str, usize> = roster
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.as_str(), i))
        .collect();
    for (k, rec) in records.iter().enumerate() {
        if !rec.valid {
            continue;
        }
        let lookup = |model: &ModelRef| {
            index.get(model.id.as_str()).copied().ok_or_else(|| Error::UnknownModel {
                index: k,
                id: model.id.clone(),
            })
        };
        let a = lookup(&rec.model_a)?;
        let b = lookup(&rec.model_b)?;
        if a == b {
            return Err(Error::SelfBattle {
                index: k,
                id: rec.model_a.id.clone(),
            });
        }
        if rec.a_wins {
            m.add_outcome(a, b);
        } else {
            m.add_outcome(b, a);
        }
    }
    Ok(m)
}

/// Empirical win rates; `None` where the pair never met and on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    n: usize,
    entries: Vec<Option<f64>>,
}

impl PayoffMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

pub fn payoff(matrices: &ComparisonMatrices) -> PayoffMatrix {
    let n = matrices.len();
    let mut entries = vec![None; n * n];
    for i in 0..n {
        for j in 0..n {
            let c = matrices.count(i, j);
            if c > 0 {
                entries[i * n + j] = Some(matrices.wins(i, j) as f64 / c as f64);
            }
        }
    }
    PayoffMatrix { n, entries }
}
