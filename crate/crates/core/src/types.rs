use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Natural scale constant tying logistic units to the Elo scale: ln(10)/400.
pub const ELO_ALPHA: f64 = std::f64::consts::LN_10 / 400.0;

/// Default mean rating of a fitted leaderboard.
pub const DEFAULT_GAUGE_ANCHOR: f64 = 1000.0;

/// A model on the leaderboard. Equality and hashing use `id` only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelRef {
    pub id: String,
    pub display_name: String,
}

impl ModelRef {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        Self {
            display_name: id.clone(),
            id,
        }
    }

    pub fn with_name(id: impl Into<String>, display_name: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            display_name: display_name.into(),
        }
    }
}

impl PartialEq for ModelRef {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for ModelRef {}

impl Hash for ModelRef {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

impl fmt::Display for ModelRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

/// Builds a roster of models named `m00`, `m01`, ...
pub fn numbered_roster(n: usize) -> Vec<ModelRef> {
    let width = n.saturating_sub(1).to_string().len().max(2);
    (0..n)
        .map(|i| ModelRef::new(format!("m{i:0width$}")))
        .collect()
}

pub(crate) fn check_unique(roster: &[ModelRef]) -> Result<()> {
    let mut seen = HashSet::with_capacity(roster.len());
    for m in roster {
        if !seen.insert(m.id.as_str()) {
            return Err(Error::DuplicateModel(m.id.clone()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Live,
    Simulated,
    Replay,
}

/// One pairwise outcome. Ties are not representable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BattleRecord {
    pub model_a: ModelRef,
    pub model_b: ModelRef,
    /// `true` when `model_a` won.
    pub a_wins: bool,
    pub timestamp: i64,
    pub source: Source,
    pub valid: bool,
}

impl BattleRecord {
    pub fn new(model_a: ModelRef, model_b: ModelRef, a_wins: bool) -> Self {
        Self {
            model_a,
            model_b,
            a_wins,
            timestamp: 0,
            source: Source::Live,
            valid: true,
        }
    }

    pub fn with_timestamp(mut self, timestamp: i64) -> Self {
        self.timestamp = timestamp;
        self
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }

    /// Outcome as the binary `y` of the likelihood: 1 when `model_a` won.
    pub fn outcome(&self) -> u8 {
        u8::from(self.a_wins)
    }

    pub fn winner(&self) -> &ModelRef {
        if self.a_wins {
            &self.model_a
        } else {
            &self.model_b
        }
    }

    pub fn loser(&self) -> &ModelRef {
        if self.a_wins {
            &self.model_b
        } else {
            &self.model_a
        }
    }
}

/// Ratings on the Elo scale, one per roster member, with the mean pinned to
/// `gauge_anchor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingVector {
    roster: Vec<ModelRef>,
    scores: Vec<f64>,
    alpha: f64,
    gauge_anchor: f64,
}

impl RatingVector {
    /// Takes scores as given; the gauge anchor is their mean.
    pub fn from_scores(roster: Vec<ModelRef>, scores: Vec<f64>, alpha: f64) -> Result<Self> {
        Self::validate(&roster, &scores, alpha)?;
        let gauge_anchor = mean(&scores).unwrap_or(DEFAULT_GAUGE_ANCHOR);
        Ok(Self {
            roster,
            scores,
            alpha,
            gauge_anchor,
        })
    }

    /// Shifts scores so their mean equals `anchor`.
    pub fn anchored(
        roster: Vec<ModelRef>,
        mut scores: Vec<f64>,
        alpha: f64,
        anchor: f64,
    ) -> Result<Self> {
        Self::validate(&roster, &scores, alpha)?;
        if let Some(m) = mean(&scores) {
            let shift = anchor - m;
            scores.iter_mut().for_each(|s| *s += shift);
        }
        Ok(Self {
            roster,
            scores,
            alpha,
            gauge_anchor: anchor,
        })
    }

    /// Re-checks the invariants, e.g. after deserialization.
    pub fn check(&self) -> Result<()> {
        Self::validate(&self.roster, &self.scores, self.alpha)
    }

    fn validate(roster: &[ModelRef], scores: &[f64], alpha: f64) -> Result<()> {
        if roster.len() != scores.len() {
            return Err(Error::RosterMismatch);
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {alpha}")));
        }
        if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite rating {s}")));
        }
        check_unique(roster)
    }

    pub fn roster(&self) -> &[ModelRef] {
        &self.roster
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gauge_anchor(&self) -> f64 {
        self.gauge_anchor
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn score(&self, i: usize) -> f64 {
        self.scores[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.roster.iter().position(|m| m.id == id)
    }

    /// Roster indices ordered by descending score; ties keep roster order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]));
        order
    }

    pub fn same_roster(&self, roster: &[ModelRef]) -> bool {
        self.roster.len() == roster.len() && self.roster.iter().zip(roster).all(|(a, b)| a == b)
    }
}

pub(crate) fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_ref_compares_by_id() {
        let a = ModelRef::with_name("gpt", "GPT one");
        let b = ModelRef::with_name("gpt", "another name");
        assert_eq!(a, b);
        assert_ne!(a, ModelRef::new("other"));
    }

    #[test]
    fn anchored_pins_mean() {
        let rv = RatingVector::anchored(numbered_roster(3), vec![1.0, 2.0, 6.0], ELO_ALPHA, 1000.0)
            .unwrap();
        let m = mean(rv.scores()).unwrap();
        assert!((m - 1000.0).abs() < 1e-9);
        assert!((rv.score(2) - rv.score(0) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_duplicates_and_length_mismatch() {
        let roster = vec![ModelRef::new("a"), ModelRef::new("a")];
        assert!(matches!(
            RatingVector::from_scores(roster, vec![0.0, 1.0], ELO_ALPHA),
            Err(Error::DuplicateModel(_))
        ));
        assert!(matches!(
            RatingVector::from_scores(numbered_roster(2), vec![0.0], ELO_ALPHA),
            Err(Error::RosterMismatch)
        ));
    }

    #[test]
    fn ranking_is_descending() {
        let rv = RatingVector::from_scores(numbered_roster(4), vec![3.0, 9.0, 1.0, 5.0], ELO_ALPHA)
            .unwrap();
        assert_eq!(rv.ranking(), vec![1, 3, 0, 2]);
    }
}
