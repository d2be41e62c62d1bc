use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ModelRef, RatingVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementConfig {
    /// Battles against each interval-midpoint opponent (T).
    pub battles_per_round: u32,
    /// Stop early once `|win rate - 0.5|` is within this band.
    pub winrate_band: f64,
    /// Stop once fewer than this many ranks remain in the interval.
    pub min_interval: usize,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self {
            battles_per_round: 10,
            winrate_band: 0.05,
            min_interval: 3,
        }
    }
}

impl PlacementConfig {
    pub fn validate(&self) -> Result<()> {
        if self.battles_per_round == 0 {
            return Err(Error::InvalidConfig("battles_per_round must be at least 1".into()));
        }
        if !(self.winrate_band > 0.0 && self.winrate_band < 0.5) {
            return Err(Error::InvalidConfig("winrate_band must lie in (0, 0.5)".into()));
        }
        if self.min_interval < 2 {
            return Err(Error::InvalidConfig("min_interval must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementRound {
    pub opponent: ModelRef,
    /// 1-based rank of the opponent (1 = highest rated).
    pub rank: usize,
    pub wins: u32,
    pub losses: u32,
}

/// A binary-search placement session. Ranks are 1-based with rank 1 the
/// highest-rated member of the roster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementState {
    pub new_model: ModelRef,
    pub lo: usize,
    pub hi: usize,
    pub rounds: Vec<PlacementRound>,
    pub finished: bool,
    pub final_rating: Option<f64>,
}

impl PlacementState {
    /// Session over the full roster `[1, n]`.
    pub fn new(new_model: ModelRef, theta: &RatingVector) -> Result<Self> {
        let n = theta.len();
        if n < 2 {
            return Err(Error::RosterTooSmall { needed: 2, got: n });
        }
        if theta.index_of(&new_model.id).is_some() {
            return Err(Error::DuplicateModel(new_model.id));
        }
        Ok(Self {
            new_model,
            lo: 1,
            hi: n,
            rounds: Vec::new(),
            finished: false,
            final_rating: None,
        })
    }

    pub fn midpoint(&self) -> usize {
        (self.lo + self.hi) / 2
    }

    /// Upper bound on rounds for an interval of `width` ranks.
    pub fn max_rounds(width: usize) -> usize {
        (width as f64).log2().ceil() as usize + 1
    }
}

fn ranked(theta: &RatingVector, rank: usize) -> Result<usize> {
    theta
        .ranking()
        .get(rank.wrapping_sub(1))
        .copied()
        .ok_or(Error::RosterTooSmall {
            needed: rank,
            got: theta.len(),
        })
}

pub fn next_placement_opponent(state: &PlacementState, theta: &RatingVector) -> Result<ModelRef> {
    if state.finished {
        return Err(Error::AlreadyFinished);
    }
    Ok(theta.roster()[ranked(theta, state.midpoint())?].clone())
}

/// Records one round against the midpoint opponent and narrows the interval.
///
/// On termination the rating is `u_mid + 400 log10(wr / (1 - wr))` from the
/// last round, clamped into the rating span of the final interval (open at
/// the ends of the ladder) and to within 400 Elo of `u_mid`, so a clean sweep
/// lands at a finite rating.
pub fn placement_step(
    state: &PlacementState,
    theta: &RatingVector,
    result: (u32, u32),
    cfg: &PlacementConfig,
) -> Result<PlacementState> {
    cfg.validate()?;
    if state.finished {
        return Err(Error::AlreadyFinished);
    }
    let (wins, losses) = result;
    if wins + losses != cfg.battles_per_round {
        return Err(Error::BadRoundTotal {
            expected: cfg.battles_per_round,
            got: wins + losses,
        });
    }
    let mid = state.midpoint();
    let opp = ranked(theta, mid)?;
    let mut next = state.clone();
    next.rounds.push(PlacementRound {
        opponent: theta.roster()[opp].clone(),
        rank: mid,
        wins,
        losses,
    });

    let wr = wins as f64 / cfg.battles_per_round as f64;
    let u_mid = theta.score(opp);
    if (wr - 0.5).abs() <= cfg.winrate_band {
        next.finished = true;
        next.final_rating = Some(u_mid);
        return Ok(next);
    }
    if wr > 0.5 {
        next.hi = mid;
    } else {
        next.lo = mid;
    }
    let stuck = next.hi - next.lo == state.hi - state.lo;
    if next.hi - next.lo + 1 < cfg.min_interval || stuck {
        let top = theta.score(ranked(theta, next.lo)?);
        let bottom = theta.score(ranked(theta, next.hi)?);
        // open-ended at the ladder ends
        let upper = if next.lo == 1 && wr > 0.5 { f64::INFINITY } else { top };
        let lower = if next.hi == theta.len() && wr < 0.5 { f64::NEG_INFINITY } else { bottom };
        let lambda = std::f64::consts::LN_10 / theta.alpha();
        let raw = u_mid + lambda * (wr / (1.0 - wr)).log10();
        next.finished = true;
        next.final_rating = Some(raw.clamp(lower.max(u_mid - lambda), upper.min(u_mid + lambda)));
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{numbered_roster, ELO_ALPHA};

    fn ladder(n: usize) -> RatingVector {
        let scores = (0..n).map(|i| 1400.0 - 50.0 * i as f64).collect();
        RatingVector::from_scores(numbered_roster(n), scores, ELO_ALPHA).unwrap()
    }

    #[test]
    fn midpoint_opponents() {
        let t = ladder(20);
        let mut s = PlacementState::new(ModelRef::new("new"), &t).unwrap();
        assert_eq!(next_placement_opponent(&s, &t).unwrap().id, "m09");
        s.lo = 5;
        s.hi = 6;
        assert_eq!(next_placement_opponent(&s, &t).unwrap().id, "m04");
        s.lo = 7;
        s.hi = 9;
        assert_eq!(next_placement_opponent(&s, &t).unwrap().id, "m07");
    }

    #[test]
    fn even_first_round_finishes_at_midpoint() {
        let t = ladder(20);
        let s = PlacementState::new(ModelRef::new("new"), &t).unwrap();
        let done = placement_step(&s, &t, (5, 5), &PlacementConfig::default()).unwrap();
        assert!(done.finished);
        assert_eq!(done.final_rating, Some(t.score(9)));
        assert!(matches!(
            placement_step(&done, &t, (5, 5), &PlacementConfig::default()),
            Err(Error::AlreadyFinished)
        ));
        assert!(matches!(next_placement_opponent(&done, &t), Err(Error::AlreadyFinished)));
    }

    #[test]
    fn sweeping_model_climbs_to_the_top() {
        let t = ladder(20);
        let cfg = PlacementConfig::default();
        let mut s = PlacementState::new(ModelRef::new("new"), &t).unwrap();
        while !s.finished {
            let width = s.hi - s.lo;
            s = placement_step(&s, &t, (10, 0), &cfg).unwrap();
            assert!(s.finished || s.hi - s.lo < width);
        }
        assert!(s.rounds.len() <= 5);
        assert_eq!(s.lo, 1);
        assert!(s.final_rating.unwrap() > t.score(0));
    }

    #[test]
    fn bad_round_total() {
        let t = ladder(5);
        let s = PlacementState::new(ModelRef::new("new"), &t).unwrap();
        let err = placement_step(&s, &t, (3, 3), &PlacementConfig::default()).unwrap_err();
        assert!(matches!(err, Error::BadRoundTotal { expected: 10, got: 6 }));
    }

    #[test]
    fn existing_model_cannot_be_placed() {
        let t = ladder(5);
        assert!(PlacementState::new(ModelRef::new("m01"), &t).is_err());
    }
}
