use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BattleRecord, ModelRef, RatingVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EloConfig {
    pub k_factor: f64,
    pub lambda_scale: f64,
    /// Apply the mirrored update to the opponent (zero-sum).
    pub symmetric_update: bool,
}

impl Default for EloConfig {
    fn default() -> Self {
        Self {
            k_factor: 32.0,
            lambda_scale: 400.0,
            symmetric_update: true,
        }
    }
}

impl EloConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_factor > 0.0) || !(self.lambda_scale > 0.0) {
            return Err(Error::InvalidConfig(
                "k_factor and lambda_scale must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        std::f64::consts::LN_10 / self.lambda_scale
    }
}

/// One Elo step after `i` plays `j`; `i_won` is the observed outcome.
pub fn elo_update(u_i: f64, u_j: f64, i_won: bool, cfg: &EloConfig) -> (f64, f64) {
    elo_update_with_score(u_i, u_j, if i_won { 1.0 } else { 0.0 }, cfg)
}

/// Elo step with an arbitrary realised score `s` in [0, 1].
pub fn elo_update_with_score(u_i: f64, u_j: f64, s: f64, cfg: &EloConfig) -> (f64, f64) {
    let p = super::win_prob(u_i, u_j, cfg.alpha());
    let delta = cfg.k_factor * (s - p);
    let new_j = if cfg.symmetric_update { u_j - delta } else { u_j };
    (u_i + delta, new_j)
}

/// Streams `records` through Elo in order, starting every model at `initial`.
pub fn run_elo(
    records: &[BattleRecord],
    roster: &[ModelRef],
    initial: f64,
    cfg: &EloConfig,
) -> Result<RatingVector> {
    cfg.validate()?;
    let mut scores = vec![initial; roster.len()];
    let find = |m: &ModelRef, k: usize| {
        roster.iter().position(|r| r == m).ok_or_else(|| Error::UnknownModel {
            index: k,
            id: m.id.clone(),
        })
    };
    for (k, rec) in records.iter().enumerate().filter(|(_, r)| r.valid) {
        let a = find(&rec.model_a, k)?;
        let b = find(&rec.model_b, k)?;
        if a == b {
            return Err(Error::SelfBattle {
                index: k,
                id: rec.model_a.id.clone(),
            });
        }
        let (na, nb) = elo_update(scores[a], scores[b], rec.a_wins, cfg);
        scores[a] = na;
        scores[b] = nb;
    }
    RatingVector::from_scores(roster.to_vec(), scores, cfg.alpha())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rating::win_prob;

    #[test]
    fn even_match_win_moves_sixteen_points() {
        let cfg = EloConfig::default();
        let (a, b) = elo_update(1000.0, 1000.0, true, &cfg);
        assert!((a - 1016.0).abs() < 1e-12);
        assert!((b - 984.0).abs() < 1e-12);
        assert!((a + b - 2000.0).abs() < 1e-12);
    }

    #[test]
    fn winner_only_update() {
        let cfg = EloConfig {
            symmetric_update: false,
            ..EloConfig::default()
        };
        let (a, b) = elo_update(1000.0, 1000.0, false, &cfg);
        assert!((a - 984.0).abs() < 1e-12);
        assert_eq!(b, 1000.0);
    }

    #[test]
    fn zero_surprise_is_a_fixed_point() {
        let cfg = EloConfig::default();
        let p = win_prob(1100.0, 950.0, cfg.alpha());
        let (a, b) = elo_update_with_score(1100.0, 950.0, p, &cfg);
        assert_eq!((a, b), (1100.0, 950.0));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = EloConfig {
            k_factor: 0.0,
            ..EloConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
