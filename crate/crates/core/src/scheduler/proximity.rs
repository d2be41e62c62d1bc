use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrices::ComparisonMatrices;
use crate::types::{ModelRef, RatingVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProximityConfig {
    /// Trust-region threshold in Elo units.
    pub h: f64,
    /// Softmax temperature, in battle counts.
    pub tau: f64,
    pub sample_size_k: usize,
    pub min_proximity_n_m: usize,
}

impl Default for ProximityConfig {
    fn default() -> Self {
        Self {
            h: 150.0,
            tau: 1.0,
            sample_size_k: 2,
            min_proximity_n_m: 3,
        }
    }
}

impl ProximityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !(self.tau > 0.0) {
            return Err(Error::InvalidConfig("h and tau must be positive".into()));
        }
        if self.sample_size_k < 2 || self.min_proximity_n_m < 2 {
            return Err(Error::InvalidConfig(
                "sample_size_k and min_proximity_n_m must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

/// Proximity set of every model, each including the model itself.
///
/// Models within `h` when there are at least `n_m` of them, otherwise the
/// `n_m - 1` nearest neighbours. Distance ties are broken by descending score
/// order, then roster order.
pub fn proximity_sets(theta: &RatingVector, cfg: &ProximityConfig) -> Result<Vec<Vec<usize>>> {
    cfg.validate()?;
    let n = theta.len();
    if n < 2 {
        return Err(Error::RosterTooSmall { needed: 2, got: n });
    }
    let u = theta.scores();
    let order = theta.ranking();
    let mut sets = Vec::with_capacity(n);
    for i in 0..n {
        let near: Vec<usize> = order.iter().copied().filter(|&j| (u[j] - u[i]).abs() < cfg.h).collect();
        if near.len() >= cfg.min_proximity_n_m {
            sets.push(near);
            continue;
        }
        let mut others: Vec<usize> = order.iter().copied().filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| (u[a] - u[i]).abs().total_cmp(&(u[b] - u[i]).abs()));
        others.truncate(cfg.min_proximity_n_m - 1);
        others.push(i);
        sets.push(others);
    }
    Ok(sets)
}

fn weights_from_sets(sets: &[Vec<usize>], m: &ComparisonMatrices, s_max: u64) -> Vec<f64> {
    if s_max == 0 {
        return vec![1.0; sets.len()];
    }
    sets.iter()
        .enumerate()
        .map(|(i, set)| {
            let n_min = set.iter().filter(|&&j| j != i).map(|&j| m.count(i, j)).min().unwrap_or(0);
            1.0 - n_min as f64 / s_max as f64
        })
        .collect()
}

fn check_roster(theta: &RatingVector, m: &ComparisonMatrices) -> Result<()> {
    if theta.same_roster(m.roster()) {
        Ok(())
    } else {
        Err(Error::RosterMismatch)
    }
}

/// First-draw weights `1 - PCC_i / max(N)` in roster order.
pub fn initial_weights(theta: &RatingVector, m: &ComparisonMatrices, cfg: &ProximityConfig) -> Result<Vec<f64>> {
    check_roster(theta, m)?;
    let sets = proximity_sets(theta, cfg)?;
    Ok(weights_from_sets(&sets, m, m.max_count()))
}

/// Proximity sets computed once for a fixed rating vector. Repeated draws
/// against a growing count matrix reuse them.
#[derive(Debug, Clone)]
pub struct ProximitySampler {
    theta: RatingVector,
    cfg: ProximityConfig,
    sets: Vec<Vec<usize>>,
}

impl ProximitySampler {
    pub fn new(theta: RatingVector, cfg: ProximityConfig) -> Result<Self> {
        let sets = proximity_sets(&theta, &cfg)?;
        Ok(Self { theta, cfg, sets })
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// One battle set as roster indices. `s_max` must equal `m.max_count()`;
    /// callers that track it incrementally avoid the full scan.
    pub fn sample_with_max<R: Rng + ?Sized>(&self, m: &ComparisonMatrices, s_max: u64, rng: &mut R) -> Vec<usize> {
        let n = self.sets.len();
        let u = self.theta.scores();
        let weights = weights_from_sets(&self.sets, m, s_max);
        let first = match WeightedIndex::new(&weights) {
            Ok(dist) => dist.sample(rng),
            Err(_) => rng.random_range(0..n),
        };

        let mut selected = vec![first];
        let mut candidates: Vec<usize> = self.sets[first].iter().copied().filter(|&j| j != first).collect();
        let mut logits = Vec::new();
        while selected.len() < self.cfg.sample_size_k && !candidates.is_empty() {
            logits.clear();
            logits.extend(candidates.iter().map(|&j| {
                let ecc = selected.iter().map(|&s| m.count(j, s)).min().unwrap_or(0);
                -(ecc as f64) / self.cfg.tau
            }));
            let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let probs: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
            let pick = WeightedIndex::new(&probs).map(|d| d.sample(rng)).unwrap_or(0);
            let chosen = candidates.remove(pick);
            selected.push(chosen);
            candidates.retain(|&c| selected.iter().all(|&s| (u[c] - u[s]).abs() < self.cfg.h));
        }
        selected
    }

    pub fn sample<R: Rng + ?Sized>(&self, m: &ComparisonMatrices, rng: &mut R) -> Result<Vec<usize>> {
        check_roster(&self.theta, m)?;
        Ok(self.sample_with_max(m, m.max_count(), rng))
    }
}

/// One battle set as roster indices; the first element is the weighted draw.
pub fn proximity_sample_indices<R: Rng + ?Sized>(
    theta: &RatingVector,
    m: &ComparisonMatrices,
    cfg: &ProximityConfig,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_roster(theta, m)?;
    ProximitySampler::new(theta.clone(), *cfg)?.sample(m, rng)
}

pub fn proximity_sample<R: Rng + ?Sized>(
    theta: &RatingVector,
    m: &ComparisonMatrices,
    cfg: &ProximityConfig,
    rng: &mut R,
) -> Result<Vec<ModelRef>> {
    let idx = proximity_sample_indices(theta, m, cfg, rng)?;
    Ok(idx.into_iter().map(|i| theta.roster()[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::types::{numbered_roster, ELO_ALPHA};
    use proptest::prelude::*;
    use rand::Rng;

    fn theta(scores: &[f64]) -> RatingVector {
        RatingVector::from_scores(numbered_roster(scores.len()), scores.to_vec(), ELO_ALPHA).unwrap()
    }

    fn counts(n: usize, pairs: &[(usize, usize, u64)]) -> ComparisonMatrices {
        let mut w = vec![0; n * n];
        for &(i, j, c) in pairs {
            w[i * n + j] = c;
        }
        ComparisonMatrices::from_wins(numbered_roster(n), w).unwrap()
    }

    #[test]
    fn cold_system_is_uniform() {
        let t = theta(&[1000.0, 900.0, 800.0]);
        let m = ComparisonMatrices::empty(numbered_roster(3)).unwrap();
        assert_eq!(initial_weights(&t, &m, &ProximityConfig::default()).unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn hand_traced_weights() {
        // scores 1300, 1200, 1100, 700; h = 150, n_m = 3
        // d0 = {0,1} -> fallback {1,2,0}; d1 = {0,1,2}; d2 = {1,2} -> fallback {1,0,2}
        // d3 = {3} -> fallback {2,1,3}
        // N01 = 8, N02 = 2, N12 = 4, N23 = 1, N13 = 0, S_max = 8
        let t = theta(&[1300.0, 1200.0, 1100.0, 700.0]);
        let m = counts(4, &[(0, 1, 5), (1, 0, 3), (0, 2, 2), (1, 2, 4), (3, 2, 1)]);
        let cfg = ProximityConfig::default();
        let sets = proximity_sets(&t, &cfg).unwrap();
        assert_eq!(sets[3].len(), 3);
        let w = initial_weights(&t, &m, &cfg).unwrap();
        let expect = [1.0 - 2.0 / 8.0, 1.0 - 4.0 / 8.0, 1.0 - 2.0 / 8.0, 1.0 - 0.0 / 8.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15, "{w:?}");
        }
    }

    #[test]
    fn saturated_neighbourhood_gets_zero() {
        let t = theta(&[1000.0, 1010.0, 1020.0]);
        let m = counts(3, &[(0, 1, 4), (0, 2, 4), (1, 2, 4)]);
        let w = initial_weights(&t, &m, &ProximityConfig::default()).unwrap();
        assert_eq!(w, vec![0.0; 3]);
        let draw = proximity_sample_indices(&t, &m, &ProximityConfig::default(), &mut seeded(1)).unwrap();
        assert_eq!(draw.len(), 2);
    }

    #[test]
    fn two_models_always_meet() {
        let t = theta(&[1000.0, 1600.0]);
        let m = ComparisonMatrices::empty(numbered_roster(2)).unwrap();
        let cfg = ProximityConfig {
            sample_size_k: 4,
            ..ProximityConfig::default()
        };
        for s in 0..20 {
            let mut d = proximity_sample_indices(&t, &m, &cfg, &mut seeded(s)).unwrap();
            d.sort();
            assert_eq!(d, vec![0, 1]);
        }
    }

    #[test]
    fn rejects_tiny_roster_and_bad_config() {
        let t = theta(&[1000.0]);
        let m = ComparisonMatrices::empty(numbered_roster(1)).unwrap();
        assert!(matches!(
            initial_weights(&t, &m, &ProximityConfig::default()),
            Err(Error::RosterTooSmall { .. })
        ));
        let bad = ProximityConfig {
            sample_size_k: 1,
            ..ProximityConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sample_shape(seed in any::<u64>(), k in 2usize..6) {
            let mut rng = seeded(seed);
            let scores: Vec<f64> = (0..12).map(|_| rng.random_range(400.0..1400.0)).collect();
            let t = theta(&scores);
            let mut w = vec![0; 144];
            for i in 0..12 {
                for j in 0..12 {
                    if i != j { w[i * 12 + j] = rng.random_range(0..5); }
                }
            }
            let m = ComparisonMatrices::from_wins(numbered_roster(12), w).unwrap();
            let cfg = ProximityConfig { sample_size_k: k, h: 200.0, ..ProximityConfig::default() };
            let a = proximity_sample_indices(&t, &m, &cfg, &mut seeded(seed ^ 7)).unwrap();
            let b = proximity_sample_indices(&t, &m, &cfg, &mut seeded(seed ^ 7)).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(a.len() >= 2 && a.len() <= k);
            let mut d = a.clone();
            d.sort();
            d.dedup();
            prop_assert_eq!(d.len(), a.len());
        }

        #[test]
        fn more_comparisons_never_raise_weight(seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let n = 6;
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(900.0..1100.0)).collect();
            let t = theta(&scores);
            let mut w = vec![0u64; n * n];
            for i in 0..n {
                for j in 0..n {
                    if i != j { w[i * n + j] = rng.random_range(1..6); }
                }
            }
            // pin S_max with a far-above pair
            w[1] = 50;
            let cfg = ProximityConfig::default();
            let base = ComparisonMatrices::from_wins(numbered_roster(n), w.clone()).unwrap();
            let i = rng.random_range(2..n);
            for j in 0..n {
                if j != i { w[i * n + j] += 1; }
            }
            let bumped = ComparisonMatrices::from_wins(numbered_roster(n), w).unwrap();
            prop_assume!(bumped.max_count() == base.max_count());
            let before = initial_weights(&t, &base, &cfg).unwrap()[i];
            let after = initial_weights(&t, &bumped, &cfg).unwrap()[i];
            prop_assert!(after <= before);
        }
    }
}
