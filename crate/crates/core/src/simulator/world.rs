use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::information::proximity_pairs;
use crate::matrices::ComparisonMatrices;
use crate::rating::win_prob;
use crate::rng::seeded;
use crate::types::{numbered_roster, BattleRecord, RatingVector, Source, ELO_ALPHA};

/// Models with known ("golden") ratings from which outcomes are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticWorld {
    pub golden: RatingVector,
    pub seed: u64,
    /// Share of proximity-strategy battles drawn from all pairs instead.
    pub noise_fraction: f64,
}

impl SyntheticWorld {
    pub fn new(golden: RatingVector, seed: u64, noise_fraction: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&noise_fraction) {
            return Err(Error::InvalidConfig("noise_fraction must lie in [0, 1)".into()));
        }
        if golden.len() < 2 {
            return Err(Error::RosterTooSmall {
                needed: 2,
                got: golden.len(),
            });
        }
        Ok(Self {
            golden,
            seed,
            noise_fraction,
        })
    }

    /// `n` models with golden ratings drawn uniformly from `[lo, hi)`.
    pub fn uniform(n: usize, lo: f64, hi: f64, seed: u64, noise_fraction: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidConfig("empty rating range".into()));
        }
        let mut rng = seeded(seed);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
        let golden = RatingVector::from_scores(numbered_roster(n), scores, ELO_ALPHA)?;
        Self::new(golden, seed, noise_fraction)
    }

    pub fn len(&self) -> usize {
        self.golden.len()
    }

    pub fn is_empty(&self) -> bool {
        self.golden.is_empty()
    }

    pub fn win_prob(&self, i: usize, j: usize) -> f64 {
        win_prob(self.golden.score(i), self.golden.score(j), self.golden.alpha())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Proximity { h: f64 },
    Uniform,
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Proximity { .. } => "proximity",
            Strategy::Uniform => "uniform",
        }
    }
}

/// Bernoulli draw of `i` against `j` at the golden ratings.
pub fn sample_outcome<R: Rng + ?Sized>(world: &SyntheticWorld, i: usize, j: usize, rng: &mut R) -> BattleRecord {
    assert_ne!(i, j, "self battle");
    let a_wins = rng.random_bool(world.win_prob(i, j));
    let roster = world.golden.roster();
    BattleRecord::new(roster[i].clone(), roster[j].clone(), a_wins).with_source(Source::Simulated)
}

pub(crate) fn uniform_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// One drawn battle: `(a, b, a_wins, off_threshold)`.
type Draw = (usize, usize, bool, bool);

fn draw_battles<R: Rng + ?Sized>(
    world: &SyntheticWorld,
    strategy: Strategy,
    budget: usize,
    rng: &mut R,
) -> Result<Vec<Draw>> {
    if budget == 0 {
        return Err(Error::InvalidConfig("budget must be at least 1".into()));
    }
    let n = world.len();
    let mut out = Vec::with_capacity(budget);
    match strategy {
        Strategy::Uniform => {
            for _ in 0..budget {
                let (i, j) = uniform_pair(n, rng);
                out.push((i, j, rng.random_bool(world.win_prob(i, j)), false));
            }
        }
        Strategy::Proximity { h } => {
            let pairs = proximity_pairs(&world.golden, h);
            if pairs.is_empty() {
                return Err(Error::EmptyProximitySet { h });
            }
            let noise = (world.noise_fraction * budget as f64).round() as usize;
            for k in 0..budget {
                let off = k < noise;
                let (i, j) = if off {
                    uniform_pair(n, rng)
                } else {
                    let (i, j) = pairs[rng.random_range(0..pairs.len())];
                    if rng.random_bool(0.5) {
                        (i, j)
                    } else {
                        (j, i)
                    }
                };
                out.push((i, j, rng.random_bool(world.win_prob(i, j)), off));
            }
            out.shuffle(rng);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedBattles {
    pub records: Vec<BattleRecord>,
    /// True for battles drawn outside the proximity constraint.
    pub off_threshold: Vec<bool>,
}

/// Exactly `budget` simulated battles under `strategy`.
pub fn generate_battles<R: Rng + ?Sized>(
    world: &SyntheticWorld,
    strategy: Strategy,
    budget: usize,
    rng: &mut R,
) -> Result<GeneratedBattles> {
    let draws = draw_battles(world, strategy, budget, rng)?;
    let roster = world.golden.roster();
    let mut records = Vec::with_capacity(draws.len());
    let mut off_threshold = Vec::with_capacity(draws.len());
    for (k, (i, j, a_wins, off)) in draws.into_iter().enumerate() {
        records.push(
            BattleRecord::new(roster[i].clone(), roster[j].clone(), a_wins)
                .with_timestamp(k as i64)
                .with_source(Source::Simulated),
        );
        off_threshold.push(off);
    }
    Ok(GeneratedBattles { records, off_threshold })
}

/// Same draws as [`generate_battles`] aggregated straight into matrices.
pub fn generate_matrices<R: Rng + ?Sized>(
    world: &SyntheticWorld,
    strategy: Strategy,
    budget: usize,
    rng: &mut R,
) -> Result<ComparisonMatrices> {
    let mut m = ComparisonMatrices::empty(world.golden.roster().to_vec())?;
    for (i, j, a_wins, _) in draw_battles(world, strategy, budget, rng)? {
        if a_wins {
            m.add_outcome(i, j);
        } else {
            m.add_outcome(j, i);
        }
    }
    Ok(m)
}
