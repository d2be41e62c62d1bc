use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::world::{uniform_pair, SyntheticWorld};
use crate::analysis::{score_metrics, RankMetrics};
use crate::error::{Error, Result};
use crate::matrices::{build_matrices, ComparisonMatrices};
use crate::rating::{fit_bt_mle, win_prob, SolverConfig};
use crate::rng::{derive_seed, seeded};
use crate::scheduler::{placement_step, PlacementConfig, PlacementState};
use crate::types::{BattleRecord, ModelRef, RatingVector, Source};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReplayStrategy {
    /// Consume every record.
    All,
    /// Consume records whose models are within `h` at the current ratings.
    Proximity { h: f64 },
    /// Consume each record independently with probability `keep_fraction`.
    Uniform { keep_fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "every", rename_all = "snake_case")]
pub enum RefitCadence {
    /// After this many streamed records.
    Records(usize),
    /// After this much timestamp time has elapsed.
    Elapsed(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplayConfig {
    pub cold_start_fraction: f64,
    pub refit: RefitCadence,
    pub strategy: ReplayStrategy,
    pub placement: PlacementConfig,
    pub solver: SolverConfig,
    pub seed: u64,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self {
            cold_start_fraction: 0.2,
            refit: RefitCadence::Records(5000),
            strategy: ReplayStrategy::All,
            placement: PlacementConfig::default(),
            solver: SolverConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelinePoint {
    /// Stream records seen so far, cold start included.
    pub records_seen: usize,
    /// Records used for fitting so far, placement battles included.
    pub consumed: usize,
    pub placement_battles: usize,
    pub active_models: usize,
    pub vs_reference: RankMetrics,
    pub vs_golden: Option<RankMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub reference: RatingVector,
    /// Ratings of the active models after the last refit.
    pub final_ratings: RatingVector,
    pub timeline: Vec<TimelinePoint>,
    pub placements: Vec<PlacementState>,
    /// Refits that needed a pseudo-count to converge.
    pub regularized_refits: usize,
}

impl ReplayOutcome {
    pub fn last(&self) -> &TimelinePoint {
        self.timeline.last().expect("timeline has the cold-start point")
    }
}

/// Roster in order of first appearance.
pub fn roster_of(records: &[BattleRecord]) -> Vec<ModelRef> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for r in records.iter().filter(|r| r.valid) {
        for m in [&r.model_a, &r.model_b] {
            if !seen.contains_key(&m.id) {
                seen.insert(m.id.clone(), out.len());
                out.push(m.clone());
            }
        }
    }
    out
}

struct Replay<'a> {
    cfg: &'a ReplayConfig,
    roster: Vec<ModelRef>,
    reference: RatingVector,
    golden: Option<&'a RatingVector>,
    counts: ComparisonMatrices,
    rating: Vec<Option<f64>>,
    active: Vec<usize>,
    consumed: usize,
    placement_battles: usize,
    regularized: usize,
}

impl Replay<'_> {
    fn refit(&mut self) -> Result<()> {
        let sub = self.counts.restrict(&self.active);
        let fit = fit_bt_mle(&sub, &self.cfg.solver).or_else(|e| {
            if !e.is_numerical() {
                return Err(e);
            }
            self.regularized += 1;
            let cfg = SolverConfig {
                regularization: 0.5,
                ..self.cfg.solver
            };
            fit_bt_mle(&sub, &cfg)
        })?;
        for (k, &i) in self.active.iter().enumerate() {
            self.rating[i] = Some(fit.score(k));
        }
        Ok(())
    }

    fn point(&self, records_seen: usize) -> TimelinePoint {
        let est: Vec<f64> = self.active.iter().map(|&i| self.rating[i].unwrap_or(f64::NAN)).collect();
        let reference: Vec<f64> = self.active.iter().map(|&i| self.reference.score(i)).collect();
        let vs_golden = self.golden.map(|g| {
            let gold: Vec<f64> = self
                .active
                .iter()
                .map(|&i| g.index_of(&self.roster[i].id).map_or(f64::NAN, |k| g.score(k)))
                .collect();
            score_metrics(&est, &gold)
        });
        TimelinePoint {
            records_seen,
            consumed: self.consumed,
            placement_battles: self.placement_battles,
            active_models: self.active.len(),
            vs_reference: score_metrics(&est, &reference),
            vs_golden,
        }
    }

    fn current_theta(&self) -> Result<RatingVector> {
        let roster = self.active.iter().map(|&i| self.roster[i].clone()).collect();
        let scores = self.active.iter().map(|&i| self.rating[i].unwrap_or(f64::NAN)).collect();
        RatingVector::from_scores(roster, scores, self.reference.alpha())
    }

    /// Binary-search placement of `new` against the active models. Outcomes
    /// are drawn from the reference ratings and kept as simulated battles.
    fn place<R: Rng>(&mut self, new: usize, rng: &mut R) -> Result<PlacementState> {
        let theta = self.current_theta()?;
        let mut state = PlacementState::new(self.roster[new].clone(), &theta)?;
        let t = self.cfg.placement.battles_per_round;
        while !state.finished {
            let opp_local = theta.ranking()[state.midpoint() - 1];
            let opp = self.active[opp_local];
            let p = win_prob(self.reference.score(new), self.reference.score(opp), self.reference.alpha());
            let mut wins = 0;
            for _ in 0..t {
                if rng.random_bool(p) {
                    wins += 1;
                    self.counts.add_outcome(new, opp);
                } else {
                    self.counts.add_outcome(opp, new);
                }
            }
            self.consumed += t as usize;
            self.placement_battles += t as usize;
            state = placement_step(&state, &theta, (wins, t - wins), &self.cfg.placement)?;
        }
        self.rating[new] = state.final_rating;
        self.active.push(new);
        Ok(state)
    }
}

/// Chronological replay of a battle log.
///
/// Reference ratings come from a fit on the whole log. The first
/// `cold_start_fraction` of records seeds the ladder; afterwards each model's
/// first appearance triggers a placement session, records are consumed
/// according to `cfg.strategy` and ratings are refit on the configured
/// cadence. Every refit (the cold-start fit included) adds a timeline point
/// comparing the current ratings with the reference, and with `golden` when
/// given.
pub fn replay_experiment(
    records: &[BattleRecord],
    golden: Option<&RatingVector>,
    cfg: &ReplayConfig,
) -> Result<ReplayOutcome> {
    if !(cfg.cold_start_fraction > 0.0 && cfg.cold_start_fraction <= 1.0) {
        return Err(Error::InvalidConfig("cold_start_fraction must lie in (0, 1]".into()));
    }
    match cfg.refit {
        RefitCadence::Records(0) | RefitCadence::Elapsed(..=0) => {
            return Err(Error::InvalidConfig("refit interval must be positive".into()))
        }
        _ => {}
    }
    if let ReplayStrategy::Uniform { keep_fraction } = cfg.strategy {
        if !(0.0..=1.0).contains(&keep_fraction) {
            return Err(Error::InvalidConfig("keep_fraction must lie in [0, 1]".into()));
        }
    }
    let valid: Vec<&BattleRecord> = records.iter().filter(|r| r.valid).collect();
    if valid.is_empty() {
        return Err(Error::DatasetUnavailable("no valid records".into()));
    }
    if valid.windows(2).any(|w| w[1].timestamp < w[0].timestamp) {
        return Err(Error::InvalidConfig("records must be in chronological order".into()));
    }

    let roster = roster_of(records);
    let full = build_matrices(records, &roster)?;
    let reference = fit_bt_mle(&full, &cfg.solver)?;
    let index: HashMap<&str, usize> = roster.iter().enumerate().map(|(k, m)| (m.id.as_str(), k)).collect();

    let cold = ((valid.len() as f64 * cfg.cold_start_fraction).round() as usize).clamp(1, valid.len());
    let mut replay = Replay {
        cfg,
        roster: roster.clone(),
        reference: reference.clone(),
        golden,
        counts: ComparisonMatrices::empty(roster.clone())?,
        rating: vec![None; roster.len()],
        active: Vec::new(),
        consumed: 0,
        placement_battles: 0,
        regularized: 0,
    };
    let mut is_active = vec![false; roster.len()];
    for r in &valid[..cold] {
        let (a, b) = (index[r.model_a.id.as_str()], index[r.model_b.id.as_str()]);
        for m in [a, b] {
            if !is_active[m] {
                is_active[m] = true;
                replay.active.push(m);
            }
        }
        let (w, l) = if r.a_wins { (a, b) } else { (b, a) };
        replay.counts.add_outcome(w, l);
        replay.consumed += 1;
    }
    if replay.active.len() < 2 {
        return Err(Error::RosterTooSmall {
            needed: 2,
            got: replay.active.len(),
        });
    }
    replay.refit()?;
    let mut timeline = vec![replay.point(cold)];
    let mut placements = Vec::new();

    let mut rng = seeded(derive_seed(cfg.seed, &[0x5eed]));
    let mut since_refit = 0usize;
    let mut last_refit_time = valid[cold - 1].timestamp;
    for (offset, r) in valid[cold..].iter().enumerate() {
        let (a, b) = (index[r.model_a.id.as_str()], index[r.model_b.id.as_str()]);
        for m in [a, b] {
            if !is_active[m] {
                is_active[m] = true;
                placements.push(replay.place(m, &mut rng)?);
            }
        }
        let keep = match cfg.strategy {
            ReplayStrategy::All => true,
            ReplayStrategy::Proximity { h } => {
                let (ra, rb) = (replay.rating[a].unwrap_or(0.0), replay.rating[b].unwrap_or(0.0));
                (ra - rb).abs() < h
            }
            ReplayStrategy::Uniform { keep_fraction } => rng.random_bool(keep_fraction),
        };
        if keep {
            let (w, l) = if r.a_wins { (a, b) } else { (b, a) };
            replay.counts.add_outcome(w, l);
            replay.consumed += 1;
        }
        since_refit += 1;
        let due = match cfg.refit {
            RefitCadence::Records(k) => since_refit >= k,
            RefitCadence::Elapsed(dt) => r.timestamp - last_refit_time >= dt,
        };
        let at_end = offset + 1 == valid.len() - cold;
        if due || at_end {
            replay.refit()?;
            timeline.push(replay.point(cold + offset + 1));
            since_refit = 0;
            last_refit_time = r.timestamp;
        }
    }

    let final_ratings = replay.current_theta()?;
    Ok(ReplayOutcome {
        reference,
        final_ratings,
        timeline,
        placements,
        regularized_refits: replay.regularized,
    })
}

/// Chronological synthetic log of `total` battles. The first `initial`
/// models play from the start; the rest join one by one, evenly spread over
/// the first half of the stream. Every battle is a uniformly chosen pair of
/// present models.
pub fn synthetic_stream(world: &SyntheticWorld, total: usize, initial: usize, seed: u64) -> Result<Vec<BattleRecord>> {
    let n = world.len();
    if initial < 2 || initial > n {
        return Err(Error::InvalidConfig(format!("initial must lie in [2, {n}]")));
    }
    let mut rng = seeded(seed);
    let mut order: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let late = n - initial;
    let joins: Vec<usize> = (1..=late).map(|k| k * total / (2 * (late + 1))).collect();
    let roster = world.golden.roster();
    let mut present = initial;
    let mut out = Vec::with_capacity(total);
    for t in 0..total {
        while present < n && joins[present - initial] <= t {
            present += 1;
        }
        let (x, y) = uniform_pair(present, &mut rng);
        let (i, j) = (order[x], order[y]);
        let a_wins = rng.random_bool(world.win_prob(i, j));
        out.push(
            BattleRecord::new(roster[i].clone(), roster[j].clone(), a_wins)
                .with_timestamp(t as i64)
                .with_source(Source::Replay),
        );
    }
    Ok(out)
}
