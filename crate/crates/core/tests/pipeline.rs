use std::fs::File;
use std::io::BufWriter;

use arena_core::io::{ingest, load_state, save_state, write_battle_log, StateSnapshot};
use arena_core::rating::run_elo;
use arena_core::rng::seeded;
use arena_core::simulator::{
    generate_battles, replay_experiment, roster_of, synthetic_stream, ReplayConfig, ReplayStrategy, Strategy,
    SyntheticWorld,
};
use arena_core::{build_matrices, fit_bt_mle, EloConfig, SolverConfig};
use rand::seq::SliceRandom;

#[test]
fn log_and_snapshot_round_trip_through_files() {
    let world = SyntheticWorld::uniform(12, 600.0, 1400.0, 1, 0.05).unwrap();
    let battles = generate_battles(&world, Strategy::Uniform, 10_000, &mut seeded(2)).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let log = dir.path().join("battles.jsonl");
    write_battle_log(&battles.records, BufWriter::new(File::create(&log).unwrap())).unwrap();
    let back = ingest(&log).unwrap();
    assert!(back.rejections.is_empty());
    assert_eq!(back.records.len(), battles.records.len());
    for (a, b) in battles.records.iter().zip(&back.records) {
        assert_eq!((a.winner(), a.loser(), a.timestamp), (b.winner(), b.loser(), b.timestamp));
    }

    let roster = world.golden.roster().to_vec();
    let m = build_matrices(&battles.records, &roster).unwrap();
    assert_eq!(build_matrices(&back.records, &roster).unwrap(), m);
    let fit = fit_bt_mle(&m, &SolverConfig::default()).unwrap();

    let snap = dir.path().join("state.snap");
    save_state(&snap, &StateSnapshot::new(m.clone(), Some(fit.clone()))).unwrap();
    let restored = load_state(&snap).unwrap();
    assert_eq!(restored.matrices, m);
    let scores = restored.ratings.unwrap();
    for (x, y) in fit.scores().iter().zip(scores.scores()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn elo_depends_on_order_and_mle_does_not() {
    let world = SyntheticWorld::uniform(6, 800.0, 1200.0, 3, 0.0).unwrap();
    let mut records = generate_battles(&world, Strategy::Uniform, 3_000, &mut seeded(4)).unwrap().records;
    let roster = world.golden.roster().to_vec();
    let cfg = EloConfig::default();
    let forward = run_elo(&records, &roster, 1000.0, &cfg).unwrap();
    let mle_forward = fit_bt_mle(&build_matrices(&records, &roster).unwrap(), &SolverConfig::default()).unwrap();

    records.shuffle(&mut seeded(5));
    let shuffled = run_elo(&records, &roster, 1000.0, &cfg).unwrap();
    let mle_shuffled = fit_bt_mle(&build_matrices(&records, &roster).unwrap(), &SolverConfig::default()).unwrap();

    let elo_gap = forward
        .scores()
        .iter()
        .zip(shuffled.scores())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(elo_gap > 1.0, "Elo moved by only {elo_gap}");
    assert_eq!(mle_forward, mle_shuffled);
}

#[test]
fn proximity_battles_respect_threshold_except_noise() {
    let world = SyntheticWorld::uniform(100, 400.0, 1400.0, 6, 0.05).unwrap();
    let h = 150.0;
    let out = generate_battles(&world, Strategy::Proximity { h }, 20_000, &mut seeded(7)).unwrap();
    assert_eq!(out.records.len(), 20_000);
    assert_eq!(out.off_threshold.iter().filter(|&&o| o).count(), 1_000);
    let g = &world.golden;
    for (r, off) in out.records.iter().zip(&out.off_threshold) {
        let gap = (g.score(g.index_of(&r.model_a.id).unwrap()) - g.score(g.index_of(&r.model_b.id).unwrap())).abs();
        if !off {
            assert!(gap < h, "gap {gap}");
        }
    }
}

#[test]
fn replay_strategies_consume_different_amounts() {
    let world = SyntheticWorld::uniform(15, 500.0, 1300.0, 8, 0.0).unwrap();
    let stream = synthetic_stream(&world, 30_000, 6, 9).unwrap();
    assert_eq!(roster_of(&stream).len(), 15);
    let run = |strategy| {
        let cfg = ReplayConfig {
            strategy,
            ..ReplayConfig::default()
        };
        replay_experiment(&stream, Some(&world.golden), &cfg).unwrap()
    };
    let all = run(ReplayStrategy::All);
    let near = run(ReplayStrategy::Proximity { h: 300.0 });
    let (a, p) = (all.last(), near.last());
    assert!(p.consumed < a.consumed);
    assert_eq!(a.active_models, 15);
    assert!(a.vs_golden.unwrap().kendall_tau > 0.9);
    assert!(p.vs_golden.unwrap().kendall_tau > 0.9);
    let points: Vec<usize> = all.timeline.iter().map(|t| t.records_seen).collect();
    assert!(points.windows(2).all(|w| w[0] < w[1]));
}
