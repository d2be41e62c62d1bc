use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use arena_core::analysis::{bootstrap_variance, compare, rank_metrics};
use arena_core::disc::{fit_disc, transitivity_report, DiscConfig};
use arena_core::io::{ingest, load_state, save_state, Ingested, StateSnapshot};
use arena_core::rng::seeded;
use arena_core::scheduler::{
    next_placement_opponent, placement_step, PlacementConfig, PlacementState, ProximityConfig, ProximitySampler,
};
use arena_core::simulator::{
    fim_sweep, replay_experiment, roster_of, synthetic_stream, threshold_sweep, FimMode, RefitCadence, ReplayConfig,
    ReplayStrategy, Strategy, SweepResult, SyntheticWorld,
};
use arena_core::{build_matrices, fit_bt_mle, BattleRecord, ModelRef, RatingVector, SolverConfig, ELO_ALPHA};

use crate::output::{fmt_f64, fmt_opt, CliError, CliResult, Sink};
use crate::{
    BootstrapArgs, DiscArgs, FimModeArg, MetricsArgs, PlaceArgs, RankArgs, ReplayArgs, ReplayKind, ScheduleArgs,
    StrategyKind, SweepFimArgs, SweepThresholdArgs, WorldArgs,
};

fn with_path(path: &Path) -> impl Fn(arena_core::Error) -> CliError + '_ {
    move |e| match e {
        arena_core::Error::Io(io) => CliError::Input(format!("{}: {io}", path.display())),
        e => CliError::Core(e),
    }
}

fn read_log(path: &Path) -> CliResult<Vec<BattleRecord>> {
    let Ingested { records, rejections } = ingest(path).map_err(with_path(path))?;
    for r in &rejections {
        eprintln!("{}:{}: rejected: {}", path.display(), r.line, r.reason);
    }
    if records.is_empty() {
        return Err(CliError::Input(format!("{}: no usable battles", path.display())));
    }
    Ok(records)
}

fn rated(snapshot: &StateSnapshot) -> CliResult<&RatingVector> {
    snapshot
        .ratings
        .as_ref()
        .ok_or_else(|| CliError::Input("snapshot holds no ratings; run `arena rank` first".into()))
}

fn world(args: &WorldArgs, seed: u64) -> CliResult<SyntheticWorld> {
    Ok(SyntheticWorld::uniform(args.models, args.lo, args.hi, seed, args.noise)?)
}

pub fn rank(args: &RankArgs, seed: u64, out: Option<&Path>) -> CliResult {
    let records = read_log(&args.log)?;
    let roster = roster_of(&records);
    let m = build_matrices(&records, &roster)?;
    let solver = SolverConfig {
        regularization: args.regularization,
        ..SolverConfig::default()
    };
    let fit = fit_bt_mle(&m, &solver)?;

    let mut snap = StateSnapshot::new(m.clone(), Some(fit.clone()));
    snap.config_fingerprint = serde_json::to_string(&solver)?;
    snap.created_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0);
    let snap_path = args.snapshot.clone().unwrap_or_else(|| args.log.with_extension("snapshot"));
    save_state(&snap_path, &snap).map_err(with_path(&snap_path))?;

    let mut w = Sink::open(out, "rank", seed, args)?.csv();
    w.write_record(["rank", "model", "rating", "battles"])?;
    for (pos, &i) in fit.ranking().iter().enumerate() {
        let battles: u64 = (0..m.len()).map(|j| m.count(i, j)).sum();
        w.write_record([
            (pos + 1).to_string(),
            roster[i].id.clone(),
            fmt_f64(fit.score(i)),
            battles.to_string(),
        ])?;
    }
    w.flush()?;
    eprintln!("snapshot written to {}", snap_path.display());
    Ok(())
}

pub fn schedule(args: &ScheduleArgs, seed: u64, out: Option<&Path>) -> CliResult {
    let snap = load_state(&args.snapshot).map_err(with_path(&args.snapshot))?;
    let theta = rated(&snap)?;
    let cfg = ProximityConfig {
        h: args.h,
        tau: args.tau,
        sample_size_k: args.k,
        min_proximity_n_m: args.n_m,
    };
    let sampler = ProximitySampler::new(theta.clone(), cfg)?;
    let mut rng = seeded(seed);
    let mut w = Sink::open(out, "schedule", seed, args)?.csv();
    w.write_record(["draw", "slot", "model", "rating"])?;
    for draw in 0..args.count {
        for (slot, i) in sampler.sample(&snap.matrices, &mut rng)?.into_iter().enumerate() {
            w.write_record([
                draw.to_string(),
                slot.to_string(),
                theta.roster()[i].id.clone(),
                fmt_f64(theta.score(i)),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_results(path: &Path) -> CliResult<Vec<(u32, u32)>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut rounds = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parsed = line
            .split_once(',')
            .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
        match parsed {
            Some(r) => rounds.push(r),
            None => {
                return Err(CliError::Input(format!(
                    "{}:{}: expected `wins,losses`",
                    path.display(),
                    k + 1
                )))
            }
        }
    }
    Ok(rounds)
}

pub fn place(args: &PlaceArgs, seed: u64, out: Option<&Path>) -> CliResult {
    let snap = load_state(&args.snapshot).map_err(with_path(&args.snapshot))?;
    let theta = rated(&snap)?;
    let cfg = PlacementConfig {
        battles_per_round: args.t,
        winrate_band: args.band,
        min_interval: args.min_interval,
    };
    cfg.validate()?;
    let results = read_results(&args.results)?;
    let mut state = PlacementState::new(ModelRef::new(args.new_model.clone()), theta)?;

    let mut w = Sink::open(out, "place", seed, args)?.csv();
    w.write_record(["round", "opponent", "opponent_rank", "wins", "losses", "lo", "hi", "status", "final_rating"])?;
    for (k, &(wins, losses)) in results.iter().enumerate() {
        if state.finished {
            return Err(CliError::Input(format!(
                "session finished after {k} rounds but the results file has {}",
                results.len()
            )));
        }
        state = placement_step(&state, theta, (wins, losses), &cfg)?;
        let played = state.rounds.last().expect("a round was just played");
        w.write_record([
            (k + 1).to_string(),
            played.opponent.id.clone(),
            played.rank.to_string(),
            wins.to_string(),
            losses.to_string(),
            state.lo.to_string(),
            state.hi.to_string(),
            if state.finished { "finished" } else { "played" }.to_string(),
            fmt_opt(state.final_rating),
        ])?;
    }
    if !state.finished {
        let next = next_placement_opponent(&state, theta)?;
        w.write_record([
            (state.rounds.len() + 1).to_string(),
            next.id,
            state.midpoint().to_string(),
            String::new(),
            String::new(),
            state.lo.to_string(),
            state.hi.to_string(),
            "next".to_string(),
            String::new(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_sweep(result: &SweepResult, mut w: csv::Writer<Box<dyn std::io::Write>>) -> CliResult {
    for row in &result.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_threshold(args: &SweepThresholdArgs, seed: u64, out: Option<&Path>) -> CliResult {
    let world = world(&args.world, seed)?;
    let strategies: Vec<Strategy> = args
        .strategies
        .iter()
        .map(|s| match s {
            StrategyKind::Proximity => Strategy::Proximity { h: 0.0 },
            StrategyKind::Uniform => Strategy::Uniform,
        })
        .collect();
    let seeds: Vec<u64> = (0..args.seeds).collect();
    let result = threshold_sweep(&world, &args.hs, &args.budgets, &strategies, &seeds, &SolverConfig::default());
    write_sweep(&result, Sink::open(out, "simulate sweep-threshold", seed, args)?.csv())
}

pub fn sweep_fim(args: &SweepFimArgs, seed: u64, out: Option<&Path>) -> CliResult {
    let world = world(&args.world, seed)?;
    let mode = match args.mode {
        FimModeArg::Ideal => FimMode::Ideal,
        FimModeArg::Practical => FimMode::Practical,
    };
    let seeds: Vec<u64> = (0..args.seeds).collect();
    let result = fim_sweep(&world, &args.hs, &args.budgets, mode, &seeds);
    write_sweep(&result, Sink::open(out, "simulate sweep-fim", seed, args)?.csv())
}

pub fn replay(args: &ReplayArgs, seed: u64, out: Option<&Path>) -> CliResult {
    let (records, golden) = match &args.log {
        Some(path) => (read_log(path)?, None),
        None => {
            let world = world(&args.world, seed)?;
            let stream = synthetic_stream(&world, args.records, args.initial_models, seed)?;
            (stream, Some(world.golden))
        }
    };
    let cfg = ReplayConfig {
        cold_start_fraction: args.cold_start,
        refit: RefitCadence::Records(args.refit_every),
        strategy: match args.strategy {
            ReplayKind::All => ReplayStrategy::All,
            ReplayKind::Proximity => ReplayStrategy::Proximity { h: args.h },
            ReplayKind::Uniform => ReplayStrategy::Uniform {
                keep_fraction: args.keep,
            },
        },
        placement: PlacementConfig {
            battles_per_round: args.t,
            ..PlacementConfig::default()
        },
        solver: SolverConfig::default(),
        seed,
    };
    let outcome = replay_experiment(&records, golden.as_ref(), &cfg)?;

    let mut sink = Sink::open(out, "simulate replay", seed, args)?;
    sink.comment(&format!(
        "placements={} regularized_refits={}",
        outcome.placements.len(),
        outcome.regularized_refits
    ))?;
    let mut w = sink.csv();
    w.write_record([
        "records_seen",
        "consumed",
        "placement_battles",
        "active_models",
        "ref_spearman_rho",
        "ref_kendall_tau",
        "ref_avg_rank_diff",
        "ref_rmse",
        "golden_spearman_rho",
        "golden_kendall_tau",
        "golden_avg_rank_diff",
        "golden_rmse",
    ])?;
    for p in &outcome.timeline {
        let r = &p.vs_reference;
        let g = p.vs_golden.as_ref();
        w.write_record([
            p.records_seen.to_string(),
            p.consumed.to_string(),
            p.placement_battles.to_string(),
            p.active_models.to_string(),
            fmt_f64(r.spearman_rho),
            fmt_f64(r.kendall_tau),
            fmt_f64(r.avg_rank_diff),
            fmt_f64(r.rmse),
            fmt_opt(g.map(|g| g.spearman_rho)),
            fmt_opt(g.map(|g| g.kendall_tau)),
            fmt_opt(g.map(|g| g.avg_rank_diff)),
            fmt_opt(g.map(|g| g.rmse)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn disc_fit(args: &DiscArgs, seed: u64, out: Option<&Path>) -> CliResult {
    let records = read_log(&args.log)?;
    let roster = roster_of(&records);
    let m = build_matrices(&records, &roster)?.filter_pairs(args.min_count);
    let cfg = DiscConfig {
        iterations: args.iterations,
        learning_rate: args.learning_rate,
        seed,
        ..DiscConfig::default()
    };
    let fit = fit_disc(&m, &cfg)?;
    let report = transitivity_report(&fit);
    let norm = fit.normalized();

    let mut sink = Sink::open(out, "disc-fit", seed, args)?;
    sink.comment(&format!(
        "final_loss={} mean_v={} std_v={} dispersion={} dominant_axis={}",
        fit.final_loss, report.mean_v, report.std_v, report.dispersion, report.dominant_axis
    ))?;
    let mut w = sink.csv();
    w.write_record(["model", "u", "v", "u_normalized", "v_normalized"])?;
    for i in 0..fit.u.len() {
        w.write_record([
            fit.roster[i].id.clone(),
            fmt_f64(fit.u[i]),
            fmt_f64(fit.v[i]),
            fmt_f64(norm.u[i]),
            fmt_f64(norm.v[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn bootstrap(args: &BootstrapArgs, seed: u64, out: Option<&Path>) -> CliResult {
    let records = read_log(&args.log)?;
    let roster = roster_of(&records);
    let solver = SolverConfig::default();
    let main = bootstrap_variance(&records, &roster, args.rounds, seed, &solver, "main")?;
    let baseline = match &args.baseline {
        Some(path) => Some(bootstrap_variance(&read_log(path)?, &roster, args.rounds, seed, &solver, "baseline")?),
        None => None,
    };
    let comparison = baseline.as_ref().map(|b| compare(b, &main)).transpose()?;

    let mut sink = Sink::open(out, "bootstrap", seed, args)?;
    let mut summary = format!("redraws={}", main.redraws);
    if let (Some(b), Some(c)) = (&baseline, &comparison) {
        summary += &format!(
            " baseline_redraws={} mean_variance_reduction={}",
            b.redraws, c.mean_variance_reduction
        );
    }
    sink.comment(&summary)?;
    let mut w = sink.csv();
    let mut header = vec!["model", "mean", "variance", "q025", "median", "q975"];
    if baseline.is_some() {
        header.extend(["baseline_variance", "variance_reduction"]);
    }
    w.write_record(&header)?;
    for (i, s) in main.per_model.iter().enumerate() {
        let mut row = vec![
            s.model.id.clone(),
            fmt_f64(s.mean),
            fmt_f64(s.variance),
            fmt_f64(s.q025),
            fmt_f64(s.median),
            fmt_f64(s.q975),
        ];
        if let (Some(b), Some(c)) = (&baseline, &comparison) {
            row.push(fmt_f64(b.per_model[i].variance));
            row.push(fmt_f64(c.variance_reduction[i]));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn read_ratings(path: &Path) -> CliResult<Vec<(String, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Input(format!("{}: missing `{name}` column", path.display())))
    };
    let (mc, rc) = (column("model")?, column("rating")?);
    let mut out = Vec::new();
    for (k, row) in reader.records().enumerate() {
        let row = row?;
        let rating: f64 = row[rc]
            .parse()
            .map_err(|_| CliError::Input(format!("{}: row {}: bad rating `{}`", path.display(), k + 1, &row[rc])))?;
        out.push((row[mc].to_string(), rating));
    }
    Ok(out)
}

pub fn metrics(args: &MetricsArgs, seed: u64, out: Option<&Path>) -> CliResult {
    let est = read_ratings(&args.estimated)?;
    let gold = read_ratings(&args.golden)?;
    if est.len() != gold.len() {
        return Err(CliError::Input(format!(
            "rating files list {} and {} models",
            est.len(),
            gold.len()
        )));
    }
    let roster: Vec<ModelRef> = est.iter().map(|(id, _)| ModelRef::new(id.clone())).collect();
    let gold_scores = est
        .iter()
        .map(|(id, _)| {
            gold.iter()
                .find(|(g, _)| g == id)
                .map(|(_, r)| *r)
                .ok_or_else(|| CliError::Input(format!("model `{id}` missing from {}", args.golden.display())))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    let estimated = RatingVector::from_scores(roster.clone(), est.iter().map(|(_, r)| *r).collect(), ELO_ALPHA)?;
    let golden = RatingVector::from_scores(roster, gold_scores, ELO_ALPHA)?;
    let m = rank_metrics(&estimated, &golden)?;

    let mut w = Sink::open(out, "metrics", seed, args)?.csv();
    w.write_record(["models", "spearman_rho", "kendall_tau", "avg_rank_diff", "rmse", "mse"])?;
    w.write_record([
        estimated.len().to_string(),
        fmt_f64(m.spearman_rho),
        fmt_f64(m.kendall_tau),
        fmt_f64(m.avg_rank_diff),
        fmt_f64(m.rmse),
        fmt_f64(m.mse()),
    ])?;
    w.flush()?;
    Ok(())
}
