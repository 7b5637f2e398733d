//! Acceptance suite: one test per criterion, each printing a PASS line.
//! Run with `cargo test -p wpnav --test acceptance -- --nocapture`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use wpnav::actionspace::{
    build_distance_head, build_offset_head, distance_head_width, offset_head_width, Categorical,
    ExpressivityConfig, Head, HeadOutputs, TruncatedGaussian, PANO_SIZE, SECTOR_COUNT,
};
use wpnav::geom::polyline_length;
use wpnav::metrics::{
    attach_time_metrics, eet, minimal_time_lattice, minimal_time_rrt, sct, vln_metrics,
    DistanceMode, EpisodeResult, MotionModel, OracleTime, PlannerKind, RrtParams,
};
use wpnav::navigators::{collapse_commands, Command};
use wpnav::world::{generate_world, OccupancyGrid, Pose, WorldParams, WorldStyle};

use super::common::*;

fn pass(criterion: u32, detail: &str, t0: Instant) {
    println!("PASS criterion {criterion}: {detail} ({:.2}s)", t0.elapsed().as_secs_f64());
}

#[test]
fn criterion_1_motion_model_exactness() {
    let t0 = Instant::now();
    let m = MotionModel::default();
    let checks = [
        (m.rotate_time(90.0).unwrap(), 14.8498),
        (m.rotate_time(180.0).unwrap(), 33.2692),
        (m.translate_time(1.0).unwrap(), 4.562),
        (m.translate_time(0.25).unwrap(), 1.412),
    ];
    for (got, want) in checks {
        assert!((got - want).abs() < 1e-6, "{got} != {want}");
    }
    pass(1, "rotate/translate fits reproduce the printed values to 1e-6", t0);
}

#[test]
fn criterion_2_metric_unit_suite() {
    let t0 = Instant::now();
    let grid = OccupancyGrid::empty_room(40, 40, 0.25).unwrap();
    let model = MotionModel::default();

    // Formula reproduction on crafted episodes.
    let ep = toy_episode(&grid, grid.cell_center(4, 20), grid.cell_center(36, 20), 0.5);
    let ell = ep.geodesic_length;
    let optimal = EpisodeResult {
        success: true,
        path: ep.shortest_path.clone(),
        commands: vec![Command::Translate(ell), Command::Stop],
        final_position: ep.goal,
        episode: ep.clone(),
    };
    let row = vln_metrics(&optimal, &grid, DistanceMode::Geodesic).unwrap();
    assert_eq!(row.spl, 1.0);
    assert_eq!((row.sr, row.os), (1, 1));
    assert_eq!(row.ne, 0.0);

    // SPL = l / max(TL, l): detour by 25% gives exactly 0.8.
    let mut path = ep.shortest_path.clone();
    path.push(ep.goal.offset(ell * 0.125, 1.3));
    path.push(ep.goal);
    let detour = EpisodeResult {
        success: true,
        path,
        commands: vec![Command::Translate(ell * 1.25)],
        final_position: ep.goal,
        episode: ep.clone(),
    };
    let row = vln_metrics(&detour, &grid, DistanceMode::Geodesic).unwrap();
    assert!((row.spl - 0.8).abs() < 1e-9, "spl {}", row.spl);

    // SCT examples: C == T gives 1; T=100, C=153 gives 100/153.
    let t_eq = eet(&optimal.commands, &model).unwrap();
    let s = sct(
        &optimal,
        &OracleTime { seconds: t_eq, planner: PlannerKind::LatticeDijkstra },
        &model,
    )
    .unwrap();
    assert!((s - 1.0).abs() < 1e-12);
    let slow = EpisodeResult {
        commands: vec![Command::Translate((153.0 - 0.362) / 4.2)],
        ..optimal.clone()
    };
    let s = sct(
        &slow,
        &OracleTime { seconds: 100.0, planner: PlannerKind::LatticeDijkstra },
        &model,
    )
    .unwrap();
    assert!((s - 100.0 / 153.0).abs() < 1e-9);
    assert!((s - 0.6536).abs() < 5e-5);

    // Invariants over 10k randomized synthetic episodes.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let free = grid.free_cells();
    let mut checked = 0;
    while checked < 10_000 {
        let pick = |rng: &mut ChaCha8Rng| {
            let (cx, cy) = free[rng.random_range(0..free.len())];
            grid.cell_center(cx, cy)
        };
        let (start, goal) = (pick(&mut rng), pick(&mut rng));
        if start.distance(&goal) < 1.0 {
            continue;
        }
        let ep = toy_episode(&grid, start, goal, 0.5);
        let mid = pick(&mut rng);
        let fin = pick(&mut rng);
        let path = vec![start, mid, fin];
        let success = fin.distance(&ep.goal) <= 0.5 && rng.random_bool(0.8);
        let result = EpisodeResult {
            success,
            path: path.clone(),
            commands: vec![
                Command::Rotate(rng.random_range(-3.1..3.1)),
                Command::Translate(polyline_length(&path)),
                Command::Stop,
            ],
            final_position: fin,
            episode: ep,
        };
        let mut row = vln_metrics(&result, &grid, DistanceMode::Geodesic).unwrap();
        let oracle = OracleTime {
            seconds: rng.random_range(1.0..30.0),
            planner: PlannerKind::LatticeDijkstra,
        };
        attach_time_metrics(&mut row, &result, Some(&oracle), &model).unwrap();
        assert!(row.spl <= row.sr as f64 + 1e-12);
        assert!(row.sct <= row.sr as f64 + 1e-12);
        assert!(row.os >= row.sr);
        assert!((0.0..=1.0).contains(&row.spl) && (0.0..=1.0).contains(&row.sct));
        checked += 1;
    }
    pass(2, "metric formulas exact; SPL/SCT/OS invariants hold on 10k synthetic episodes", t0);
}

#[test]
fn criterion_3_distribution_suite() {
    let t0 = Instant::now();
    // Bounds and moments against the rejection-sampling oracle.
    let d = TruncatedGaussian::new(0.5, 1.0, 0.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 100_000;
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..n {
        let x = d.sample(&mut rng);
        assert!((d.lower..=d.upper).contains(&x), "sample {x} escaped the bounds");
        sum += x;
        sum2 += x * x;
    }
    let mean = sum / n as f64;
    let var = sum2 / n as f64 - mean * mean;

    // Independent oracle: rejection sampling from the untruncated Gaussian.
    let normal = rand_distr::Normal::new(d.mu, d.sigma).unwrap();
    let mut orng = ChaCha8Rng::seed_from_u64(33);
    let mut osum = 0.0;
    let mut osum2 = 0.0;
    let mut kept = 0;
    while kept < n {
        let x: f64 = rand::Rng::sample(&mut orng, normal);
        if (d.lower..=d.upper).contains(&x) {
            osum += x;
            osum2 += x * x;
            kept += 1;
        }
    }
    let omean = osum / n as f64;
    let ovar = osum2 / n as f64 - omean * omean;
    let se_mean = d.variance().sqrt() / (n as f64).sqrt();
    let se_var = d.variance() * (2.0 / n as f64).sqrt();
    assert!((mean - d.mean()).abs() < 3.0 * se_mean, "mean {mean} vs {}", d.mean());
    assert!((omean - d.mean()).abs() < 3.0 * se_mean);
    assert!((var - d.variance()).abs() < 3.0 * se_var, "var {var} vs {}", d.variance());
    assert!((ovar - d.variance()).abs() < 3.0 * se_var);

    // Density quadrature = 1 ± 1e-6 (Simpson).
    for (mu, sigma, lo, hi) in
        [(0.5, 1.0, 0.0, 1.0), (0.0, 0.3, -0.26, 0.26), (2.5, 1.2, 0.25, 4.0)]
    {
        let d = TruncatedGaussian::new(mu, sigma, lo, hi).unwrap();
        let steps = 4000;
        let h = (hi - lo) / steps as f64;
        let mut acc = d.pdf(lo) + d.pdf(hi);
        for k in 1..steps {
            acc += d.pdf(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        let integral = acc * h / 3.0;
        assert!((integral - 1.0).abs() < 1e-6, "integral {integral}");
    }

    // Joint normalization within 1e-4 for all six expressivity configs.
    for cfg in ExpressivityConfig::spectrum() {
        let heads = random_heads(&cfg, &mut rng);
        let total = joint_probability_mass(&heads);
        assert!((total - 1.0).abs() < 1e-4, "config {cfg}: mass {total}");
    }
    pass(3, "truncated-Gaussian bounds/moments/quadrature and joint normalization hold", t0);
}

#[test]
fn criterion_9_command_collapse_property() {
    let t0 = Instant::now();
    let model = MotionModel::default();
    // The quantized-turn decomposition example, exactly.
    let six = vec![Command::Rotate(15f64.to_radians()); 6];
    let one = [Command::Rotate(90f64.to_radians())];
    let t6 = eet(&six, &model).unwrap();
    let t1 = eet(&one, &model).unwrap();
    assert!((t6 - 23.5833).abs() < 1e-6);
    assert!((t1 - 14.8498).abs() < 1e-6);
    assert!(t6 > t1);

    // 10k navigator-realistic random streams: turn runs in ±15° quanta (as
    // the discrete navigator emits), rotate+translate pairs (as the
    // continuous navigator emits), translates, stops, and zero-magnitude
    // noise. Collapsing never increases the estimated execution time.
    // (Unconstrained adjacent rotations can violate this under the quadratic
    // fit — merging 90°+90° into 180° costs 33.27 s vs 29.70 s — but
    // navigators never emit adjacent free-angle rotations.)
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10_000 {
        let mut cmds = Vec::new();
        for _ in 0..rng.random_range(1..12) {
            match rng.random_range(0..5) {
                0 => {
                    // DN-style run of same-sign quantized turns.
                    let quantum = 15f64.to_radians() * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    for _ in 0..rng.random_range(1..30) {
                        cmds.push(Command::Rotate(quantum));
                    }
                }
                1 => {
                    // CN-style rotate + translate pair.
                    cmds.push(Command::Rotate(rng.random_range(-3.14..3.14)));
                    cmds.push(Command::Translate(rng.random_range(0.0..4.0)));
                }
                2 => cmds.push(Command::Translate(rng.random_range(0.0..4.0))),
                3 => cmds.push(Command::Stop),
                _ => {
                    // Null commands that collapse drops.
                    cmds.push(Command::Rotate(0.0));
                    cmds.push(Command::Translate(0.0));
                }
            }
        }
        let before = eet(&cmds, &model).unwrap();
        let after = eet(&collapse_commands(&cmds), &model).unwrap();
        assert!(
            after <= before + 1e-9,
            "collapse increased EET: {after} > {before} for {cmds:?}"
        );
    }
    pass(9, "eet(collapse(c)) <= eet(c) over 10k navigator-realistic streams; turn example exact", t0);
}

#[test]
fn criterion_5_planner_equivalence() {
    let t0 = Instant::now();
    let model = MotionModel::default();

    // Exact case: aligned empty corridor, goal dead ahead.
    let grid = OccupancyGrid::empty_room(40, 12, 0.25).unwrap();
    let c = grid.cell_center(4, 6);
    let start = Pose::new(c.x, c.y, 0.0);
    let goal = grid.cell_center(16, 6); // 3.0 m ahead
    let rrt = minimal_time_rrt(&grid, &start, &goal, &model, 1, &RrtParams::default()).unwrap();
    let direct = model.translate_time(3.0).unwrap();
    assert!(
        (rrt.seconds - direct).abs() < 1e-9,
        "dead-ahead case: {} vs {direct}",
        rrt.seconds
    );

    // 20 randomized small maps: RRT* within 5% above the lattice oracle and
    // never below it by more than one discretization step.
    let params = WorldParams {
        width_cells: 26,
        height_cells: 26,
        resolution: 0.25,
        style: WorldStyle::Scatter { obstacles: 2, obstacle_min: 2, obstacle_max: 3 },
    };
    let slack = model.rotate_time(15.0).unwrap() + model.translate_time(0.25).unwrap();
    let mut checked = 0;
    let mut seed = 0u64;
    while checked < 20 {
        seed += 1;
        let Ok(grid) = generate_world(seed, &params) else { continue };
        let free = grid.free_cells();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sx, sy) = free[rng.random_range(0..free.len())];
        let (gx, gy) = free[rng.random_range(0..free.len())];
        let s = grid.cell_center(sx, sy);
        let g = grid.cell_center(gx, gy);
        if s.distance(&g) < 2.0 {
            continue;
        }
        let start = Pose::new(s.x, s.y, rng.random_range(0.0..6.28));
        let lattice = minimal_time_lattice(&grid, &start, &g, &model).unwrap();
        let rrt =
            minimal_time_rrt(&grid, &start, &g, &model, seed + 1000, &RrtParams::default())
                .unwrap();
        assert!(
            rrt.seconds <= lattice.seconds * 1.05 + 1e-9,
            "map {seed}: rrt {} vs lattice {}",
            rrt.seconds,
            lattice.seconds
        );
        assert!(
            rrt.seconds >= lattice.seconds - slack,
            "map {seed}: rrt {} below lattice {} by more than one step",
            rrt.seconds,
            lattice.seconds
        );
        checked += 1;
    }
    pass(5, "RRT* within 5% above the lattice on 20 maps; dead-ahead case exact", t0);
}

// ---------------------------------------------------------------------------
// shared helpers live in tests/common/mod.rs
// ---------------------------------------------------------------------------

fn joint_probability_mass(heads: &HeadOutputs) -> f64 {
    let quad = |d: &TruncatedGaussian| {
        let n = 2000;
        let h = (d.upper - d.lower) / n as f64;
        let mut acc = d.pdf(d.lower) + d.pdf(d.upper);
        for k in 1..n {
            acc += d.pdf(d.lower + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    let mass = |head: &Head| match head {
        Head::Continuous(d) => quad(d),
        Head::Discrete { dist, .. } => dist.probs().iter().sum(),
        Head::Fixed(_) => 1.0,
    };
    let mut total = heads.pano.prob(PANO_SIZE - 1);
    for i in 0..SECTOR_COUNT {
        total += heads.pano.prob(i) * mass(&heads.offsets[i]) * mass(&heads.distances[i]);
    }
    total
}

fn random_heads(cfg: &ExpressivityConfig, rng: &mut ChaCha8Rng) -> HeadOutputs {
    let logits: Vec<f64> = (0..PANO_SIZE).map(|_| rng.random_range(-2.0..2.0)).collect();
    let pano = Categorical::from_logits(&logits).unwrap();
    let offsets = (0..SECTOR_COUNT)
        .map(|_| {
            let w = offset_head_width(cfg.offset_mode).max(1);
            let raw: Vec<f64> = (0..w).map(|_| rng.random_range(-2.0..2.0)).collect();
            build_offset_head(cfg.offset_mode, &raw).unwrap()
        })
        .collect();
    let distances = (0..SECTOR_COUNT)
        .map(|_| {
            let w = distance_head_width(cfg.distance_mode).max(1);
            let raw: Vec<f64> = (0..w).map(|_| rng.random_range(-2.0..2.0)).collect();
            build_distance_head(cfg.distance_mode, &raw).unwrap()
        })
        .collect();
    HeadOutputs::new(pano, offsets, distances).unwrap()
}
