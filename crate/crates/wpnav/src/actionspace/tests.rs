use super::*;
use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn uniform_heads(offset_mode: HeadMode, distance_mode: HeadMode) -> HeadOutputs {
    let offsets: Vec<Head> = (0..SECTOR_COUNT)
        .map(|_| match offset_mode {
            HeadMode::Continuous => build_offset_head(offset_mode, &[0.0, 0.0]).unwrap(),
            HeadMode::Discrete => build_offset_head(offset_mode, &[0.0; 7]).unwrap(),
            HeadMode::Fixed => Head::Fixed(FIXED_OFFSET),
        })
        .collect();
    let distances: Vec<Head> = (0..SECTOR_COUNT)
        .map(|_| match distance_mode {
            HeadMode::Continuous => build_distance_head(distance_mode, &[0.0, 0.0]).unwrap(),
            HeadMode::Discrete => build_distance_head(distance_mode, &[0.0; 6]).unwrap(),
            HeadMode::Fixed => Head::Fixed(FIXED_DISTANCE),
        })
        .collect();
    HeadOutputs::new(Categorical::uniform(PANO_SIZE), offsets, distances).unwrap()
}

#[test]
fn six_spectrum_configs_round_trip_codes() {
    let codes = ["cc", "dc", "dd", "dfixed", "fixedc", "fixedfixed"];
    for (cfg, code) in ExpressivityConfig::spectrum().iter().zip(codes) {
        assert_eq!(cfg.code(), code);
        assert_eq!(ExpressivityConfig::from_code(code).unwrap(), *cfg);
    }
}

#[test]
fn head_mappings_at_zero() {
    let off = map_offset_head(0.0, 0.0).unwrap();
    assert_abs_diff_eq!(off.mu, 0.0, epsilon = 1e-12);
    let dist = map_distance_head(0.0, 0.0).unwrap();
    assert_abs_diff_eq!(dist.mu, 2.125, epsilon = 1e-12);
}

#[test]
fn head_mapping_saturates_within_bounds() {
    let off = map_offset_head(1e6, 0.0).unwrap();
    assert!(off.mu <= OFFSET_LIMIT + 1e-15);
    assert_abs_diff_eq!(off.mu, OFFSET_LIMIT, epsilon = 1e-9);
    let dist = map_distance_head(-1e6, 0.0).unwrap();
    assert!(dist.mu >= DIST_MIN - 1e-15);
    assert!(map_offset_head(f64::NAN, 0.0).is_err());
}

#[test]
fn compose_examples() {
    let (r, theta) = compose_waypoint(&WaypointAction::Move {
        sector: 3,
        offset: 10f64.to_radians(),
        distance: 1.0,
    })
    .unwrap();
    assert_abs_diff_eq!(r, 1.0);
    assert_abs_diff_eq!(theta, 100f64.to_radians(), epsilon = 1e-12);

    // The standard forward step: sector 0, no offset, 0.25 m.
    let (r, theta) =
        compose_waypoint(&WaypointAction::Move { sector: 0, offset: 0.0, distance: 0.25 }).unwrap();
    assert_eq!((r, theta), (0.25, 0.0));

    let (_, theta) = compose_waypoint(&WaypointAction::Move {
        sector: 11,
        offset: 15f64.to_radians(),
        distance: 1.0,
    })
    .unwrap();
    assert_abs_diff_eq!(theta, 345f64.to_radians(), epsilon = 1e-12);

    assert!(compose_waypoint(&WaypointAction::Stop).is_err());
}

#[test]
fn joint_logprob_uniform_discrete() {
    let h = uniform_heads(HeadMode::Discrete, HeadMode::Discrete);
    let a = WaypointAction::Move { sector: 4, offset: discrete_offsets()[2], distance: 1.25 };
    assert_abs_diff_eq!(h.joint_logprob(&a), -(546f64.ln()), epsilon = 1e-9);
}

#[test]
fn joint_logprob_stop_is_pano_alone() {
    let mut probs = vec![0.5 / 12.0; SECTOR_COUNT];
    probs.push(0.5);
    let h = HeadOutputs::new(
        Categorical::new(probs).unwrap(),
        vec![Head::Fixed(FIXED_OFFSET); SECTOR_COUNT],
        vec![Head::Fixed(FIXED_DISTANCE); SECTOR_COUNT],
    )
    .unwrap();
    assert_abs_diff_eq!(h.joint_logprob(&WaypointAction::Stop), 0.5f64.ln(), epsilon = 1e-12);
}

#[test]
fn fixed_fixed_logprob_is_pano_only() {
    let h = uniform_heads(HeadMode::Fixed, HeadMode::Fixed);
    let a = WaypointAction::Move { sector: 2, offset: FIXED_OFFSET, distance: FIXED_DISTANCE };
    assert_abs_diff_eq!(h.joint_logprob(&a), (1.0f64 / 13.0).ln(), epsilon = 1e-12);
}

#[test]
fn out_of_support_actions_get_neg_infinity() {
    let h = uniform_heads(HeadMode::Discrete, HeadMode::Discrete);
    // 0.03 rad is not one of the discrete offset atoms.
    let a = WaypointAction::Move { sector: 0, offset: 0.03, distance: 1.25 };
    assert_eq!(h.joint_logprob(&a), f64::NEG_INFINITY);
}

#[test]
fn decomposed_entropy_examples() {
    // Uniform 13-way pano, uniform 7-way offsets, fixed distances.
    let h = uniform_heads(HeadMode::Discrete, HeadMode::Fixed);
    let (s_pano, s_offset, s_dist) = h.decomposed_entropy();
    assert_abs_diff_eq!(s_pano, 13f64.ln(), epsilon = 1e-12);
    assert_abs_diff_eq!(s_offset, 7f64.ln(), epsilon = 1e-12);
    assert_eq!(s_dist, 0.0);

    let h = uniform_heads(HeadMode::Fixed, HeadMode::Discrete);
    let (_, s_offset, s_dist) = h.decomposed_entropy();
    assert_eq!(s_offset, 0.0);
    assert_abs_diff_eq!(s_dist, 6f64.ln(), epsilon = 1e-12);
}

#[test]
fn mode_action_examples() {
    // 0.9 mass on STOP.
    let mut probs = vec![0.1 / 12.0; SECTOR_COUNT];
    probs.push(0.9);
    let h = HeadOutputs::new(
        Categorical::new(probs).unwrap(),
        vec![Head::Fixed(FIXED_OFFSET); SECTOR_COUNT],
        vec![Head::Fixed(FIXED_DISTANCE); SECTOR_COUNT],
    )
    .unwrap();
    assert_eq!(h.mode_action(), WaypointAction::Stop);

    // Continuous heads at raw 0: offset 0°, distance 2.125 m.
    let h = uniform_heads(HeadMode::Continuous, HeadMode::Continuous);
    match h.mode_action() {
        WaypointAction::Move { sector, offset, distance } => {
            assert_eq!(sector, 0); // uniform pano ties break low
            assert_abs_diff_eq!(offset, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(distance, 2.125, epsilon = 1e-12);
        }
        WaypointAction::Stop => panic!("expected motion"),
    }

    // Exact tie between sectors 2 and 5 resolves to 2.
    let mut probs = vec![0.05; PANO_SIZE];
    probs[2] = 0.25;
    probs[5] = 0.25;
    let total: f64 = probs.iter().sum();
    let probs: Vec<f64> = probs.into_iter().map(|p| p / total).collect();
    let h = HeadOutputs::new(
        Categorical::new(probs).unwrap(),
        vec![Head::Fixed(FIXED_OFFSET); SECTOR_COUNT],
        vec![Head::Fixed(FIXED_DISTANCE); SECTOR_COUNT],
    )
    .unwrap();
    match h.mode_action() {
        WaypointAction::Move { sector, .. } => assert_eq!(sector, 2),
        WaypointAction::Stop => panic!("expected motion"),
    }
}

/// Quadrature/sum of exp(joint_logprob) over the whole action space.
fn total_probability(h: &HeadOutputs) -> f64 {
    let mut total = h.pano.prob(STOP_INDEX);
    for i in 0..SECTOR_COUNT {
        let off_mass = head_mass(&h.offsets[i]);
        let dist_mass = head_mass(&h.distances[i]);
        total += h.pano.prob(i) * off_mass * dist_mass;
    }
    total
}

fn head_mass(head: &Head) -> f64 {
    match head {
        Head::Continuous(d) => {
            // Simpson quadrature of the density over the support.
            let n = 2000;
            let (lo, hi) = (d.lower, d.upper);
            let hstep = (hi - lo) / n as f64;
            let mut acc = d.pdf(lo) + d.pdf(hi);
            for i in 1..n {
                acc += d.pdf(lo + i as f64 * hstep) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * hstep / 3.0
        }
        Head::Discrete { dist, .. } => dist.probs().iter().sum(),
        Head::Fixed(_) => 1.0,
    }
}

#[test]
fn joint_probability_normalizes_for_all_six_configs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for cfg in ExpressivityConfig::spectrum() {
        // Random raw outputs rather than zeros, to exercise the mappings.
        let h = random_heads(&cfg, &mut rng);
        let total = total_probability(&h);
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-4);
    }
}

pub(super) fn random_heads(cfg: &ExpressivityConfig, rng: &mut ChaCha8Rng) -> HeadOutputs {
    use rand::Rng;
    let logits: Vec<f64> = (0..PANO_SIZE).map(|_| rng.random_range(-2.0..2.0)).collect();
    let pano = Categorical::from_logits(&logits).unwrap();
    let offsets: Vec<Head> = (0..SECTOR_COUNT)
        .map(|_| {
            let w = offset_head_width(cfg.offset_mode).max(1);
            let raw: Vec<f64> = (0..w).map(|_| rng.random_range(-2.0..2.0)).collect();
            build_offset_head(cfg.offset_mode, &raw).unwrap()
        })
        .collect();
    let distances: Vec<Head> = (0..SECTOR_COUNT)
        .map(|_| {
            let w = distance_head_width(cfg.distance_mode).max(1);
            let raw: Vec<f64> = (0..w).map(|_| rng.random_range(-2.0..2.0)).collect();
            build_distance_head(cfg.distance_mode, &raw).unwrap()
        })
        .collect();
    HeadOutputs::new(pano, offsets, distances).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Every reachable bearing decomposes into (sector, offset in ±15°).
    #[test]
    fn coverage_of_all_bearings(bearing in 0f64..std::f64::consts::TAU) {
        let sector_f = (bearing / SECTOR_WIDTH).round();
        let sector = (sector_f as i64).rem_euclid(SECTOR_COUNT as i64) as usize;
        let offset = crate::geom::wrap_angle(bearing - sector_f * SECTOR_WIDTH);
        prop_assert!(offset.abs() <= OFFSET_LIMIT + 1e-9);
        let (_, theta) = compose_waypoint(&WaypointAction::Move {
            sector, offset, distance: 1.0,
        }).unwrap();
        let diff = crate::geom::wrap_angle(theta - bearing);
        prop_assert!(diff.abs() < 1e-9);
    }

    /// Sampling then scoring never yields the −inf sentinel, and samples obey
    /// the action-space bounds, for every expressivity config.
    #[test]
    fn sampled_actions_are_in_support(seed in 0u64..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for cfg in ExpressivityConfig::spectrum() {
            let h = random_heads(&cfg, &mut rng);
            for _ in 0..20 {
                let a = h.sample(&mut rng);
                let lp = h.joint_logprob(&a);
                prop_assert!(lp.is_finite(), "config {cfg}: -inf logprob for {a:?}");
                if let WaypointAction::Move { sector, offset, distance } = a {
                    prop_assert!(sector < SECTOR_COUNT);
                    prop_assert!(offset.abs() <= OFFSET_LIMIT + 1e-12);
                    prop_assert!((DIST_MIN..=DIST_MAX).contains(&distance));
                    match cfg.offset_mode {
                        HeadMode::Discrete => prop_assert!(
                            atom_index(&discrete_offsets(), offset).is_some()),
                        HeadMode::Fixed => prop_assert!(offset == FIXED_OFFSET),
                        HeadMode::Continuous => {}
                    }
                    match cfg.distance_mode {
                        HeadMode::Discrete => prop_assert!(
                            atom_index(&discrete_distances(), distance).is_some()),
                        HeadMode::Fixed => prop_assert!(distance == FIXED_DISTANCE),
                        HeadMode::Continuous => {}
                    }
                }
            }
        }
    }
}
