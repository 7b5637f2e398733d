// Scripted upper-bound probe: navigate by the scan alone (no learning).
use wpnav::actionspace::*;
use wpnav::trainer::*;
use wpnav::world::*;
fn main() {
    let wp = WorldParams { width_cells: 56, height_cells: 56, resolution: 0.25, style: WorldStyle::Empty };
    let ep_params = EpisodeParams { min_geodesic: 1.5, max_geodesic: 4.0, success_distance: 0.5, goal_marker: true, marker_size: 3, goal_clearance: 1.5, max_attempts: 200 };
    let eval_set = make_eval_set(&wp, &[100,101,102,103], &ep_params, 300, 1).unwrap();
    let scan_cfg = ScanConfig { rays_per_sector: 5, max_range: 6.0 };
    let ppo = PPOConfig { episode_step_cap: 20, ..PPOConfig::desk() };
    let mut successes = 0; let mut fail_d = vec![];
    for (grid, ep) in &eval_set {
        let field = DistanceField::from_point(grid, &ep.goal).unwrap();
        let mut pose = ep.start;
        let mut success = false;
        for _ in 0..ppo.episode_step_cap {
            let scan = panorama_scan(grid, &pose, &scan_cfg).unwrap();
            // Beacon signature: a connected run of <=3 short sectors flanked
            // on both sides by clearly longer readings.
            let mut s_min = 0; let mut best = f64::INFINITY;
            for s in 0..12 { if scan.readings[s] < best { best = scan.readings[s]; s_min = s; } }
            let mut lo = s_min; let mut width = 1;
            while width < 4 && scan.readings[(lo + 11) % 12] < best + 0.8 { lo = (lo + 11) % 12; width += 1; }
            let mut hi = s_min;
            while width < 4 && scan.readings[(hi + 1) % 12] < best + 0.8 { hi = (hi + 1) % 12; width += 1; }
            let flank_l = scan.readings[(lo + 11) % 12];
            let flank_r = scan.readings[(hi + 1) % 12];
            let isolated = width <= 3 && flank_l > best + 0.8 && flank_r > best + 0.8;
            if !isolated {
                // no beacon signature: march forward per the instruction
                let (r, theta) = compose_waypoint(&WaypointAction::Move { sector: 0, offset: 0.0, distance: 1.0 }).unwrap();
                pose = step(grid, &pose, r, theta);
                continue;
            }
            if best <= 0.62 {
                success = field.at_point(grid, &pose.position()) <= 0.5;
                break;
            }
            // aim at the middle of the beacon region
            let mid = if width == 1 { s_min as f64 * 30.0 }
                else {
                    let lo_deg = lo as f64 * 30.0;
                    let span = ((hi + 12 - lo) % 12) as f64 * 30.0;
                    lo_deg + span / 2.0
                };
            let sector = ((mid / 30.0).round() as usize) % 12;
            let offset = ((mid - sector as f64 * 30.0).to_radians()).clamp(-OFFSET_LIMIT, OFFSET_LIMIT);
            let r = (best - 0.45).clamp(0.25, 4.0);
            let (r, theta) = compose_waypoint(&WaypointAction::Move { sector, offset, distance: r }).unwrap();
            pose = step(grid, &pose, r, theta);
        }
        if success { successes += 1; } else { fail_d.push(field.at_point(grid, &pose.position())); }
    }
    println!("scripted SR {}/{}", successes, eval_set.len());
    fail_d.sort_by(|a,b| a.partial_cmp(b).unwrap());
    if !fail_d.is_empty() { println!("fail dist median {:.2} min {:.2} max {:.2}", fail_d[fail_d.len()/2], fail_d[0], fail_d[fail_d.len()-1]); }
}
fn step(grid: &OccupancyGrid, pose: &Pose, r: f64, theta: f64) -> Pose {
    wpnav::navigators::continuous_navigate(grid, pose, r, theta).unwrap().final_pose
}
