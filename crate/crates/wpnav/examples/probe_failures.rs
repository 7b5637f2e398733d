use std::sync::Arc;
use wpnav::policy::*;
use wpnav::trainer::*;
use wpnav::world::*;
fn main() {
    let (params_loaded, _) = load_checkpoint(std::path::Path::new("/tmp/probe/best.ckpt"), None, true).unwrap();
    let cfg = PolicyConfig::default();
    let policy = Policy::from_params(&cfg, params_loaded).unwrap();
    let wp = WorldParams { width_cells: 56, height_cells: 56, resolution: 0.25, style: WorldStyle::Empty };
    let ep_params = EpisodeParams { min_geodesic: 1.5, max_geodesic: 4.5, success_distance: 0.5, goal_marker: true, marker_size: 3, goal_clearance: 1.5, max_attempts: 400 };
    let eval_set = make_eval_set(&wp, &[100,101,102,103], &ep_params, 200, 1).unwrap();
    let ppo = PPOConfig::desk();
    let scan_cfg = ScanConfig::default();
    let (sr, spl, runs) = evaluate_greedy(&policy, &eval_set, NavigatorKind::Continuous, &scan_cfg, &ppo).unwrap();
    println!("SR {sr:.3} SPL {spl:.3} over {} episodes", runs.len());
    let mut timeouts = 0; let mut badstop = 0; let mut ne_sum = 0.0; let mut coll = 0;
    let mut stop_dists = vec![];
    for ((grid, ep), run) in eval_set.iter().zip(&runs) {
        if run.success { continue; }
        if run.timed_out { timeouts += 1; } else { badstop += 1; }
        let field = DistanceField::from_point(grid, &ep.goal).unwrap();
        let d = field.at_point(grid, &run.final_pose.position());
        ne_sum += d; stop_dists.push(d);
        coll += run.collisions;
        let _ = Arc::clone(ep);
    }
    let fails = timeouts + badstop;
    stop_dists.sort_by(|a,b| a.partial_cmp(b).unwrap());
    println!("failures: {fails} (timeouts {timeouts}, bad stops {badstop}), collisions in failures {coll}");
    if fails > 0 {
        println!("failure NE mean {:.2}, median {:.2}, min {:.2}", ne_sum / fails as f64, stop_dists[fails/2], stop_dists[0]);
        let near = stop_dists.iter().filter(|&&d| d < 1.0).count();
        println!("failures that stopped within 1.0 m: {near}/{fails}");
    }
}
