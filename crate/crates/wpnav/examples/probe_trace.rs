use wpnav::actionspace::*;
use wpnav::geom::wrap_angle;
use wpnav::trainer::*;
use wpnav::world::*;
fn main() {
    let wp = WorldParams { width_cells: 56, height_cells: 56, resolution: 0.25, style: WorldStyle::Empty };
    let ep_params = EpisodeParams { min_geodesic: 1.5, max_geodesic: 4.0, success_distance: 0.5, goal_marker: true, marker_size: 2, goal_clearance: 1.5, max_attempts: 200 };
    let eval_set = make_eval_set(&wp, &[100], &ep_params, 30, 1).unwrap();
    let scan_cfg = ScanConfig::default();
    for (idx, (grid, ep)) in eval_set.iter().enumerate().take(6) {
        let field = DistanceField::from_point(grid, &ep.goal).unwrap();
        let pose = ep.start;
        let scan = panorama_scan(grid, &pose, &scan_cfg).unwrap();
        let goal_bearing = pose.position().bearing_to(&ep.goal);
        let rel = wrap_angle(goal_bearing - pose.heading).to_degrees();
        let d_goal = pose.position().distance(&ep.goal);
        let marker_c = grid.cell_center(ep.marker[0].0, ep.marker[0].1);
        let d_marker = pose.position().distance(&marker_c);
        println!("ep {idx}: goal at rel {rel:+.0}° dist {d_goal:.2}, marker dist {d_marker:.2}, geo {:.2}", field.at_point(grid, &pose.position()));
        println!("  readings: {:?}", scan.readings.iter().map(|r| (r*10.0).round()/10.0).collect::<Vec<_>>());
    }
}
