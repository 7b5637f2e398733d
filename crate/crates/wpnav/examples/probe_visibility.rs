use wpnav::geom::Point;
use wpnav::world::*;
fn main() {
    let grid = generate_world(0, &WorldParams::empty(40, 40, 0.25)).unwrap();
    for (rays, msize) in [(5usize, 1usize), (5, 2), (9, 2)] {
        let params = EpisodeParams { min_geodesic: 1.5, max_geodesic: 4.5, marker_size: msize, ..Default::default() };
        let cfg = ScanConfig { rays_per_sector: rays, max_range: 10.0 };
        let mut vis_near = 0; let mut total = 0;
        for seed in 0..300u64 {
            let Ok(ep) = generate_episode(&grid, seed, &params) else { continue };
            if ep.marker.is_empty() { continue; }
            let work = ep.apply_marker(&grid).unwrap();
            // a pose on the path ~1.5 m (geodesic) before the goal, facing along the path
            let mut acc = 0.0; let mut pose = ep.start;
            'seg: for w in ep.shortest_path.windows(2) {
                let seg = w[0].distance(&w[1]);
                let remaining = ep.geodesic_length - 1.5;
                if acc + seg >= remaining {
                    let f = (remaining - acc) / seg;
                    let p = Point::new(w[0].x + f*(w[1].x-w[0].x), w[0].y + f*(w[1].y-w[0].y));
                    pose = Pose::new(p.x, p.y, w[0].bearing_to(&w[1]));
                    break 'seg;
                }
                acc += seg;
            }
            if !work.is_free_point(&pose.position()) { continue; }
            let with = panorama_scan(&work, &pose, &cfg).unwrap();
            let without = panorama_scan(&grid, &pose, &cfg).unwrap();
            total += 1;
            if (0..12).any(|i| (without.readings[i] - with.readings[i]).abs() > 0.4) { vis_near += 1; }
        }
        println!("rays={rays} marker={msize}x{msize}: visible 1.5m out: {vis_near}/{total}");
    }
}
