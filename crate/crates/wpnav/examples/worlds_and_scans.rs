//! Tour of the world layer: procedural grids, panoramic range scans, geodesic
//! distances, and templated episode instructions.
//!
//! ```bash
//! cargo run --example worlds_and_scans
//! ```

use wpnav::world::{
    generate_episode, generate_world, geodesic_distance, panorama_scan, EpisodeParams, Pose,
    ScanConfig, Vocabulary, WorldParams, WorldStyle,
};

fn main() -> wpnav::Result<()> {
    let params = WorldParams {
        width_cells: 40,
        height_cells: 28,
        resolution: 0.25,
        style: WorldStyle::Scatter { obstacles: 3, obstacle_min: 2, obstacle_max: 4 },
    };
    let grid = generate_world(7, &params)?;
    println!(
        "world: {}x{} cells at {} m/cell ({}x{} m), {} free cells, {} component(s)",
        grid.width_cells(),
        grid.height_cells(),
        grid.resolution(),
        grid.width_m(),
        grid.height_m(),
        grid.free_cells().len(),
        grid.free_components()
    );

    let episode = generate_episode(&grid, 3, &EpisodeParams::default())?;
    let work = episode.apply_marker(&grid)?;

    // ASCII map: '#' blocked, '.' free, S start, G goal, M the goal marker.
    let (sc, gc) = (
        work.cell_of(&episode.start.position()).unwrap(),
        work.cell_of(&episode.goal).unwrap(),
    );
    for cy in (0..work.height_cells()).rev() {
        let mut line = String::new();
        for cx in 0..work.width_cells() {
            let ch = if (cx, cy) == sc {
                'S'
            } else if (cx, cy) == gc {
                'G'
            } else if episode.marker.contains(&(cx, cy)) {
                'M'
            } else if work.is_blocked(cx, cy) {
                '#'
            } else {
                '.'
            };
            line.push(ch);
        }
        println!("{line}");
    }

    let vocab = Vocabulary::template();
    println!("\nepisode {}:", episode.id);
    println!("  instruction: \"{}\"", vocab.decode(&episode.instruction)?);
    println!("  geodesic length: {:.3} m over {} path vertices", episode.geodesic_length, episode.shortest_path.len());
    println!(
        "  straight-line distance: {:.3} m",
        episode.start.position().distance(&episode.goal)
    );
    let geo = geodesic_distance(&work, &episode.start.position(), &episode.goal)?;
    println!("  geodesic (corner-allowed metric): {:.3} m", geo);

    // A panorama from the start pose: 12 sectors of 30°.
    let scan = panorama_scan(&work, &episode.start, &ScanConfig::default())?;
    println!("\npanorama at the start pose (sector: meters):");
    for (i, r) in scan.readings.iter().enumerate() {
        println!("  {:>3}° -> {r:.2}", i * 30);
    }

    // Rotating the pose by one sector shifts the readings by one slot.
    let rotated = Pose::new(
        episode.start.x,
        episode.start.y,
        episode.start.heading + 30f64.to_radians(),
    );
    let shifted = panorama_scan(&work, &rotated, &ScanConfig::default())?;
    let max_err = (0..12)
        .map(|i| (shifted.readings[i] - scan.readings[(i + 1) % 12]).abs())
        .fold(0.0f64, f64::max)
;
    println!("\nrotation equivariance: max shift error {max_err:.2e}");
    Ok(())
}
