//! Low-level navigators: the continuous turn-then-translate navigator vs the
//! discrete 15°/0.25 m greedy navigator on the same waypoints, with command
//! streams, collapse, and execution-time accounting.
//!
//! ```bash
//! cargo run --example navigate_waypoints
//! ```

use wpnav::metrics::{eet, MotionModel};
use wpnav::navigators::{
    collapse_commands, continuous_navigate, discrete_navigate, write_command_log,
};
use wpnav::world::{OccupancyGrid, Pose};

fn main() -> wpnav::Result<()> {
    let grid = OccupancyGrid::empty_room(60, 60, 0.25)?;
    let pose = Pose::new(7.5, 7.5, 0.0);
    let model = MotionModel::default();

    for (r, theta_deg) in [(1.0, 0.0), (2.0, 95.0), (1.5, 180.0), (0.75, -40.0)] {
        let theta = (theta_deg as f64).to_radians();
        println!("waypoint (r = {r} m, θ = {theta_deg}°):");

        let cn = continuous_navigate(&grid, &pose, r, theta)?;
        let dn = discrete_navigate(&grid, &pose, r, theta)?;
        let cn_time = eet(&cn.commands, &model)?;
        let dn_time = eet(&dn.commands, &model)?;
        println!(
            "  CN: {:>2} commands, residual {:.2e} m, EET {:>7.3} s",
            cn.commands.len(),
            cn.residual,
            cn_time
        );
        println!(
            "  DN: {:>2} commands, residual {:.3} m, EET {:>7.3} s",
            dn.commands.len(),
            dn.residual,
            dn_time
        );

        // Collapsing the DN's turn run recovers most of the gap.
        let collapsed = collapse_commands(&dn.commands);
        let collapsed_time = eet(&collapsed, &model)?;
        println!(
            "  DN collapsed to {:>2} commands, EET {:>7.3} s",
            collapsed.len(),
            collapsed_time
        );
        print!("  DN command log:\n{}", indent(&write_command_log(&dn.commands)));
    }

    // The per-command overhead the timing gap rests on: six 15° turns cost
    // far more than one 90° turn.
    let six = vec![wpnav::navigators::Command::Rotate(15f64.to_radians()); 6];
    let one = [wpnav::navigators::Command::Rotate(90f64.to_radians())];
    println!(
        "six 15° turns: {:.4} s  vs  one 90° turn: {:.4} s",
        eet(&six, &model)?,
        eet(&one, &model)?
    );
    Ok(())
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("    {l}\n")).collect()
}
