//! Waypoint prediction statistics: distance means overall and by episode phase.

use serde::{Deserialize, Serialize};

/// Distance-prediction summary over a set of episodes. Phases split each
/// episode by step position: first 25%, middle 50%, last 25%.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct WaypointStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub phase_means: [f64; 3],
    pub phase_counts: [usize; 3],
}

/// Compute prediction statistics from per-episode sequences of predicted
/// waypoint distances (motion steps only). Empty input yields an empty report.
pub fn waypoint_statistics(per_episode: &[Vec<f64>]) -> WaypointStats {
    let mut all = Vec::new();
    let mut phase_sums = [0.0f64; 3];
    let mut phase_counts = [0usize; 3];
    for steps in per_episode {
        let n = steps.len();
        for (t, &d) in steps.iter().enumerate() {
            all.push(d);
            let frac = (t as f64 + 0.5) / n as f64;
            let phase = if frac < 0.25 {
                0
            } else if frac < 0.75 {
                1
            } else {
                2
            };
            phase_sums[phase] += d;
            phase_counts[phase] += 1;
        }
    }
    if all.is_empty() {
        return WaypointStats::default();
    }
    let count = all.len();
    let mean = all.iter().sum::<f64>() / count as f64;
    let var = all.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / count as f64;
    let mut phase_means = [0.0; 3];
    for i in 0..3 {
        if phase_counts[i] > 0 {
            phase_means[i] = phase_sums[i] / phase_counts[i] as f64;
        }
    }
    WaypointStats { count, mean, std: var.sqrt(), phase_means, phase_counts }
}
