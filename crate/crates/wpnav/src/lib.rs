//! A desk-scale laboratory for instruction-guided waypoint navigation.
//!
//! The crate simulates continuous 2D worlds on occupancy grids and trains a
//! recurrent waypoint-prediction policy with PPO. An agent observes a 12-sector
//! panoramic range scan plus a templated instruction, and predicts relative
//! polar waypoints `(r, θ)` whose heading splits into a coarse 30° sector pick
//! and a fine offset. The distance and offset heads can each be continuous
//! (truncated Gaussian), discrete, or fixed, spanning a spectrum from free
//! waypoint prediction down to a forward/left/right heading picker.
//!
//! Predicted waypoints are executed by either a continuous turn-then-translate
//! navigator or a discrete 15°/0.25 m greedy navigator, and resulting command
//! streams are scored with robot-time metrics (EET from a profiled point-turn
//! motion model, SCT against minimal-time oracle planners) alongside the usual
//! navigation metrics (TL, NE, OS, SR, SPL).
//!
//! Start with the `examples/` directory: each example is a runnable tour of one
//! subsystem. The `wpnav` binary drives full experiments (`generate`, `train`,
//! `evaluate`, `render`, `compare`).

pub mod actionspace;
pub mod cli;
pub mod error;
pub mod geom;
pub mod metrics;
pub mod navigators;
pub mod policy;
pub mod trainer;
pub mod world;

pub use error::{Error, Result};

/// Version string embedded in every output artifact.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
