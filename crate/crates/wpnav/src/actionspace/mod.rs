//! The polar waypoint action space across its expressivity spectrum.
//!
//! An action is either STOP or a motion `(sector, offset, distance)`: the
//! coarse heading is one of 12 panorama sectors (30° apart) drawn from a
//! 13-way categorical (12 sectors + STOP); the fine heading offset and the
//! travel distance come from per-sector heads that are continuous (truncated
//! Gaussian), discrete, or fixed constants.

mod categorical;
mod truncnorm;

pub use categorical::Categorical;
pub use truncnorm::TruncatedGaussian;

use crate::error::{Error, Result};
use crate::geom::normalize_angle;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Panorama sectors in the coarse heading component.
pub const SECTOR_COUNT: usize = 12;
/// Pano categorical size: 12 sectors plus STOP.
pub const PANO_SIZE: usize = SECTOR_COUNT + 1;
/// Index of the STOP entry in the pano categorical.
pub const STOP_INDEX: usize = SECTOR_COUNT;
/// Angular width of one sector (30°).
pub const SECTOR_WIDTH: f64 = std::f64::consts::TAU / SECTOR_COUNT as f64;
/// Offset head range: ±15°.
pub const OFFSET_LIMIT: f64 = 15.0 * std::f64::consts::PI / 180.0;
/// Distance head range in meters.
pub const DIST_MIN: f64 = 0.25;
pub const DIST_MAX: f64 = 4.0;
/// Fixed-mode constants: no offset, one forward step.
pub const FIXED_OFFSET: f64 = 0.0;
pub const FIXED_DISTANCE: f64 = 0.25;
/// Floor applied to predicted standard deviations.
pub const SIGMA_FLOOR: f64 = 1e-3;

/// Discrete offset atoms: −15° to +15° in 5° steps.
pub fn discrete_offsets() -> [f64; 7] {
    let mut out = [0.0; 7];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (-15.0 + 5.0 * i as f64).to_radians();
    }
    out
}

/// Discrete distance atoms: 0.25 m to 2.75 m in 0.5 m steps.
pub fn discrete_distances() -> [f64; 6] {
    let mut out = [0.0; 6];
    for (i, d) in out.iter_mut().enumerate() {
        *d = 0.25 + 0.5 * i as f64;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadMode {
    Continuous,
    Discrete,
    Fixed,
}

/// Which prediction heads the policy carries, spanning the expressivity
/// spectrum from fully continuous waypoints down to a fixed forward step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpressivityConfig {
    pub offset_mode: HeadMode,
    pub distance_mode: HeadMode,
}

impl ExpressivityConfig {
    pub const fn new(distance_mode: HeadMode, offset_mode: HeadMode) -> Self {
        ExpressivityConfig { offset_mode, distance_mode }
    }

    /// The six benchmark configurations, ordered as (distance, offset):
    /// (C,C), (D,C), (D,D), (D,-), (-,C), (-,-).
    pub fn spectrum() -> [ExpressivityConfig; 6] {
        use HeadMode::*;
        [
            ExpressivityConfig::new(Continuous, Continuous),
            ExpressivityConfig::new(Discrete, Continuous),
            ExpressivityConfig::new(Discrete, Discrete),
            ExpressivityConfig::new(Discrete, Fixed),
            ExpressivityConfig::new(Fixed, Continuous),
            ExpressivityConfig::new(Fixed, Fixed),
        ]
    }

    /// Short code, distance mode first: cc, dc, dd, dfixed, fixedc, fixedfixed.
    pub fn code(&self) -> &'static str {
        use HeadMode::*;
        match (self.distance_mode, self.offset_mode) {
            (Continuous, Continuous) => "cc",
            (Discrete, Continuous) => "dc",
            (Discrete, Discrete) => "dd",
            (Discrete, Fixed) => "dfixed",
            (Fixed, Continuous) => "fixedc",
            (Fixed, Fixed) => "fixedfixed",
            (Continuous, Discrete) => "cd",
            (Continuous, Fixed) => "cfixed",
            (Fixed, Discrete) => "fixedd",
        }
    }

    pub fn from_code(code: &str) -> Result<Self> {
        use HeadMode::*;
        let (d, o) = match code {
            "cc" => (Continuous, Continuous),
            "dc" => (Discrete, Continuous),
            "dd" => (Discrete, Discrete),
            "dfixed" => (Discrete, Fixed),
            "fixedc" => (Fixed, Continuous),
            "fixedfixed" => (Fixed, Fixed),
            "cd" => (Continuous, Discrete),
            "cfixed" => (Continuous, Fixed),
            "fixedd" => (Fixed, Discrete),
            _ => return Err(Error::InvalidArgument(format!("unknown expressivity {code:?}"))),
        };
        Ok(ExpressivityConfig::new(d, o))
    }

    /// Waypoint prediction network: the fully continuous configuration.
    pub fn wpn() -> Self {
        ExpressivityConfig::new(HeadMode::Continuous, HeadMode::Continuous)
    }

    /// Heading prediction network: fixed distance and offset (pick-pano).
    pub fn hpn() -> Self {
        ExpressivityConfig::new(HeadMode::Fixed, HeadMode::Fixed)
    }
}

impl std::fmt::Display for ExpressivityConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// One policy action: STOP, or a relative polar waypoint factored into a
/// sector pick, a heading offset in ±15°, and a distance in [0.25, 4] m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WaypointAction {
    Stop,
    Move { sector: usize, offset: f64, distance: f64 },
}

impl WaypointAction {
    pub fn is_stop(&self) -> bool {
        matches!(self, WaypointAction::Stop)
    }

    pub fn distance(&self) -> Option<f64> {
        match self {
            WaypointAction::Stop => None,
            WaypointAction::Move { distance, .. } => Some(*distance),
        }
    }
}

/// Compose the factored heading into a relative polar waypoint `(r, θ)` with
/// `θ = 30°·sector + offset` (mod 360°) measured from the agent heading.
pub fn compose_waypoint(action: &WaypointAction) -> Result<(f64, f64)> {
    match action {
        WaypointAction::Stop => Err(Error::NotAMotion),
        WaypointAction::Move { sector, offset, distance } => {
            let theta = normalize_angle(*sector as f64 * SECTOR_WIDTH + offset);
            Ok((*distance, theta))
        }
    }
}

/// One per-sector prediction head.
#[derive(Debug, Clone, PartialEq)]
pub enum Head {
    Continuous(TruncatedGaussian),
    Discrete { dist: Categorical, atoms: Vec<f64> },
    Fixed(f64),
}

impl Head {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Head::Continuous(d) => d.sample(rng),
            Head::Discrete { dist, atoms } => atoms[dist.sample(rng)],
            Head::Fixed(v) => *v,
        }
    }

    /// Log probability (or density) of a value; `-inf` outside support.
    /// Fixed heads are degenerate and contribute 0 on their single atom.
    pub fn logprob(&self, x: f64) -> f64 {
        match self {
            Head::Continuous(d) => d.logpdf(x),
            Head::Discrete { dist, atoms } => match atom_index(atoms, x) {
                Some(i) => dist.logprob(i),
                None => f64::NEG_INFINITY,
            },
            Head::Fixed(v) => {
                if (x - v).abs() < 1e-9 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn entropy(&self) -> f64 {
        match self {
            Head::Continuous(d) => d.entropy(),
            Head::Discrete { dist, .. } => dist.entropy(),
            Head::Fixed(_) => 0.0,
        }
    }

    pub fn mode(&self) -> f64 {
        match self {
            Head::Continuous(d) => d.mode(),
            Head::Discrete { dist, atoms } => atoms[dist.argmax()],
            Head::Fixed(v) => *v,
        }
    }
}

pub fn atom_index(atoms: &[f64], x: f64) -> Option<usize> {
    atoms.iter().position(|&a| (a - x).abs() < 1e-9)
}

/// The full per-step action distribution: a 13-way pano categorical plus one
/// offset head and one distance head per sector.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadOutputs {
    pub pano: Categorical,
    pub offsets: Vec<Head>,
    pub distances: Vec<Head>,
}

impl HeadOutputs {
    pub fn new(pano: Categorical, offsets: Vec<Head>, distances: Vec<Head>) -> Result<Self> {
        if pano.len() != PANO_SIZE {
            return Err(Error::InvalidArgument(format!("pano must have {PANO_SIZE} entries")));
        }
        if offsets.len() != SECTOR_COUNT || distances.len() != SECTOR_COUNT {
            return Err(Error::InvalidArgument("need one head per sector".into()));
        }
        Ok(HeadOutputs { pano, offsets, distances })
    }

    /// Sample an action: pano first, then the chosen sector's offset and
    /// distance heads, in that fixed order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> WaypointAction {
        let pick = self.pano.sample(rng);
        if pick == STOP_INDEX {
            return WaypointAction::Stop;
        }
        let offset = self.offsets[pick].sample(rng);
        let distance = self.distances[pick].sample(rng);
        WaypointAction::Move { sector: pick, offset, distance }
    }

    /// Factorized joint log probability of an action. Motion actions multiply
    /// pano, offset, and distance factors; STOP is the pano factor alone;
    /// fixed heads contribute 0.
    pub fn joint_logprob(&self, action: &WaypointAction) -> f64 {
        match action {
            WaypointAction::Stop => self.pano.logprob(STOP_INDEX),
            WaypointAction::Move { sector, offset, distance } => {
                self.pano.logprob(*sector)
                    + self.offsets[*sector].logprob(*offset)
                    + self.distances[*sector].logprob(*distance)
            }
        }
    }

    /// Per-component entropies `(S_pano, S_offset, S_dist)`.
    ///
    /// Offset/distance entropies are the expectation of the per-sector head
    /// entropy under the pano's sector probabilities renormalized over the 12
    /// motion sectors, i.e. the conditional entropy given a motion action.
    /// Fixed heads yield 0.
    pub fn decomposed_entropy(&self) -> (f64, f64, f64) {
        let s_pano = self.pano.entropy();
        let motion_mass: f64 = (0..SECTOR_COUNT).map(|i| self.pano.prob(i)).sum();
        if motion_mass <= 0.0 {
            return (s_pano, 0.0, 0.0);
        }
        let mut s_offset = 0.0;
        let mut s_dist = 0.0;
        for i in 0..SECTOR_COUNT {
            let w = self.pano.prob(i) / motion_mass;
            s_offset += w * self.offsets[i].entropy();
            s_dist += w * self.distances[i].entropy();
        }
        (s_pano, s_offset, s_dist)
    }

    /// Greedy action: argmax pano (lowest index wins ties), then each chosen
    /// head's mode.
    pub fn mode_action(&self) -> WaypointAction {
        let pick = self.pano.argmax();
        if pick == STOP_INDEX {
            return WaypointAction::Stop;
        }
        WaypointAction::Move {
            sector: pick,
            offset: self.offsets[pick].mode(),
            distance: self.distances[pick].mode(),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Map raw offset-head outputs to a truncated Gaussian on ±15°:
/// mean `15°·tanh(raw_mean)`, sigma `half-range·sigmoid(raw_spread)` floored
/// at 1e-3.
pub fn map_offset_head(raw_mean: f64, raw_spread: f64) -> Result<TruncatedGaussian> {
    if !raw_mean.is_finite() || !raw_spread.is_finite() {
        return Err(Error::NonFinite("offset head raw outputs"));
    }
    let mu = OFFSET_LIMIT * raw_mean.tanh();
    let sigma = (OFFSET_LIMIT * sigmoid(raw_spread)).max(SIGMA_FLOOR);
    TruncatedGaussian::new(mu, sigma, -OFFSET_LIMIT, OFFSET_LIMIT)
}

/// Map raw distance-head outputs to a truncated Gaussian on [0.25, 4] m:
/// mean `0.25 + 3.75·sigmoid(raw_mean)`, sigma as for offsets with half-range
/// `(4 − 0.25)/2`.
pub fn map_distance_head(raw_mean: f64, raw_spread: f64) -> Result<TruncatedGaussian> {
    if !raw_mean.is_finite() || !raw_spread.is_finite() {
        return Err(Error::NonFinite("distance head raw outputs"));
    }
    let mu = DIST_MIN + (DIST_MAX - DIST_MIN) * sigmoid(raw_mean);
    let half = 0.5 * (DIST_MAX - DIST_MIN);
    let sigma = (half * sigmoid(raw_spread)).max(SIGMA_FLOOR);
    TruncatedGaussian::new(mu, sigma, DIST_MIN, DIST_MAX)
}

/// Build a head for one sector from raw network outputs under a mode.
pub fn build_offset_head(mode: HeadMode, raw: &[f64]) -> Result<Head> {
    match mode {
        HeadMode::Continuous => Ok(Head::Continuous(map_offset_head(raw[0], raw[1])?)),
        HeadMode::Discrete => Ok(Head::Discrete {
            dist: Categorical::from_logits(raw)?,
            atoms: discrete_offsets().to_vec(),
        }),
        HeadMode::Fixed => Ok(Head::Fixed(FIXED_OFFSET)),
    }
}

pub fn build_distance_head(mode: HeadMode, raw: &[f64]) -> Result<Head> {
    match mode {
        HeadMode::Continuous => Ok(Head::Continuous(map_distance_head(raw[0], raw[1])?)),
        HeadMode::Discrete => Ok(Head::Discrete {
            dist: Categorical::from_logits(raw)?,
            atoms: discrete_distances().to_vec(),
        }),
        HeadMode::Fixed => Ok(Head::Fixed(FIXED_DISTANCE)),
    }
}

/// Raw-output width a head needs under a mode (0 means no layer at all).
pub fn offset_head_width(mode: HeadMode) -> usize {
    match mode {
        HeadMode::Continuous => 2,
        HeadMode::Discrete => 7,
        HeadMode::Fixed => 0,
    }
}

pub fn distance_head_width(mode: HeadMode) -> usize {
    match mode {
        HeadMode::Continuous => 2,
        HeadMode::Discrete => 6,
        HeadMode::Fixed => 0,
    }
}

#[cfg(test)]
mod tests;
