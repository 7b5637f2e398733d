//! Point-turn robot motion model: fitted rotate/translate time costs.

use crate::error::{Error, Result};
use crate::navigators::Command;
use serde::{Deserialize, Serialize};

/// Time model for a point-turn base: a quadratic in turn angle (degrees) and a
/// linear in travel distance (meters). Defaults are the profiled MoveBase
/// controller fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionModel {
    pub rotate: RotateCoeffs,
    pub translate: TranslateCoeffs,
    /// Commands below this magnitude are not issued and cost nothing.
    #[serde(default = "default_null_epsilon")]
    pub null_command_epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotateCoeffs {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranslateCoeffs {
    pub b1: f64,
    pub b0: f64,
}

fn default_null_epsilon() -> f64 {
    1e-6
}

impl Default for MotionModel {
    fn default() -> Self {
        MotionModel {
            rotate: RotateCoeffs { a2: 0.000358, a1: 0.108, a0: 2.23 },
            translate: TranslateCoeffs { b1: 4.2, b0: 0.362 },
            null_command_epsilon: default_null_epsilon(),
        }
    }
}

impl MotionModel {
    pub fn validate(&self) -> Result<()> {
        let r = &self.rotate;
        // Nonnegative and nondecreasing on angle in [0°, 180°].
        if r.a0 < 0.0 || r.a1 < 0.0 || 2.0 * r.a2 * 180.0 + r.a1 < 0.0 {
            return Err(Error::InvalidArgument("rotate fit not monotone nonnegative".into()));
        }
        let t = &self.translate;
        if t.b0 < 0.0 || t.b1 < 0.0 {
            return Err(Error::InvalidArgument("translate fit not monotone nonnegative".into()));
        }
        if self.null_command_epsilon < 0.0 {
            return Err(Error::InvalidArgument("negative null-command epsilon".into()));
        }
        Ok(())
    }

    /// Seconds to turn in place by `angle_deg` (unsigned magnitude, ≤ 180°).
    pub fn rotate_time(&self, angle_deg: f64) -> Result<f64> {
        if angle_deg < 0.0 || angle_deg > 180.0 + 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "rotate magnitude {angle_deg}° outside [0°, 180°]"
            )));
        }
        if angle_deg < self.null_command_epsilon {
            return Ok(0.0);
        }
        let phi = angle_deg;
        Ok(self.rotate.a2 * phi * phi + self.rotate.a1 * phi + self.rotate.a0)
    }

    /// Seconds to drive straight for `dist` meters.
    pub fn translate_time(&self, dist: f64) -> Result<f64> {
        if dist < 0.0 {
            return Err(Error::InvalidArgument(format!("negative distance {dist}")));
        }
        if dist < self.null_command_epsilon {
            return Ok(0.0);
        }
        Ok(self.translate.b1 * dist + self.translate.b0)
    }

    pub fn command_time(&self, cmd: &Command) -> Result<f64> {
        match cmd {
            Command::Rotate(a) => self.rotate_time(a.abs().to_degrees()),
            Command::Translate(d) => self.translate_time(*d),
            Command::Stop => Ok(0.0),
        }
    }
}

/// Estimated execution time: the summed per-command time of a stream.
pub fn eet(commands: &[Command], model: &MotionModel) -> Result<f64> {
    let mut total = 0.0;
    for cmd in commands {
        total += model.command_time(cmd)?;
    }
    Ok(total)
}
