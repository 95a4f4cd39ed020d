use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::geometry::Vec2;

/// How the target moves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetMotion {
    #[default]
    Stationary,
    /// Slow decaying drift used for the moving-target experiment.
    DriftProfile,
    ConstantVelocity { velocity_mps: [f64; 2] },
}

impl TargetMotion {
    pub fn velocity(&self, t: f64) -> Vec2 {
        match *self {
            TargetMotion::Stationary => Vec2::zeros(),
            TargetMotion::DriftProfile => {
                let w = 2.0 * PI * 0.03 * t;
                Vec2::new(
                    -0.0125 - 0.0125 * (-0.05 * t).exp() * w.sin().abs(),
                    -0.075 * (-0.1 * t).exp() * w.cos().abs(),
                )
            }
            TargetMotion::ConstantVelocity { velocity_mps } => {
                Vec2::new(velocity_mps[0], velocity_mps[1])
            }
        }
    }

    pub fn is_stationary(&self) -> bool {
        match self {
            TargetMotion::Stationary => true,
            TargetMotion::DriftProfile => false,
            TargetMotion::ConstantVelocity { velocity_mps } => {
                velocity_mps[0] == 0.0 && velocity_mps[1] == 0.0
            }
        }
    }
}
