use crate::estimator::Diagnostics;
use crate::geometry::{Mat2, Vec2};
use crate::law::PredefinedTiming;

/// One recorded instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// Agent position `y`.
    pub agent: Vec2,
    /// Target position `x`.
    pub target: Vec2,
    pub x_hat: Vec2,
    pub xi: Vec2,
    /// True range `d`.
    pub d: f64,
    pub d_hat: f64,
    /// Tracking error `d - d*`.
    pub delta: f64,
    /// Range-estimate error `d - d_hat`.
    pub varrho: f64,
    pub xtilde_norm: f64,
    pub u: Vec2,
    /// Bearing angle, wrapped to (-pi, pi].
    pub theta: f64,
    pub flags: Diagnostics,
    /// Regressor pair; absent when read back from CSV.
    pub regressors: Option<(Mat2, Vec2)>,
}

impl Sample {
    /// Estimation error `x_hat - x`.
    pub fn xtilde(&self) -> Vec2 {
        self.x_hat - self.target
    }

    /// Bearing rotated clockwise, rebuilt from positions.
    pub fn phi_perp(&self) -> Vec2 {
        let phi = (self.target - self.agent) / self.d;
        Vec2::new(phi.y, -phi.x)
    }
}

/// Run parameters the analysis layer needs to interpret the samples.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryMeta {
    pub method: String,
    /// Integrator step in seconds.
    pub dt: f64,
    pub record_stride: usize,
    pub d_star: Option<f64>,
    /// Tangential speed of the command, `k_omega` for the proposed law.
    pub tangential_gain: Option<f64>,
    pub timing: Option<PredefinedTiming>,
    pub stationary_target: bool,
}

impl Default for TrajectoryMeta {
    fn default() -> Self {
        Self {
            method: "unknown".into(),
            dt: 0.0,
            record_stride: 1,
            d_star: None,
            tangential_gain: None,
            timing: None,
            stationary_target: true,
        }
    }
}

impl TrajectoryMeta {
    /// Desired angular rate `k_omega / d*`.
    pub fn omega_star(&self) -> Option<f64> {
        Some(self.tangential_gain? / self.d_star?)
    }
}

/// Why a run stopped early.
#[derive(Clone, Debug, PartialEq)]
pub struct Abort {
    pub t: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub meta: TrajectoryMeta,
    pub samples: Vec<Sample>,
    pub abort: Option<Abort>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn series(&self, f: impl Fn(&Sample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    pub fn series_flags(&self) -> Vec<Diagnostics> {
        self.samples.iter().map(|s| s.flags).collect()
    }

    pub fn first(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// Time between consecutive samples.
    pub fn sample_interval(&self) -> f64 {
        self.meta.dt * self.meta.record_stride as f64
    }

    /// Total length of the estimate's path.
    pub fn x_hat_path_length(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| (w[1].x_hat - w[0].x_hat).norm())
            .sum()
    }
}
