//! Test-only guidance laws.
#![allow(dead_code)]

use botlc::estimator::Diagnostics;
use botlc::geometry::Vec2;
use botlc::law::{GuidanceLaw, LawOutput, PredefinedTiming, StageContext};

/// Agent and estimate never move.
pub struct Still;

impl GuidanceLaw for Still {
    fn label(&self) -> &'static str {
        "still"
    }
    fn d_star(&self) -> f64 {
        1.0
    }
    fn tangential_gain(&self) -> f64 {
        0.0
    }
    fn evaluate(&self, _: &StageContext<'_>) -> LawOutput {
        LawOutput::default()
    }
}

/// `dy/dt = -y`, estimate frozen.
pub struct Decay;

impl GuidanceLaw for Decay {
    fn label(&self) -> &'static str {
        "decay"
    }
    fn d_star(&self) -> f64 {
        1.0
    }
    fn tangential_gain(&self) -> f64 {
        0.0
    }
    fn evaluate(&self, ctx: &StageContext<'_>) -> LawOutput {
        LawOutput {
            u: -ctx.state.agent,
            ..Default::default()
        }
    }
}

/// Pure orbiting at a fixed tangential speed with the estimate frozen.
/// Reports predefined-time constants so the convergence checks run on it.
pub struct FrozenEstimate {
    pub k_omega: f64,
    pub d_star: f64,
}

impl GuidanceLaw for FrozenEstimate {
    fn label(&self) -> &'static str {
        "frozen"
    }
    fn d_star(&self) -> f64 {
        self.d_star
    }
    fn tangential_gain(&self) -> f64 {
        self.k_omega
    }
    fn timing(&self) -> Option<PredefinedTiming> {
        Some(PredefinedTiming {
            alpha1: 0.5,
            t_c1: 0.2,
            alpha2: 0.5,
            t_c2: 0.4,
        })
    }
    fn evaluate(&self, ctx: &StageContext<'_>) -> LawOutput {
        LawOutput {
            u: ctx.obs.phi_perp * self.k_omega,
            diagnostics: Diagnostics::empty(),
            ..Default::default()
        }
    }
}

/// Closes on the target as `dy/dt = k (x - y)`, so the range decays
/// exponentially and eventually falls below the coincidence threshold.
pub struct Ram(pub f64);

impl GuidanceLaw for Ram {
    fn label(&self) -> &'static str {
        "ram"
    }
    fn d_star(&self) -> f64 {
        1.0
    }
    fn tangential_gain(&self) -> f64 {
        0.0
    }
    fn evaluate(&self, ctx: &StageContext<'_>) -> LawOutput {
        LawOutput {
            u: ctx.obs.phi * (self.0 * ctx.obs.distance),
            ..Default::default()
        }
    }
}

pub fn v(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}
