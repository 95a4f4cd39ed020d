//! The estimator/controller interface shared by every method.
//!
//! The simulation engine only sees [`GuidanceLaw`]; swapping the proposed
//! pair for a baseline changes no engine code.

use serde::{Deserialize, Serialize};

use crate::controller::{self, ControllerParams};
use crate::estimator::{self, Diagnostics, EstimatorParams, XiBranch};
use crate::geometry::{BearingObservation, Vec2};
use crate::sim::WorldState;

pub const DEFAULT_SINGULARITY_THRESHOLD: f64 = 1e-8;

/// Everything a law may read while the engine evaluates one RK stage.
#[derive(Clone, Copy, Debug)]
pub struct StageContext<'a> {
    pub state: &'a WorldState,
    pub obs: &'a BearingObservation,
    /// Ground-truth target velocity, only for oracle quantities.
    pub target_velocity: Vec2,
    /// Regressor branch held fixed over the current (sub)step.
    pub branch: XiBranch,
}

impl StageContext<'_> {
    /// Bearing rate from ground truth, for laws that need it.
    pub fn bearing_rate(&self, agent_velocity: &Vec2) -> Vec2 {
        self.obs.rate(agent_velocity, &self.target_velocity)
    }
}

/// Exponents and strong predefined times of the proposed pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredefinedTiming {
    pub alpha1: f64,
    pub t_c1: f64,
    pub alpha2: f64,
    pub t_c2: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LawOutput {
    /// Velocity command for the single-integrator agent.
    pub u: Vec2,
    pub x_hat_rate: Vec2,
    /// Rate of the scalar range estimate, for laws that carry one.
    pub range_rate: f64,
    pub diagnostics: Diagnostics,
}

pub trait GuidanceLaw: Sync {
    fn label(&self) -> &'static str;

    /// Desired orbit radius.
    fn d_star(&self) -> f64;

    /// Constant tangential speed of the command.
    fn tangential_gain(&self) -> f64;

    fn singularity_threshold(&self) -> f64 {
        DEFAULT_SINGULARITY_THRESHOLD
    }

    /// Predefined-time constants, for laws whose convergence claims the
    /// analysis layer can check.
    fn timing(&self) -> Option<PredefinedTiming> {
        None
    }

    /// Hook to set up law-specific state at t = 0.
    fn initialize(&self, _state: &mut WorldState) {}

    fn evaluate(&self, ctx: &StageContext<'_>) -> LawOutput;

    /// Re-derive algebraic quantities after a completed step.
    fn synchronize(&self, _state: &mut WorldState) {}
}

impl<L: GuidanceLaw + ?Sized> GuidanceLaw for &L {
    fn label(&self) -> &'static str {
        (**self).label()
    }
    fn d_star(&self) -> f64 {
        (**self).d_star()
    }
    fn tangential_gain(&self) -> f64 {
        (**self).tangential_gain()
    }
    fn singularity_threshold(&self) -> f64 {
        (**self).singularity_threshold()
    }
    fn timing(&self) -> Option<PredefinedTiming> {
        (**self).timing()
    }
    fn initialize(&self, state: &mut WorldState) {
        (**self).initialize(state)
    }
    fn evaluate(&self, ctx: &StageContext<'_>) -> LawOutput {
        (**self).evaluate(ctx)
    }
    fn synchronize(&self, state: &mut WorldState) {
        (**self).synchronize(state)
    }
}

/// Predefined-time estimator paired with the predefined-time orbit controller.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Proposed {
    pub estimator: EstimatorParams,
    pub controller: ControllerParams,
}

impl GuidanceLaw for Proposed {
    fn label(&self) -> &'static str {
        "proposed"
    }

    fn d_star(&self) -> f64 {
        self.controller.d_star()
    }

    fn tangential_gain(&self) -> f64 {
        self.controller.k_omega()
    }

    fn singularity_threshold(&self) -> f64 {
        self.estimator.singularity_threshold
    }

    fn timing(&self) -> Option<PredefinedTiming> {
        Some(PredefinedTiming {
            alpha1: self.estimator.alpha1,
            t_c1: self.estimator.t_c1,
            alpha2: self.controller.alpha2,
            t_c2: self.controller.t_c2,
        })
    }

    fn evaluate(&self, ctx: &StageContext<'_>) -> LawOutput {
        let state = ctx.state;
        let mut diagnostics = Diagnostics::empty();
        if ctx.branch == XiBranch::Zero {
            diagnostics |= Diagnostics::XI_ZERO_BRANCH;
        }
        let xi = estimator::reconstruct_xi_with(&state.regressors, &state.x_hat, ctx.branch);
        let (x_hat_rate, est_sat) = estimator::estimator_derivative(&xi, &self.estimator);
        let dh = controller::d_hat(&state.x_hat, &state.agent);
        let (u, ctl_sat) = controller::control(ctx.obs, dh, &self.controller);
        diagnostics.set(Diagnostics::ESTIMATOR_SATURATED, est_sat);
        diagnostics.set(Diagnostics::CONTROL_SATURATED, ctl_sat);
        LawOutput {
            u,
            x_hat_rate,
            range_rate: 0.0,
            diagnostics,
        }
    }
}
