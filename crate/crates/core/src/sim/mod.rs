//! Fixed-step RK4 integration of agent, target, estimate and regressors.
//!
//! The bearing is recomputed from the stage state inside every RK stage.
//! The regressor branch used for `xi` is latched per step; when `sigma_min(P)`
//! crosses the singularity threshold inside a step, the crossing is located
//! by bisection and the step is split there so that each piece integrates a
//! smooth vector field. The sample clock still advances by exactly `dt`.

mod motion;
pub mod scenario;
mod trajectory;

pub use motion::TargetMotion;
pub use scenario::{Method, MethodKind, Scenario};
pub use trajectory::{Abort, Sample, Trajectory, TrajectoryMeta};

use crate::controller::d_hat;
use crate::error::{Error, Result};
use crate::estimator::{self, Diagnostics, RegressorState, XiBranch};
use crate::geometry::{bearing, BearingObservation, Mat2, Vec2};
use crate::law::{GuidanceLaw, LawOutput, StageContext};

/// Bisection iterations used to locate a branch switch inside a step.
const SWITCH_BISECTIONS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorldState {
    pub t: f64,
    /// Agent position `y`.
    pub agent: Vec2,
    /// Target position `x`.
    pub target: Vec2,
    pub x_hat: Vec2,
    pub regressors: RegressorState,
    /// Scalar range estimate, only for laws that carry one.
    pub cao_rho: Option<f64>,
}

impl WorldState {
    pub fn new(agent: Vec2, target: Vec2, x_hat: Vec2) -> Self {
        Self {
            t: 0.0,
            agent,
            target,
            x_hat,
            regressors: RegressorState::default(),
            cao_rho: None,
        }
    }

    pub fn observe(&self) -> Result<BearingObservation> {
        bearing(&self.target, &self.agent)
    }

    fn offset(&self, rate: &WorldRate, h: f64) -> Self {
        Self {
            t: self.t + h,
            agent: self.agent + rate.agent * h,
            target: self.target + rate.target * h,
            x_hat: self.x_hat + rate.x_hat * h,
            regressors: RegressorState::new(
                self.regressors.p() + rate.p * h,
                self.regressors.q() + rate.q * h,
            ),
            cao_rho: self.cao_rho.map(|r| r + rate.rho * h),
        }
    }

    fn is_finite(&self) -> Option<&'static str> {
        let v = |v: &Vec2| v.iter().all(|c| c.is_finite());
        if !v(&self.agent) {
            Some("agent position")
        } else if !v(&self.target) {
            Some("target position")
        } else if !v(&self.x_hat) {
            Some("target estimate")
        } else if !self.regressors.p().iter().all(|c| c.is_finite()) || !v(self.regressors.q()) {
            Some("regressor state")
        } else if self.cao_rho.is_some_and(|r| !r.is_finite()) {
            Some("range estimate")
        } else {
            None
        }
    }
}

/// Time derivative of a [`WorldState`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WorldRate {
    pub agent: Vec2,
    pub target: Vec2,
    pub x_hat: Vec2,
    pub p: Mat2,
    pub q: Vec2,
    pub rho: f64,
}

impl WorldRate {
    fn combine(k: [&WorldRate; 4]) -> WorldRate {
        let w = |a: Vec2, b: Vec2, c: Vec2, d: Vec2| (a + 2.0 * b + 2.0 * c + d) / 6.0;
        WorldRate {
            agent: w(k[0].agent, k[1].agent, k[2].agent, k[3].agent),
            target: w(k[0].target, k[1].target, k[2].target, k[3].target),
            x_hat: w(k[0].x_hat, k[1].x_hat, k[2].x_hat, k[3].x_hat),
            p: (k[0].p + 2.0 * k[1].p + 2.0 * k[2].p + k[3].p) / 6.0,
            q: w(k[0].q, k[1].q, k[2].q, k[3].q),
            rho: (k[0].rho + 2.0 * k[1].rho + 2.0 * k[2].rho + k[3].rho) / 6.0,
        }
    }
}

/// Full vector field at `state` with the regressor branch fixed to `branch`.
pub fn derivative<L: GuidanceLaw + ?Sized>(
    state: &WorldState,
    law: &L,
    motion: &TargetMotion,
    branch: XiBranch,
) -> Result<(WorldRate, LawOutput)> {
    let obs = state.observe()?;
    let target_velocity = motion.velocity(state.t);
    let out = law.evaluate(&StageContext {
        state,
        obs: &obs,
        target_velocity,
        branch,
    });
    let (p, q) = estimator::regressor_derivative(&state.regressors, &obs, &state.agent);
    let rate = WorldRate {
        agent: out.u,
        target: target_velocity,
        x_hat: out.x_hat_rate,
        p,
        q,
        rho: out.range_rate,
    };
    Ok((rate, out))
}

fn rk4_fixed<L: GuidanceLaw + ?Sized>(
    state: &WorldState,
    h: f64,
    law: &L,
    motion: &TargetMotion,
    branch: XiBranch,
) -> Result<WorldState> {
    let (k1, _) = derivative(state, law, motion, branch)?;
    let (k2, _) = derivative(&state.offset(&k1, h / 2.0), law, motion, branch)?;
    let (k3, _) = derivative(&state.offset(&k2, h / 2.0), law, motion, branch)?;
    let (k4, _) = derivative(&state.offset(&k3, h), law, motion, branch)?;
    Ok(state.offset(&WorldRate::combine([&k1, &k2, &k3, &k4]), h))
}

/// Advance one step of length `dt`.
///
/// Returns the new state and `BRANCH_SWITCH` if the step was split.
pub fn step_rk4<L: GuidanceLaw + ?Sized>(
    state: &WorldState,
    dt: f64,
    law: &L,
    motion: &TargetMotion,
) -> Result<(WorldState, Diagnostics)> {
    let threshold = law.singularity_threshold();
    let branch = XiBranch::select(&state.regressors, threshold);
    let trial = rk4_fixed(state, dt, law, motion, branch)?;
    let mut flags = Diagnostics::empty();
    let mut next = if XiBranch::select(&trial.regressors, threshold) == branch {
        trial
    } else {
        let (mut lo, mut hi) = (0.0, dt);
        for _ in 0..SWITCH_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            let s = rk4_fixed(state, mid, law, motion, branch)?;
            if XiBranch::select(&s.regressors, threshold) == branch {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        flags |= Diagnostics::BRANCH_SWITCH;
        let mid = rk4_fixed(state, hi, law, motion, branch)?;
        let after = XiBranch::select(&mid.regressors, threshold);
        if dt - hi > 0.0 {
            rk4_fixed(&mid, dt - hi, law, motion, after)?
        } else {
            mid
        }
    };
    next.t = state.t + dt;
    law.synchronize(&mut next);
    if let Some(quantity) = next.is_finite() {
        return Err(Error::NonFinite { t: next.t, quantity });
    }
    Ok((next, flags))
}

/// Step size, horizon and output decimation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt = {} must be > 0", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid(format!("t_end = {} must be > 0", self.t_end)));
        }
        if self.record_stride == 0 {
            return Err(Error::invalid("record_stride must be >= 1"));
        }
        Ok(())
    }

    /// Number of integration steps, `floor(t_end / dt)`.
    pub fn steps(&self) -> usize {
        // absorb representation error such as 5.0 / 1e-4 = 49999.999...
        (self.t_end / self.dt * (1.0 + 1e-12)).floor() as usize
    }

    pub fn sample_count(&self) -> usize {
        self.steps() / self.record_stride + 1
    }
}

fn record<L: GuidanceLaw + ?Sized>(
    state: &WorldState,
    law: &L,
    motion: &TargetMotion,
    extra: Diagnostics,
) -> Result<Sample> {
    let branch = XiBranch::select(&state.regressors, law.singularity_threshold());
    let (_, out) = derivative(state, law, motion, branch)?;
    let obs = state.observe()?;
    let xi = estimator::reconstruct_xi_with(&state.regressors, &state.x_hat, branch);
    let mut flags = out.diagnostics | extra;
    flags.set(Diagnostics::XI_ZERO_BRANCH, branch == XiBranch::Zero);
    let dh = d_hat(&state.x_hat, &state.agent);
    Ok(Sample {
        t: state.t,
        agent: state.agent,
        target: state.target,
        x_hat: state.x_hat,
        xi,
        d: obs.distance,
        d_hat: dh,
        delta: obs.distance - law.d_star(),
        varrho: obs.distance - dh,
        xtilde_norm: (state.x_hat - state.target).norm(),
        u: out.u,
        theta: obs.theta,
        flags,
        regressors: Some((*state.regressors.p(), *state.regressors.q())),
    })
}

/// Integrate from `initial` and record every `record_stride`-th step.
///
/// Never fails: a degenerate or non-finite state ends the run and is
/// reported in [`Trajectory::abort`] alongside the samples recorded so far.
pub fn simulate<L: GuidanceLaw + ?Sized>(
    law: &L,
    initial: WorldState,
    motion: &TargetMotion,
    config: &IntegratorConfig,
) -> Trajectory {
    let meta = TrajectoryMeta {
        method: law.label().to_string(),
        dt: config.dt,
        record_stride: config.record_stride,
        d_star: Some(law.d_star()),
        tangential_gain: Some(law.tangential_gain()),
        timing: law.timing(),
        stationary_target: motion.is_stationary(),
    };
    let mut trajectory = Trajectory {
        meta,
        samples: Vec::with_capacity(config.sample_count()),
        abort: None,
    };
    let abort = |e: Error, t: f64| Abort {
        t,
        reason: e.to_string(),
    };

    let mut state = initial;
    state.t = 0.0;
    law.initialize(&mut state);
    match record(&state, law, motion, Diagnostics::empty()) {
        Ok(s) => trajectory.samples.push(s),
        Err(e) => {
            trajectory.abort = Some(abort(e, 0.0));
            return trajectory;
        }
    }

    let mut pending = Diagnostics::empty();
    for k in 1..=config.steps() {
        let stepped = step_rk4(&state, config.dt, law, motion);
        let (mut next, flags) = match stepped {
            Ok(v) => v,
            Err(e) => {
                trajectory.abort = Some(abort(e, state.t));
                return trajectory;
            }
        };
        // t = k dt exactly, no accumulated rounding
        next.t = k as f64 * config.dt;
        state = next;
        pending |= flags;
        if k % config.record_stride == 0 {
            match record(&state, law, motion, pending) {
                Ok(s) => trajectory.samples.push(s),
                Err(e) => {
                    trajectory.abort = Some(abort(e, state.t));
                    return trajectory;
                }
            }
            pending = Diagnostics::empty();
        }
    }
    trajectory
}
