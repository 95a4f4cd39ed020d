//! Literature baselines used for comparison, each wrapped as a
//! [`GuidanceLaw`].
//!
//! * Deghat: projection estimator with a linear radial controller.
//! * Cao: scalar range estimate along the bearing line. Needs the bearing
//!   rate, which the simulator supplies from ground truth.
//! * Chen: finite-time estimator on the Kreisselmeier regressors.

use serde::{Deserialize, Serialize};

use crate::controller::d_hat;
use crate::error::{Error, Result};
use crate::estimator::{Diagnostics, RegressorState};
use crate::geometry::{sig_pow, sig_pow_vec, BearingObservation, Mat2, Vec2};
use crate::law::{GuidanceLaw, LawOutput, StageContext};
use crate::sim::WorldState;

/// Gains for all three baselines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineParams {
    pub k_est: f64,
    pub k_alpha: f64,
    pub k_beta: f64,
    pub k_e: f64,
    pub kappa_alpha: f64,
    pub kappa_beta: f64,
    pub kappa_est: f64,
    pub k_d: f64,
    pub k_phi: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            k_est: 5.0,
            k_alpha: 1.5,
            k_beta: 5.0,
            k_e: 5.0,
            kappa_alpha: 1.5,
            kappa_beta: 5.0,
            kappa_est: 5.0,
            k_d: 1.5,
            k_phi: 5.0,
            beta1: 0.5,
            beta2: 0.5,
        }
    }
}

impl BaselineParams {
    pub fn validate(&self) -> Result<()> {
        let gains = [
            ("k_est", self.k_est),
            ("k_alpha", self.k_alpha),
            ("k_beta", self.k_beta),
            ("k_e", self.k_e),
            ("kappa_alpha", self.kappa_alpha),
            ("kappa_beta", self.kappa_beta),
            ("kappa_est", self.kappa_est),
            ("k_d", self.k_d),
            ("k_phi", self.k_phi),
        ];
        for (name, g) in gains {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::invalid(format!("baseline gain {name} = {g} must be > 0")));
            }
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::invalid(format!("{name} = {b} must lie in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Scalar range estimate carried by the Cao method.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CaoState {
    pub rho_hat: f64,
}

/// Which signal the Chen estimator compares `P x_hat` against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChenResidual {
    /// Agent position, as transcribed.
    Y,
    /// Regressor vector `q`, which satisfies `P x = q`.
    #[default]
    Q,
}

pub fn deghat_estimator_derivative(
    x_hat: &Vec2,
    obs: &BearingObservation,
    agent: &Vec2,
    k_est: f64,
) -> Vec2 {
    let projector = Mat2::identity() - obs.phi * obs.phi.transpose();
    projector * (agent - x_hat) * k_est
}

pub fn deghat_control(
    obs: &BearingObservation,
    d_hat: f64,
    k_alpha: f64,
    k_beta: f64,
    d_star: f64,
) -> Vec2 {
    obs.phi * (k_alpha * (d_hat - d_star)) + obs.phi_perp * k_beta
}

/// Range-estimate rate.
///
/// As transcribed the rate depends on `d x_hat/dt`, while `x_hat = y + rho phi`
/// itself depends on `rho`. Substituting
/// `d x_hat/dt = dy/dt + rho_dot phi + rho phi_dot` and using
/// `phi_perp . phi = 0` removes the loop:
///
/// ```text
/// rho_dot = -phi . dy/dt + k_e (phi_perp . dy/dt + rho phi_perp . phi_dot)
/// ```
pub fn cao_state_derivative(
    state: &CaoState,
    obs: &BearingObservation,
    agent_velocity: &Vec2,
    bearing_rate: &Vec2,
    k_e: f64,
) -> f64 {
    -obs.phi.dot(agent_velocity)
        + k_e * (obs.phi_perp.dot(agent_velocity) + state.rho_hat * obs.phi_perp.dot(bearing_rate))
}

pub fn cao_control(
    obs: &BearingObservation,
    rho_hat: f64,
    kappa_alpha: f64,
    kappa_beta: f64,
    d_star: f64,
) -> Vec2 {
    obs.phi * (kappa_alpha * (rho_hat - d_star)) + obs.phi_perp * kappa_beta
}

pub fn chen_estimator_derivative(
    x_hat: &Vec2,
    regressors: &RegressorState,
    agent: &Vec2,
    kappa_est: f64,
    beta1: f64,
    residual: ChenResidual,
) -> Vec2 {
    let p = regressors.p();
    let reference = match residual {
        ChenResidual::Y => *agent,
        ChenResidual::Q => *regressors.q(),
    };
    -kappa_est * (p.transpose() * sig_pow_vec(&(p * x_hat - reference), beta1))
}

pub fn chen_control(
    obs: &BearingObservation,
    d_hat: f64,
    k_d: f64,
    k_phi: f64,
    beta2: f64,
    d_star: f64,
) -> Vec2 {
    obs.phi * (k_d * sig_pow(d_hat - d_star, beta2)) + obs.phi_perp * k_phi
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Deghat {
    pub k_est: f64,
    pub k_alpha: f64,
    pub k_beta: f64,
    pub d_star: f64,
}

impl GuidanceLaw for Deghat {
    fn label(&self) -> &'static str {
        "deghat"
    }
    fn d_star(&self) -> f64 {
        self.d_star
    }
    fn tangential_gain(&self) -> f64 {
        self.k_beta
    }
    fn evaluate(&self, ctx: &StageContext<'_>) -> LawOutput {
        let s = ctx.state;
        let dh = d_hat(&s.x_hat, &s.agent);
        LawOutput {
            u: deghat_control(ctx.obs, dh, self.k_alpha, self.k_beta, self.d_star),
            x_hat_rate: deghat_estimator_derivative(&s.x_hat, ctx.obs, &s.agent, self.k_est),
            range_rate: 0.0,
            diagnostics: Diagnostics::empty(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cao {
    pub k_e: f64,
    pub kappa_alpha: f64,
    pub kappa_beta: f64,
    pub d_star: f64,
}

impl GuidanceLaw for Cao {
    fn label(&self) -> &'static str {
        "cao"
    }
    fn d_star(&self) -> f64 {
        self.d_star
    }
    fn tangential_gain(&self) -> f64 {
        self.kappa_beta
    }

    /// The estimate is constrained to the bearing line, so the initial range
    /// estimate is the projection of the initial guess onto it.
    fn initialize(&self, state: &mut WorldState) {
        if let Ok(obs) = state.observe() {
            state.cao_rho = Some(obs.phi.dot(&(state.x_hat - state.agent)));
            self.synchronize(state);
        }
    }

    fn evaluate(&self, ctx: &StageContext<'_>) -> LawOutput {
        let s = ctx.state;
        let rho = s.cao_rho.unwrap_or(0.0);
        let u = cao_control(ctx.obs, rho, self.kappa_alpha, self.kappa_beta, self.d_star);
        let phi_dot = ctx.bearing_rate(&u);
        let rho_dot = cao_state_derivative(&CaoState { rho_hat: rho }, ctx.obs, &u, &phi_dot, self.k_e);
        LawOutput {
            u,
            x_hat_rate: u + ctx.obs.phi * rho_dot + phi_dot * rho,
            range_rate: rho_dot,
            diagnostics: Diagnostics::empty(),
        }
    }

    fn synchronize(&self, state: &mut WorldState) {
        if let (Some(rho), Ok(obs)) = (state.cao_rho, state.observe()) {
            state.x_hat = state.agent + obs.phi * rho;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chen {
    pub kappa_est: f64,
    pub k_d: f64,
    pub k_phi: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub d_star: f64,
    pub residual: ChenResidual,
}

impl GuidanceLaw for Chen {
    fn label(&self) -> &'static str {
        "chen"
    }
    fn d_star(&self) -> f64 {
        self.d_star
    }
    fn tangential_gain(&self) -> f64 {
        self.k_phi
    }
    fn evaluate(&self, ctx: &StageContext<'_>) -> LawOutput {
        let s = ctx.state;
        let dh = d_hat(&s.x_hat, &s.agent);
        LawOutput {
            u: chen_control(ctx.obs, dh, self.k_d, self.k_phi, self.beta2, self.d_star),
            x_hat_rate: chen_estimator_derivative(
                &s.x_hat,
                &s.regressors,
                &s.agent,
                self.kappa_est,
                self.beta1,
                self.residual,
            ),
            range_rate: 0.0,
            diagnostics: Diagnostics::empty(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::bearing;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn east() -> BearingObservation {
        bearing(&Vec2::new(1.0, 0.0), &Vec2::zeros()).unwrap()
    }

    #[test]
    fn deghat_estimator_cases() {
        let obs = east();
        let y = Vec2::zeros();
        assert_eq!(deghat_estimator_derivative(&y, &obs, &y, 5.0), Vec2::zeros());
        // x_hat - y along phi is annihilated by the projector
        assert_eq!(
            deghat_estimator_derivative(&Vec2::new(3.0, 0.0), &obs, &y, 5.0),
            Vec2::zeros()
        );
        assert_eq!(
            deghat_estimator_derivative(&Vec2::new(1.0, 1.0), &obs, &y, 5.0),
            Vec2::new(0.0, -5.0)
        );
    }

    #[test]
    fn deghat_control_cases() {
        let obs = east();
        assert_eq!(deghat_control(&obs, 2.0, 1.5, 5.0, 2.0), obs.phi_perp * 5.0);
        assert_eq!(deghat_control(&obs, 3.0, 1.5, 5.0, 2.0), Vec2::new(1.5, -5.0));
        let r1 = deghat_control(&obs, 2.5, 1.5, 5.0, 2.0).dot(&obs.phi);
        let r2 = deghat_control(&obs, 3.0, 1.5, 5.0, 2.0).dot(&obs.phi);
        assert_relative_eq!(r2, 2.0 * r1, epsilon = 1e-15);
    }

    #[test]
    fn cao_rate_cases() {
        let obs = east();
        let s = CaoState { rho_hat: 3.0 };
        assert_eq!(cao_state_derivative(&s, &obs, &Vec2::zeros(), &Vec2::zeros(), 5.0), 0.0);
        // pure approach at speed c shrinks the range estimate at c
        let c = 1.7;
        assert_relative_eq!(
            cao_state_derivative(&s, &obs, &(obs.phi * c), &Vec2::zeros(), 5.0),
            -c,
            epsilon = 1e-15
        );
    }

    #[test]
    fn cao_rate_vanishes_for_exact_range_on_orbit() {
        // stationary target, tangential motion: phi_dot = -(phi_perp . v / d) phi_perp
        let target = Vec2::new(2.0, 3.0);
        let agent = Vec2::new(4.0, 3.0);
        let obs = bearing(&target, &agent).unwrap();
        let v = obs.phi_perp * 5.0;
        let phi_dot = obs.rate(&v, &Vec2::zeros());
        assert_relative_eq!(phi_dot, -obs.phi_perp * (5.0 / 2.0), epsilon = 1e-15);
        let rate = cao_state_derivative(&CaoState { rho_hat: 2.0 }, &obs, &v, &phi_dot, 5.0);
        assert!(rate.abs() < 1e-14);
        // underestimate grows, overestimate shrinks
        assert!(cao_state_derivative(&CaoState { rho_hat: 1.0 }, &obs, &v, &phi_dot, 5.0) > 0.0);
        assert!(cao_state_derivative(&CaoState { rho_hat: 3.0 }, &obs, &v, &phi_dot, 5.0) < 0.0);
    }

    #[test]
    fn cao_control_cases() {
        let obs = east();
        assert_eq!(cao_control(&obs, 2.0, 1.5, 5.0, 2.0), obs.phi_perp * 5.0);
        assert_eq!(cao_control(&obs, 4.0, 1.5, 5.0, 2.0), Vec2::new(3.0, -5.0));
    }

    #[test]
    fn chen_estimator_cases() {
        let zero = RegressorState::default();
        assert_eq!(
            chen_estimator_derivative(&Vec2::new(5.0, 6.0), &zero, &Vec2::new(8.0, 9.0), 5.0, 0.5, ChenResidual::Q),
            Vec2::zeros()
        );
        let q = Vec2::new(1.0, 10.0);
        let ident = RegressorState::new(Mat2::identity(), q);
        let x_hat = q + Vec2::new(4.0, -9.0);
        assert_eq!(
            chen_estimator_derivative(&x_hat, &ident, &Vec2::zeros(), 5.0, 0.5, ChenResidual::Q),
            Vec2::new(-10.0, 15.0)
        );
        assert_eq!(
            chen_estimator_derivative(&q, &ident, &Vec2::zeros(), 5.0, 0.5, ChenResidual::Q),
            Vec2::zeros()
        );
        // y-mode compares against the agent position instead
        let y = Vec2::new(1.0, 1.0);
        assert_eq!(
            chen_estimator_derivative(&(y + Vec2::new(4.0, 9.0)), &ident, &y, 5.0, 0.5, ChenResidual::Y),
            Vec2::new(-10.0, -15.0)
        );
    }

    #[test]
    fn chen_control_cases() {
        let obs = east();
        assert_eq!(chen_control(&obs, 2.0, 1.5, 5.0, 0.5, 2.0), obs.phi_perp * 5.0);
        let u = chen_control(&obs, 3.0, 1.5, 5.0, 0.5, 2.0);
        assert_eq!(u, Vec2::new(1.5, -5.0));
        let up = chen_control(&obs, 2.0 + 0.3, 1.5, 5.0, 0.5, 2.0).dot(&obs.phi);
        let down = chen_control(&obs, 2.0 - 0.3, 1.5, 5.0, 0.5, 2.0).dot(&obs.phi);
        assert_relative_eq!(up, -down, epsilon = 1e-15);
    }

    #[test]
    fn default_gains_validate() {
        assert!(BaselineParams::default().validate().is_ok());
        let mut p = BaselineParams {
            beta1: 1.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        p.beta1 = 0.5;
        p.k_e = 0.0;
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn deghat_rate_orthogonal_to_bearing(
            th in -3.0..3.0f64, xx in -50.0..50.0f64, xy in -50.0..50.0f64,
            yx in -50.0..50.0f64, yy in -50.0..50.0f64, k in 0.1..10.0f64
        ) {
            let obs = bearing(&Vec2::new(th.cos(), th.sin()), &Vec2::zeros()).unwrap();
            let v = deghat_estimator_derivative(&Vec2::new(xx, xy), &obs, &Vec2::new(yx, yy), k);
            prop_assert!(v.dot(&obs.phi).abs() <= 1e-12 * (1.0 + v.norm()));
        }

        #[test]
        fn baseline_tangential_components_equal_gain(
            th in -3.0..3.0f64, dh in 0.0..20.0f64, kb in 0.1..10.0f64
        ) {
            let obs = bearing(&Vec2::new(th.cos(), th.sin()), &Vec2::zeros()).unwrap();
            for u in [
                deghat_control(&obs, dh, 1.5, kb, 2.0),
                cao_control(&obs, dh, 1.5, kb, 2.0),
                chen_control(&obs, dh, 1.5, kb, 0.5, 2.0),
            ] {
                prop_assert!((u.dot(&obs.phi_perp) - kb).abs() <= 1e-12 * (1.0 + u.norm()));
            }
        }
    }
}
