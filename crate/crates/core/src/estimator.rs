//! Predefined-time target estimator driven by Kreisselmeier regressors.
//!
//! The regressor pair `(P, q)` filters bearing outer products:
//!
//! ```text
//! dP/dt = -P + phi_perp phi_perp^T
//! dq/dt = -q + phi_perp phi_perp^T y
//! ```
//!
//! For a stationary target `P x = q` at all times, so the reconstructed error
//! `xi = P^-1 (P x_hat - q)` equals the true estimation error once `P` is
//! invertible. The estimate then follows
//!
//! ```text
//! dx_hat/dt = -1/(alpha1 T_c1) exp(|xi|^alpha1) psi^alpha1(xi)
//! ```
//!
//! which reaches `xi = 0` no later than `T_c1` from any initial condition.

use bitflags::bitflags;

use crate::error::{Error, Result};
use crate::geometry::{psi_pow, singular_values, BearingObservation, Mat2, Vec2};

bitflags! {
    /// Per-evaluation diagnostics carried into the trajectory record.
    #[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
    pub struct Diagnostics: u32 {
        /// `P` was too ill-conditioned to invert; the zero branch was used for `xi`.
        const XI_ZERO_BRANCH = 1;
        /// The estimator exponent hit `exp_arg_cap`.
        const ESTIMATOR_SATURATED = 1 << 1;
        /// The controller exponent hit `exp_arg_cap`.
        const CONTROL_SATURATED = 1 << 2;
        /// The step ending at this sample was split at a regressor branch switch.
        const BRANCH_SWITCH = 1 << 3;
    }
}

/// Kreisselmeier regressor pair with conditioning diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegressorState {
    p: Mat2,
    q: Vec2,
    det: f64,
    sigma_min: f64,
}

impl Default for RegressorState {
    fn default() -> Self {
        Self::new(Mat2::zeros(), Vec2::zeros())
    }
}

impl RegressorState {
    pub fn new(p: Mat2, q: Vec2) -> Self {
        let (_, sigma_min) = singular_values(&p);
        Self {
            p,
            q,
            det: p.determinant(),
            sigma_min,
        }
    }

    pub fn p(&self) -> &Mat2 {
        &self.p
    }

    pub fn q(&self) -> &Vec2 {
        &self.q
    }

    /// `det P`.
    pub fn det(&self) -> f64 {
        self.det
    }

    /// Smallest singular value of `P`.
    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    /// `|P x - q|`; zero along any stationary-target trajectory.
    pub fn consistency_residual(&self, target: &Vec2) -> f64 {
        (self.p * target - self.q).norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorParams {
    pub alpha1: f64,
    /// Strong predefined time `T_c,1` in seconds.
    pub t_c1: f64,
    /// Minimum `sigma_min(P)` for which `P` is inverted.
    pub singularity_threshold: f64,
    pub exp_arg_cap: f64,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            alpha1: 0.5,
            t_c1: 0.2,
            singularity_threshold: 1e-8,
            exp_arg_cap: 50.0,
        }
    }
}

impl EstimatorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha1 > 0.0 && self.alpha1 <= 1.0) {
            return Err(Error::invalid(format!(
                "alpha1 = {} must lie in (0, 1]",
                self.alpha1
            )));
        }
        if !(self.t_c1 > 0.0 && self.t_c1.is_finite()) {
            return Err(Error::invalid(format!("t_c1 = {} must be > 0", self.t_c1)));
        }
        if !(self.singularity_threshold > 0.0) {
            return Err(Error::invalid("singularity_threshold must be > 0"));
        }
        if !(self.exp_arg_cap > 0.0) {
            return Err(Error::invalid("exp_arg_cap must be > 0"));
        }
        Ok(())
    }
}

/// Which formula produces `xi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XiBranch {
    /// `xi = P^-1 (P x_hat - q)`.
    Solve,
    /// `P` is (numerically) singular, `xi = 0`.
    Zero,
}

impl XiBranch {
    pub fn select(state: &RegressorState, threshold: f64) -> Self {
        if state.sigma_min >= threshold {
            XiBranch::Solve
        } else {
            XiBranch::Zero
        }
    }
}

/// Right-hand side of the regressor filters, returned as `(dP, dq)`.
pub fn regressor_derivative(
    state: &RegressorState,
    obs: &BearingObservation,
    agent: &Vec2,
) -> (Mat2, Vec2) {
    let outer = obs.phi_perp * obs.phi_perp.transpose();
    (outer - state.p, outer * agent - state.q)
}

/// Reconstructed estimation error, choosing the branch from `sigma_min(P)`.
pub fn reconstruct_xi(state: &RegressorState, x_hat: &Vec2, params: &EstimatorParams) -> Vec2 {
    reconstruct_xi_with(
        state,
        x_hat,
        XiBranch::select(state, params.singularity_threshold),
    )
}

/// Reconstructed estimation error on an explicitly chosen branch.
pub fn reconstruct_xi_with(state: &RegressorState, x_hat: &Vec2, branch: XiBranch) -> Vec2 {
    match branch {
        XiBranch::Zero => Vec2::zeros(),
        XiBranch::Solve => {
            let p = &state.p;
            let r = p * x_hat - state.q;
            let det = state.det;
            // adjugate solve
            Vec2::new(
                (p[(1, 1)] * r.x - p[(0, 1)] * r.y) / det,
                (p[(0, 0)] * r.y - p[(1, 0)] * r.x) / det,
            )
        }
    }
}

/// Estimate velocity for a given reconstructed error. The flag is set when
/// the exponent had to be capped.
pub fn estimator_derivative(xi: &Vec2, params: &EstimatorParams) -> (Vec2, bool) {
    let n = xi.norm();
    if n == 0.0 {
        return (Vec2::zeros(), false);
    }
    let arg = n.powf(params.alpha1);
    let saturated = arg > params.exp_arg_cap;
    let gain = arg.min(params.exp_arg_cap).exp() / (params.alpha1 * params.t_c1);
    (-gain * psi_pow(xi, params.alpha1), saturated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::bearing;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn obs_with_perp(phi_perp: Vec2) -> BearingObservation {
        // phi_perp = (phi.y, -phi.x)  =>  phi = (-phi_perp.y, phi_perp.x)
        let phi = Vec2::new(-phi_perp.y, phi_perp.x);
        BearingObservation {
            phi,
            phi_perp,
            theta: phi.y.atan2(phi.x),
            distance: 1.0,
        }
    }

    #[test]
    fn regressor_rate_at_initial_conditions() {
        let obs = obs_with_perp(Vec2::new(0.0, -1.0));
        let (dp, dq) = regressor_derivative(&RegressorState::default(), &obs, &Vec2::new(8.0, 9.0));
        assert_eq!(dp, Mat2::new(0.0, 0.0, 0.0, 1.0));
        assert_eq!(dq, Vec2::new(0.0, 9.0));
    }

    #[test]
    fn regressor_rate_from_identity() {
        let obs = obs_with_perp(Vec2::new(1.0, 0.0));
        let state = RegressorState::new(Mat2::identity(), Vec2::new(3.0, -1.0));
        let (dp, _) = regressor_derivative(&state, &obs, &Vec2::zeros());
        assert_eq!(dp, Mat2::new(0.0, 0.0, 0.0, -1.0));
    }

    #[test]
    fn regressor_fixed_point_under_constant_bearing() {
        let v = Vec2::new(0.6, -0.8);
        let obs = obs_with_perp(v);
        let q = Vec2::new(1.5, 2.5);
        let state = RegressorState::new(v * v.transpose(), q);
        let (dp, dq) = regressor_derivative(&state, &obs, &Vec2::zeros());
        assert_relative_eq!(dp, Mat2::zeros(), epsilon = 1e-15);
        assert_eq!(dq, -q);
    }

    #[test]
    fn xi_with_identity_regressor() {
        let state = RegressorState::new(Mat2::identity(), Vec2::new(2.0, 3.0));
        let xi = reconstruct_xi(&state, &Vec2::new(5.0, 6.0), &EstimatorParams::default());
        assert_eq!(xi, Vec2::new(3.0, 3.0));
    }

    #[test]
    fn xi_is_zero_at_start() {
        let state = RegressorState::default();
        let xi = reconstruct_xi(&state, &Vec2::new(5.0, 6.0), &EstimatorParams::default());
        assert_eq!(xi, Vec2::zeros());
        assert_eq!(XiBranch::select(&state, 1e-8), XiBranch::Zero);
    }

    #[test]
    fn xi_zero_branch_for_rank_one_regressor() {
        let v = Vec2::new(0.6, 0.8);
        let state = RegressorState::new(v * v.transpose(), Vec2::new(1.0, 1.0));
        assert!(state.sigma_min() < 1e-15);
        assert_eq!(
            reconstruct_xi(&state, &Vec2::new(4.0, 4.0), &EstimatorParams::default()),
            Vec2::zeros()
        );
    }

    #[test]
    fn xi_recovers_error_for_consistent_regressor() {
        // q built so that P x = q holds for x below
        let x = Vec2::new(2.0, 3.0);
        let p = Mat2::new(0.7, 0.1, 0.1, 0.3);
        let state = RegressorState::new(p, p * x);
        let x_hat = Vec2::new(-4.0, 11.0);
        let xi = reconstruct_xi(&state, &x_hat, &EstimatorParams::default());
        assert_relative_eq!(xi, x_hat - x, epsilon = 1e-13);
    }

    #[test]
    fn estimator_rate_zero_at_origin() {
        let (v, sat) = estimator_derivative(&Vec2::zeros(), &EstimatorParams::default());
        assert_eq!(v, Vec2::zeros());
        assert!(!sat);
    }

    #[test]
    fn estimator_rate_unit_error() {
        let params = EstimatorParams {
            alpha1: 0.5,
            t_c1: 0.2,
            ..Default::default()
        };
        let (v, _) = estimator_derivative(&Vec2::new(1.0, 0.0), &params);
        assert_relative_eq!(v.x, -10.0 * std::f64::consts::E, epsilon = 1e-12);
        assert_relative_eq!(v.x, -27.1828, epsilon = 1e-4);
        assert_eq!(v.y, 0.0);
    }

    #[test]
    fn estimator_rate_linear_exponent() {
        let params = EstimatorParams {
            alpha1: 1.0,
            t_c1: 1.0,
            ..Default::default()
        };
        let (v, _) = estimator_derivative(&Vec2::new(3.0, 4.0), &params);
        let e5 = 5.0_f64.exp();
        assert_relative_eq!(v, Vec2::new(-0.6 * e5, -0.8 * e5), epsilon = 1e-10);
        assert_relative_eq!(v, Vec2::new(-89.0479, -118.7305), epsilon = 1e-4);
    }

    #[test]
    fn estimator_cap_engages_and_flags() {
        let params = EstimatorParams {
            alpha1: 1.0,
            t_c1: 1.0,
            exp_arg_cap: 50.0,
            ..Default::default()
        };
        let (v, sat) = estimator_derivative(&Vec2::new(1e3, 0.0), &params);
        assert!(sat);
        assert!(v.x.is_finite());
        assert_relative_eq!(v.x, -(50.0_f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = EstimatorParams {
            alpha1: 1.5,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        p.alpha1 = 0.0;
        assert!(p.validate().is_err());
        p.alpha1 = 1.0;
        assert!(p.validate().is_ok());
        p.t_c1 = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn consistency_residual_uses_target() {
        let target = Vec2::new(2.0, 3.0);
        let obs = bearing(&target, &Vec2::new(8.0, 9.0)).unwrap();
        let (dp, dq) = regressor_derivative(&RegressorState::default(), &obs, &Vec2::new(8.0, 9.0));
        // one Euler step from zero keeps P x = q exactly up to rounding
        let state = RegressorState::new(dp * 1e-3, dq * 1e-3);
        assert!(state.consistency_residual(&target) < 1e-15);
    }

    proptest! {
        #[test]
        fn estimator_rate_antiparallel(x in -1e2..1e2f64, y in -1e2..1e2f64, alpha in 0.05..=1.0f64, tc in 0.01..10.0f64) {
            let xi = Vec2::new(x, y);
            prop_assume!(xi.norm() > 1e-9);
            let params = EstimatorParams { alpha1: alpha, t_c1: tc, ..Default::default() };
            let (v, _) = estimator_derivative(&xi, &params);
            let cos = v.dot(&xi) / (v.norm() * xi.norm());
            prop_assert!((cos + 1.0).abs() < 1e-12);
        }

        #[test]
        fn estimator_rate_magnitude(x in -10.0..10.0f64, y in -10.0..10.0f64, alpha in 0.05..=1.0f64) {
            let xi = Vec2::new(x, y);
            prop_assume!(xi.norm() > 1e-9);
            let params = EstimatorParams { alpha1: alpha, t_c1: 0.3, ..Default::default() };
            let (v, _) = estimator_derivative(&xi, &params);
            let n = xi.norm();
            let expect = n.powf(alpha).exp() * n.powf(1.0 - alpha) / (alpha * 0.3);
            prop_assert!((v.norm() - expect).abs() <= 1e-12 * expect);
        }
    }
}
