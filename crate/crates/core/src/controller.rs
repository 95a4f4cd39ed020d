//! Predefined-time circumnavigation law.
//!
//! The command splits into a radial term that drives the estimated range
//! error `d_hat - d*` to zero and a constant tangential term of speed
//! `k_omega = omega* d*`:
//!
//! ```text
//! u = exp(|e|^alpha2) / (alpha2 T_c2) sig^(1-alpha2)(e) phi + k_omega phi_perp,   e = d_hat - d*
//! ```

use crate::error::{Error, Result};
use crate::geometry::{sig_pow, BearingObservation, Vec2};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControllerParams {
    pub alpha2: f64,
    /// Strong predefined time `T_c,2` in seconds.
    pub t_c2: f64,
    d_star: f64,
    omega_star: f64,
    pub exp_arg_cap: f64,
}

impl ControllerParams {
    pub fn new(alpha2: f64, t_c2: f64, d_star: f64, omega_star: f64) -> Self {
        Self {
            alpha2,
            t_c2,
            d_star,
            omega_star,
            exp_arg_cap: 50.0,
        }
    }

    pub fn d_star(&self) -> f64 {
        self.d_star
    }

    pub fn omega_star(&self) -> f64 {
        self.omega_star
    }

    /// Tangential speed `omega* d*`.
    pub fn k_omega(&self) -> f64 {
        self.omega_star * self.d_star
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha2 > 0.0 && self.alpha2 <= 1.0) {
            return Err(Error::invalid(format!(
                "alpha2 = {} must lie in (0, 1]",
                self.alpha2
            )));
        }
        if !(self.t_c2 > 0.0 && self.t_c2.is_finite()) {
            return Err(Error::invalid(format!("t_c2 = {} must be > 0", self.t_c2)));
        }
        if !(self.d_star > 0.0 && self.d_star.is_finite()) {
            return Err(Error::invalid(format!(
                "desired radius d* = {} must be > 0",
                self.d_star
            )));
        }
        if !(self.omega_star > 0.0 && self.omega_star.is_finite()) {
            return Err(Error::invalid(format!(
                "desired angular velocity omega* = {} must be > 0",
                self.omega_star
            )));
        }
        if !(self.exp_arg_cap > 0.0) {
            return Err(Error::invalid("exp_arg_cap must be > 0"));
        }
        Ok(())
    }
}

/// Estimated range `|x_hat - y|`.
#[inline]
pub fn d_hat(x_hat: &Vec2, agent: &Vec2) -> f64 {
    (x_hat - agent).norm()
}

/// Velocity command. The flag reports whether the exponent was capped.
pub fn control(obs: &BearingObservation, d_hat: f64, params: &ControllerParams) -> (Vec2, bool) {
    let err = d_hat - params.d_star;
    let arg = err.abs().powf(params.alpha2);
    let saturated = arg > params.exp_arg_cap;
    let radial = if err == 0.0 {
        0.0
    } else {
        arg.min(params.exp_arg_cap).exp() / (params.alpha2 * params.t_c2)
            * sig_pow(err, 1.0 - params.alpha2)
    };
    (obs.phi * radial + obs.phi_perp * params.k_omega(), saturated)
}
