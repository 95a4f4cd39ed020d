//! Numerical check of the closed-form Lyapunov decay
//! `dV/dt = -1/(p T_c) V^(1-p) exp(V^p)`.

use super::{estimator_settling, finite_difference, median, MonitorConfig};
use crate::error::{Error, Result};
use crate::estimator::Diagnostics;
use crate::sim::Trajectory;

/// Exponents of `V1 = |x_tilde|^m` and `V2 = |delta|^n`, with `m p = alpha1`
/// and `n q_exp = alpha2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovExponents {
    pub m: f64,
    pub p: f64,
    pub n: f64,
    pub q_exp: f64,
}

impl LyapunovExponents {
    /// `m = n = 2`.
    pub fn quadratic(alpha1: f64, alpha2: f64) -> Self {
        Self {
            m: 2.0,
            p: alpha1 / 2.0,
            n: 2.0,
            q_exp: alpha2 / 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, e, p) in [("m", self.m, self.p), ("n", self.n, self.q_exp)] {
            if !(e >= 1.0 && p > 0.0 && p <= 1.0 / e) {
                return Err(Error::invalid(format!(
                    "Lyapunov exponent pair ({name}, {p}) needs {name} >= 1 and 0 < p <= 1/{name}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovPoint {
    pub t: f64,
    pub v: f64,
    pub rate_numeric: f64,
    pub rate_model: f64,
    /// `|rate_numeric - rate_model| / |rate_numeric|`.
    pub residual: f64,
    /// False when the difference stencil touches a regressor branch switch
    /// or the zero branch, where the closed form does not describe the motion.
    pub regular: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LyapunovReport {
    pub v1: Vec<LyapunovPoint>,
    pub v2: Vec<LyapunovPoint>,
    /// Estimator settling time used as the start of the `V2` window.
    pub v2_start: Option<f64>,
}

impl LyapunovReport {
    fn median_of(points: &[LyapunovPoint]) -> Option<f64> {
        let r: Vec<f64> = points.iter().filter(|p| p.regular).map(|p| p.residual).collect();
        median(&r)
    }

    pub fn median_v1(&self) -> Option<f64> {
        Self::median_of(&self.v1)
    }

    pub fn median_v2(&self) -> Option<f64> {
        Self::median_of(&self.v2)
    }
}

/// Residuals of a sampled `V` against the closed-form decay with exponent
/// `p` and time constant `t_c`, for samples with `V` inside `band`.
pub fn lyapunov_residuals(
    times: &[f64],
    v: &[f64],
    flags: &[Diagnostics],
    p: f64,
    t_c: f64,
    band: [f64; 2],
) -> Vec<LyapunovPoint> {
    let rates = finite_difference(times, v);
    let n = times.len();
    let irregular = |k: usize| {
        flags
            .get(k)
            .is_some_and(|f| f.intersects(Diagnostics::XI_ZERO_BRANCH | Diagnostics::BRANCH_SWITCH))
    };
    (0..n)
        .filter(|&k| v[k] >= band[0] && v[k] <= band[1])
        .map(|k| {
            let model = -(v[k].powf(1.0 - p) * v[k].powf(p).min(50.0).exp()) / (p * t_c);
            let lo = k.saturating_sub(1);
            let hi = (k + 1).min(n - 1);
            // a zero-branch sample marks a bad value; a switch on sample j
            // marks the interval (j-1, j]
            let regular = !(lo..=hi).any(|j| {
                irregular(j) && (j > lo || flags[j].contains(Diagnostics::XI_ZERO_BRANCH))
            });
            LyapunovPoint {
                t: times[k],
                v: v[k],
                rate_numeric: rates[k],
                rate_model: model,
                residual: (rates[k] - model).abs() / rates[k].abs(),
                regular,
            }
        })
        .collect()
}

/// `V1` over the whole run and `V2` after the measured estimator settling
/// time. Empty when the trajectory has no predefined-time constants or the
/// target moves.
pub fn lyapunov_decay_check(traj: &Trajectory, config: &MonitorConfig) -> LyapunovReport {
    let (Some(timing), Some(exp)) = (traj.meta.timing, config.exponents) else {
        return LyapunovReport::default();
    };
    if !traj.meta.stationary_target || traj.is_empty() {
        return LyapunovReport::default();
    }
    let band = config.checks.lyapunov_band;
    let times = traj.times();
    let flags = traj.series_flags();
    let v1: Vec<f64> = traj.series(|s| s.xtilde_norm.powf(exp.m));
    let v1_points = lyapunov_residuals(&times, &v1, &flags, exp.p, timing.t_c1, band);

    let start = estimator_settling(traj, config.checks.estimator_threshold_m)
        .ok()
        .flatten();
    let v2_points = match start {
        Some(t0) => {
            let k0 = traj.samples.partition_point(|s| s.t < t0);
            let v2: Vec<f64> = traj.samples[k0..]
                .iter()
                .map(|s| s.delta.abs().powf(exp.n))
                .collect();
            lyapunov_residuals(&times[k0..], &v2, &flags[k0..], exp.q_exp, timing.t_c2, band)
        }
        None => Vec::new(),
    };
    LyapunovReport {
        v1: v1_points,
        v2: v2_points,
        v2_start: start,
    }
}
