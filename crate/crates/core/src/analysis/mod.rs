//! Post-hoc checks on recorded trajectories and benchmark metrics.

mod lyapunov;
mod report;

pub use lyapunov::{
    lyapunov_decay_check, lyapunov_residuals, LyapunovExponents, LyapunovPoint, LyapunovReport,
};
pub use report::{invariant_report, CheckEntry, InvariantReport, Verdict};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sym_min_eigenvalue, unwrap_angles, Mat2, Vec2};
use crate::sim::Trajectory;

/// Tolerances and windows for every check. All of them are scenario
/// configuration (`[checks]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub consistency_tol_m: f64,
    /// Relative to `1 + |x_hat|`.
    pub xi_tol: f64,
    pub monotonicity_tol_m: f64,
    pub estimator_threshold_m: f64,
    pub tracking_threshold_m: f64,
    /// Slack on the settling bounds, in integrator steps.
    pub settling_slack_steps: f64,
    pub theta_window_s: [f64; 2],
    pub theta_rel_tol: f64,
    pub pe_mu: f64,
    pub lyapunov_band: [f64; 2],
    pub lyapunov_rel_tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            consistency_tol_m: 1e-6,
            xi_tol: 1e-6,
            monotonicity_tol_m: 1e-9,
            estimator_threshold_m: 1e-3,
            tracking_threshold_m: 1e-2,
            settling_slack_steps: 2.0,
            theta_window_s: [1.0, 5.0],
            theta_rel_tol: 0.01,
            pe_mu: 0.1,
            lyapunov_band: [1e-6, 1e2],
            lyapunov_rel_tol: 0.01,
        }
    }
}

impl CheckConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("consistency_tol_m", self.consistency_tol_m),
            ("xi_tol", self.xi_tol),
            ("monotonicity_tol_m", self.monotonicity_tol_m),
            ("estimator_threshold_m", self.estimator_threshold_m),
            ("tracking_threshold_m", self.tracking_threshold_m),
            ("theta_rel_tol", self.theta_rel_tol),
            ("pe_mu", self.pe_mu),
            ("lyapunov_rel_tol", self.lyapunov_rel_tol),
        ];
        for (name, x) in positive {
            if !(x > 0.0) {
                return Err(Error::invalid(format!("[checks] {name} must be > 0")));
            }
        }
        if !(self.settling_slack_steps >= 0.0) {
            return Err(Error::invalid("[checks] settling_slack_steps must be >= 0"));
        }
        let [a, b] = self.theta_window_s;
        if !(b > a && a >= 0.0) {
            return Err(Error::invalid("[checks] theta_window_s must be an increasing pair"));
        }
        let [lo, hi] = self.lyapunov_band;
        if !(hi > lo && lo > 0.0) {
            return Err(Error::invalid("[checks] lyapunov_band must be an increasing positive pair"));
        }
        Ok(())
    }
}

/// Constants of the range bounds, ordered `0 < d_varpi < d_min < d_s < eta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceBounds {
    pub eta: f64,
    pub d_s: f64,
    pub d_min: f64,
    pub d_varpi: f64,
}

impl DistanceBounds {
    /// Default constants when the initial estimate lies inside the desired
    /// orbit, `eta = d* - |x_tilde(0)| > 0`. `None` otherwise.
    pub fn for_initial_error(d_star: f64, xtilde0: f64) -> Option<Self> {
        let eta = d_star - xtilde0;
        if !(eta > 0.0) {
            return None;
        }
        let d_s = 0.9 * eta;
        let d_min = 0.5 * d_s;
        Some(Self {
            eta,
            d_s,
            d_min,
            d_varpi: 0.5 * d_min,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if 0.0 < self.d_varpi && self.d_varpi < self.d_min && self.d_min < self.d_s && self.d_s < self.eta {
            Ok(())
        } else {
            Err(Error::invalid("range bounds need 0 < d_varpi < d_min < d_s < eta"))
        }
    }

    pub fn d_max(&self, d_star: f64, d0: f64) -> f64 {
        (2.0 * d_star - self.d_s).max(d0) + self.d_varpi
    }
}

/// Inputs of the invariant monitors.
#[derive(Clone, Debug, PartialEq)]
pub struct MonitorConfig {
    /// Present only when the initial estimate is inside the orbit.
    pub bounds: Option<DistanceBounds>,
    pub exponents: Option<LyapunovExponents>,
    pub checks: CheckConfig,
}

impl MonitorConfig {
    /// Defaults derived from the trajectory's metadata and first sample.
    pub fn for_trajectory(traj: &Trajectory, checks: CheckConfig) -> Self {
        let bounds = match (traj.meta.d_star, traj.first()) {
            (Some(d_star), Some(s0)) => DistanceBounds::for_initial_error(d_star, s0.xtilde_norm),
            _ => None,
        };
        let exponents = traj
            .meta
            .timing
            .map(|t| LyapunovExponents::quadratic(t.alpha1, t.alpha2));
        Self {
            bounds,
            exponents,
            checks,
        }
    }
}

/// First time from which `|value| <= threshold` holds for the rest of the
/// series. `None` if the last sample is outside the band.
pub fn settling_time(times: &[f64], values: &[f64], threshold: f64) -> Result<Option<f64>> {
    if times.is_empty() || values.is_empty() {
        return Err(Error::EmptySeries);
    }
    let n = times.len().min(values.len());
    let mut first_inside = None;
    for k in (0..n).rev() {
        if values[k].abs() <= threshold {
            first_inside = Some(k);
        } else {
            break;
        }
    }
    Ok(first_inside.map(|k| times[k]))
}

/// Estimate-error settling time on a trajectory.
pub fn estimator_settling(traj: &Trajectory, threshold: f64) -> Result<Option<f64>> {
    settling_time(&traj.times(), &traj.series(|s| s.xtilde_norm), threshold)
}

/// Tracking-error settling time on a trajectory.
pub fn tracking_settling(traj: &Trajectory, threshold: f64) -> Result<Option<f64>> {
    settling_time(&traj.times(), &traj.series(|s| s.delta), threshold)
}

/// Central differences inside, one-sided at both ends.
pub fn finite_difference(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len().min(values.len());
    (0..n)
        .map(|k| match (k, n) {
            (_, 0 | 1) => 0.0,
            (0, _) => (values[1] - values[0]) / (times[1] - times[0]),
            (k, n) if k == n - 1 => (values[k] - values[k - 1]) / (times[k] - times[k - 1]),
            (k, _) => (values[k + 1] - values[k - 1]) / (times[k + 1] - times[k - 1]),
        })
        .collect()
}

/// Bearing rate from the unwrapped bearing angle.
pub fn theta_rate(traj: &Trajectory) -> Vec<f64> {
    let theta = unwrap_angles(&traj.series(|s| s.theta));
    finite_difference(&traj.times(), &theta)
}

/// Mean bearing rate over `[t0, t1]`, or `None` when the trajectory does not
/// cover the window.
pub fn mean_theta_rate(traj: &Trajectory, window: [f64; 2]) -> Option<f64> {
    let last = traj.last()?.t;
    let eps = 1e-9 * last.max(1.0);
    if window[1] > last + eps || window[0] < traj.first()?.t - eps {
        return None;
    }
    let rates = theta_rate(traj);
    let picked: Vec<f64> = traj
        .samples
        .iter()
        .zip(&rates)
        .filter(|(s, _)| s.t >= window[0] - eps && s.t <= window[1] + eps)
        .map(|(_, r)| *r)
        .collect();
    if picked.is_empty() {
        None
    } else {
        Some(picked.iter().sum::<f64>() / picked.len() as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeWindowConfig {
    pub t0: f64,
    /// Window length `T` in seconds.
    pub window: f64,
    pub mu_threshold: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeCertificate {
    /// Windowed integral of `phi_perp phi_perp^T`.
    pub gramian: Mat2,
    pub lambda_min: f64,
    pub exciting: bool,
}

/// Excitation level of the bearing over a window.
///
/// The window may start and end between samples; the integrand is then
/// linearly interpolated at the window edges.
pub fn pe_certificate(traj: &Trajectory, config: &PeWindowConfig) -> Result<PeCertificate> {
    let (first, last) = match (traj.first(), traj.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(Error::EmptySeries),
    };
    let (start, end) = (config.t0, config.t0 + config.window);
    let eps = 1e-9 * last.abs().max(1.0);
    if !(config.window > 0.0) || start < first - eps || end > last + eps {
        return Err(Error::WindowOutOfRange {
            start,
            end,
            first,
            last,
        });
    }
    let outer = |v: Vec2| v * v.transpose();
    let value_at = |t: f64| -> Mat2 {
        let k = traj.samples.partition_point(|s| s.t < t);
        if k == 0 {
            return outer(traj.samples[0].phi_perp());
        }
        if k >= traj.len() {
            return outer(traj.samples[traj.len() - 1].phi_perp());
        }
        let (a, b) = (&traj.samples[k - 1], &traj.samples[k]);
        let w = (t - a.t) / (b.t - a.t);
        outer(a.phi_perp()) * (1.0 - w) + outer(b.phi_perp()) * w
    };
    let mut nodes: Vec<(f64, Mat2)> = vec![(start, value_at(start))];
    for s in &traj.samples {
        if s.t > start + eps && s.t < end - eps {
            nodes.push((s.t, outer(s.phi_perp())));
        }
    }
    nodes.push((end, value_at(end)));
    let gramian = nodes
        .windows(2)
        .map(|w| (w[0].1 + w[1].1) * (0.5 * (w[1].0 - w[0].0)))
        .fold(Mat2::zeros(), |acc, m| acc + m);
    let lambda_min = sym_min_eigenvalue(&gramian);
    Ok(PeCertificate {
        gramian,
        lambda_min,
        exciting: lambda_min >= config.mu_threshold,
    })
}

/// Rate of the angle from `nu` to `phi_perp`, by finite differences.
pub fn gamma_rate(traj: &Trajectory, nu: &Vec2) -> Vec<f64> {
    let gamma: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| {
            let b = s.phi_perp();
            (nu.x * b.y - nu.y * b.x).atan2(nu.dot(&b))
        })
        .collect();
    finite_difference(&traj.times(), &unwrap_angles(&gamma))
}

/// Per-sample `|gamma_dot - k_omega / d|`.
pub fn gamma_rate_check(traj: &Trajectory, nu: &Vec2) -> Vec<f64> {
    let k = traj.meta.tangential_gain.unwrap_or(f64::NAN);
    gamma_rate(traj, nu)
        .iter()
        .zip(&traj.samples)
        .map(|(g, s)| (g - k / s.d).abs())
        .collect()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        // ties share the mean rank
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = mean;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation; `None` for fewer than two points or a
/// constant input.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let (rx, ry) = (ranks(&x[..n]), ranks(&y[..n]));
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let (a, b) = (rx[k] - mean, ry[k] - mean);
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn settling_of_zero_series() {
        let t = [0.0, 0.1, 0.2];
        assert_eq!(settling_time(&t, &[0.0; 3], 1e-3).unwrap(), Some(0.0));
    }

    #[test]
    fn settling_uses_suffix_not_first_crossing() {
        let t: Vec<f64> = (0..8).map(|k| k as f64 * 0.1).collect();
        let v = [1.0, 0.5, 0.01, 0.02, 0.001, 0.0005, 0.0002, 0.0001];
        assert_eq!(settling_time(&t, &v, 1e-3).unwrap(), Some(t[4]));
        // a late excursion resets the clock
        let w = [1e-4, 1e-4, 1e-4, 1e-2, 1e-4, 1e-4, 1e-4, 1e-4];
        assert_eq!(settling_time(&t, &w, 1e-3).unwrap(), Some(t[4]));
    }

    #[test]
    fn settling_never_reached() {
        let t = [0.0, 1.0, 2.0];
        assert_eq!(settling_time(&t, &[3.0, 2.0, 1.0], 0.5).unwrap(), None);
        assert!(matches!(settling_time(&[], &[], 1.0), Err(Error::EmptySeries)));
    }

    #[test]
    fn spearman_cases() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 35.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0], &[1.0]), None);
        assert_eq!(spearman(&[1.0, 2.0], &[5.0, 5.0]), None);
        // 1 - 6 * 2 / (4 * 15)
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-15);
    }

    #[test]
    fn finite_difference_of_quadratic() {
        let t: Vec<f64> = (0..11).map(|k| k as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().map(|t| t * t).collect();
        let d = finite_difference(&t, &v);
        for k in 1..10 {
            assert!((d[k] - 2.0 * t[k]).abs() < 1e-12);
        }
        assert!((d[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn default_bounds_are_ordered() {
        let b = DistanceBounds::for_initial_error(2.0, 0.5).unwrap();
        b.validate().unwrap();
        assert!((b.d_s - 1.35).abs() < 1e-15);
        assert!((b.d_max(2.0, 18f64.sqrt()) - (18f64.sqrt() + 0.3375)).abs() < 1e-12);
        assert!(DistanceBounds::for_initial_error(2.0, 18f64.sqrt()).is_none());
    }

    proptest! {
        #[test]
        fn settling_monotone_in_threshold(
            v in proptest::collection::vec(0.0..1.0f64, 1..60),
            a in 0.0..1.0f64, b in 0.0..1.0f64
        ) {
            let t: Vec<f64> = (0..v.len()).map(|k| k as f64).collect();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let s_lo = settling_time(&t, &v, lo).unwrap();
            let s_hi = settling_time(&t, &v, hi).unwrap();
            match (s_lo, s_hi) {
                (Some(x), Some(y)) => prop_assert!(y <= x),
                (Some(_), None) => prop_assert!(false),
                _ => {}
            }
        }

        #[test]
        fn settling_matches_brute_force(v in proptest::collection::vec(0.0..1.0f64, 1..40), th in 0.0..1.0f64) {
            let t: Vec<f64> = (0..v.len()).map(|k| k as f64).collect();
            let brute = (0..v.len()).find(|&k| v[k..].iter().all(|x| x.abs() <= th)).map(|k| t[k]);
            prop_assert_eq!(settling_time(&t, &v, th).unwrap(), brute);
        }
    }
}
