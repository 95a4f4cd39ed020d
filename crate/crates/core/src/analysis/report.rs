use std::f64::consts::PI;
use std::fmt::Write as _;

use super::{
    estimator_settling, lyapunov_decay_check, mean_theta_rate, pe_certificate, tracking_settling,
    MonitorConfig, PeWindowConfig,
};
use crate::estimator::Diagnostics;
use crate::sim::Trajectory;

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Pass,
    Fail,
    Skipped(String),
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped(_) => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckEntry {
    pub name: &'static str,
    pub claim: &'static str,
    pub measured: f64,
    pub limit: f64,
    /// True when `measured` must reach at least `limit` instead of staying
    /// below it.
    pub lower_bound: bool,
    pub verdict: Verdict,
}

impl CheckEntry {
    fn judged(name: &'static str, claim: &'static str, measured: f64, limit: f64, lower_bound: bool) -> Self {
        let ok = if lower_bound {
            measured >= limit
        } else {
            measured <= limit
        };
        Self {
            name,
            claim,
            measured,
            limit,
            lower_bound,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        }
    }

    fn skipped(name: &'static str, claim: &'static str, reason: impl Into<String>) -> Self {
        Self {
            name,
            claim,
            measured: f64::NAN,
            limit: f64::NAN,
            lower_bound: false,
            verdict: Verdict::Skipped(reason.into()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct InvariantReport {
    pub method: String,
    pub entries: Vec<CheckEntry>,
}

impl InvariantReport {
    /// Every enabled check passed.
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.verdict != Verdict::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "invariant report ({})", self.method);
        for e in &self.entries {
            match &e.verdict {
                Verdict::Skipped(why) => {
                    let _ = writeln!(out, "  {:<22} SKIP  {}", e.name, why);
                }
                v => {
                    let op = if e.lower_bound { ">=" } else { "<=" };
                    let _ = writeln!(
                        out,
                        "  {:<22} {:<5} {:.6e} {} {:.6e}  {}",
                        e.name,
                        if *v == Verdict::Pass { "PASS" } else { "FAIL" },
                        e.measured,
                        op,
                        e.limit,
                        e.claim
                    );
                }
            }
        }
        let _ = writeln!(out, "overall: {}", if self.all_passed() { "PASS" } else { "FAIL" });
        out
    }

    /// `name.field = value` lines.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "method = {}", self.method);
        let _ = writeln!(out, "overall = {}", if self.all_passed() { "pass" } else { "fail" });
        for e in &self.entries {
            let _ = writeln!(out, "{}.verdict = {}", e.name, e.verdict.as_str());
            if let Verdict::Skipped(why) = &e.verdict {
                let _ = writeln!(out, "{}.reason = {}", e.name, why);
            } else {
                let _ = writeln!(out, "{}.measured = {:e}", e.name, e.measured);
                let _ = writeln!(out, "{}.limit = {:e}", e.name, e.limit);
                let _ = writeln!(out, "{}.bound = {}", e.name, if e.lower_bound { "min" } else { "max" });
            }
        }
        out
    }
}

/// Run every applicable monitor on a trajectory.
///
/// A check that does not apply (moving target, a method without
/// predefined-time constants, missing regressor columns, a window beyond the
/// trajectory) is reported as skipped rather than failed.
pub fn invariant_report(traj: &Trajectory, config: &MonitorConfig) -> InvariantReport {
    let c = &config.checks;
    let meta = &traj.meta;
    let mut entries = Vec::new();
    let stationary = meta.stationary_target;
    const MOVING: &str = "target moves";
    const NO_TIMING: &str = "method has no predefined-time constants";

    if traj.is_empty() {
        return InvariantReport {
            method: meta.method.clone(),
            entries,
        };
    }

    let claim = "P x = q";
    entries.push(if !stationary {
        CheckEntry::skipped("regressor_consistency", claim, MOVING)
    } else if traj.samples.iter().any(|s| s.regressors.is_none()) {
        CheckEntry::skipped("regressor_consistency", claim, "regressors not recorded")
    } else {
        let worst = traj
            .samples
            .iter()
            .filter_map(|s| s.regressors.map(|(p, q)| (p * s.target - q).norm()))
            .fold(0.0, f64::max);
        CheckEntry::judged("regressor_consistency", claim, worst, c.consistency_tol_m, false)
    });

    let claim = "xi = x_tilde where P is invertible (relative to 1 + |x_hat|)";
    let solved: Vec<_> = traj
        .samples
        .iter()
        .filter(|s| !s.flags.contains(Diagnostics::XI_ZERO_BRANCH))
        .collect();
    entries.push(if !stationary {
        CheckEntry::skipped("xi_reconstruction", claim, MOVING)
    } else if solved.is_empty() {
        CheckEntry::skipped("xi_reconstruction", claim, "P never invertible")
    } else {
        let worst = solved
            .iter()
            .map(|s| (s.xi - s.xtilde()).norm() / (1.0 + s.x_hat.norm()))
            .fold(0.0, f64::max);
        CheckEntry::judged("xi_reconstruction", claim, worst, c.xi_tol, false)
    });

    let timing = meta.timing;
    let claim = "|x_tilde| non-increasing";
    entries.push(match (stationary, timing) {
        (false, _) => CheckEntry::skipped("estimate_monotone", claim, MOVING),
        (_, None) => CheckEntry::skipped("estimate_monotone", claim, NO_TIMING),
        _ => {
            let worst = traj
                .samples
                .windows(2)
                .map(|w| w[1].xtilde_norm - w[0].xtilde_norm)
                .fold(0.0, f64::max);
            CheckEntry::judged("estimate_monotone", claim, worst, c.monotonicity_tol_m, false)
        }
    });

    let claim = "d in [d_min, d_max] (excess outside the interval)";
    entries.push(match (stationary, timing, config.bounds, meta.d_star) {
        (false, ..) => CheckEntry::skipped("range_bounds", claim, MOVING),
        (_, None, ..) => CheckEntry::skipped("range_bounds", claim, NO_TIMING),
        (_, _, Some(b), Some(d_star)) => {
            let d0 = traj.samples[0].d;
            let d_max = b.d_max(d_star, d0);
            let worst = traj
                .samples
                .iter()
                .map(|s| (b.d_min - s.d).max(s.d - d_max))
                .fold(0.0, f64::max);
            CheckEntry::judged("range_bounds", claim, worst, 0.0, false)
        }
        _ => CheckEntry::skipped(
            "range_bounds",
            claim,
            "initial estimate error not below d* (Assumption 3 does not hold)",
        ),
    });

    let slack = c.settling_slack_steps * meta.dt;
    let claim = "estimate settling time <= T_c1 + slack";
    entries.push(match (stationary, timing) {
        (false, _) => CheckEntry::skipped("estimator_settling", claim, MOVING),
        (_, None) => CheckEntry::skipped("estimator_settling", claim, NO_TIMING),
        (_, Some(t)) => {
            let ts = estimator_settling(traj, c.estimator_threshold_m)
                .ok()
                .flatten()
                .unwrap_or(f64::INFINITY);
            CheckEntry::judged("estimator_settling", claim, ts, t.t_c1 + slack, false)
        }
    });

    let claim = "tracking settling time <= T_c2 + slack";
    entries.push(match (stationary, timing) {
        (false, _) => CheckEntry::skipped("tracking_settling", claim, MOVING),
        (_, None) => CheckEntry::skipped("tracking_settling", claim, NO_TIMING),
        (_, Some(t)) => {
            let ts = tracking_settling(traj, c.tracking_threshold_m)
                .ok()
                .flatten()
                .unwrap_or(f64::INFINITY);
            CheckEntry::judged("tracking_settling", claim, ts, t.t_c2 + slack, false)
        }
    });

    let claim = "mean theta rate equals omega* (relative error)";
    entries.push(match (stationary, timing, meta.omega_star()) {
        (false, ..) => CheckEntry::skipped("angular_rate", claim, MOVING),
        (_, None, _) => CheckEntry::skipped("angular_rate", claim, NO_TIMING),
        (_, _, None) => CheckEntry::skipped("angular_rate", claim, "omega* unknown"),
        (_, _, Some(w)) => match mean_theta_rate(traj, c.theta_window_s) {
            Some(rate) => {
                CheckEntry::judged("angular_rate", claim, (rate - w).abs() / w.abs(), c.theta_rel_tol, false)
            }
            None => CheckEntry::skipped("angular_rate", claim, "trajectory shorter than the window"),
        },
    });

    let claim = "lambda_min of the bearing gramian over the final orbital period";
    entries.push(match meta.omega_star() {
        Some(w) if w.abs() > 0.0 => {
            let window = 2.0 * PI / w.abs();
            let last = traj.samples[traj.len() - 1].t;
            let cfg = PeWindowConfig {
                t0: last - window,
                window,
                mu_threshold: c.pe_mu,
            };
            match pe_certificate(traj, &cfg) {
                Ok(cert) => CheckEntry::judged("excitation", claim, cert.lambda_min, c.pe_mu, true),
                Err(_) => CheckEntry::skipped("excitation", claim, "trajectory shorter than one period"),
            }
        }
        _ => CheckEntry::skipped("excitation", claim, "omega* unknown"),
    });

    let lyap = lyapunov_decay_check(traj, config);
    for (name, claim, med) in [
        ("lyapunov_v1", "median relative residual of the V1 decay form", lyap.median_v1()),
        ("lyapunov_v2", "median relative residual of the V2 decay form", lyap.median_v2()),
    ] {
        entries.push(match (stationary, timing, med) {
            (false, ..) => CheckEntry::skipped(name, claim, MOVING),
            (_, None, _) => CheckEntry::skipped(name, claim, NO_TIMING),
            (_, _, None) => CheckEntry::skipped(name, claim, "no regular samples in band"),
            (_, _, Some(m)) => CheckEntry::judged(name, claim, m, c.lyapunov_rel_tol, false),
        });
    }

    InvariantReport {
        method: meta.method.clone(),
        entries,
    }
}
