mod support;

use std::f64::consts::PI;

use botlc::analysis::{
    gamma_rate, gamma_rate_check, invariant_report, pe_certificate, CheckConfig, MonitorConfig, PeWindowConfig, Verdict,
};
use botlc::estimator::Diagnostics;
use botlc::geometry::{Mat2, Vec2};
use botlc::sim::{simulate, IntegratorConfig, Sample, TargetMotion, Trajectory, TrajectoryMeta, WorldState};
use proptest::prelude::*;
use support::{v, FrozenEstimate, Still};

/// Samples with the agent at `agent(t)` around a target at the origin.
fn synthetic(times: &[f64], agent: impl Fn(f64) -> Vec2) -> Trajectory {
    let target = Vec2::zeros();
    let samples = times
        .iter()
        .map(|&t| {
            let y = agent(t);
            let d = (target - y).norm();
            Sample {
                t,
                agent: y,
                target,
                x_hat: target,
                xi: Vec2::zeros(),
                d,
                d_hat: d,
                delta: 0.0,
                varrho: 0.0,
                xtilde_norm: 0.0,
                u: Vec2::zeros(),
                theta: (target - y).y.atan2((target - y).x),
                flags: Diagnostics::empty(),
                regressors: None,
            }
        })
        .collect();
    Trajectory {
        meta: TrajectoryMeta::default(),
        samples,
        abort: None,
    }
}

fn grid(n: usize, t_end: f64) -> Vec<f64> {
    (0..=n).map(|k| k as f64 * t_end / n as f64).collect()
}

fn window(t0: f64, w: f64) -> PeWindowConfig {
    PeWindowConfig {
        t0,
        window: w,
        mu_threshold: 0.1,
    }
}

#[test]
fn full_revolution_gramian_is_half_the_period() {
    let period = 2.0;
    let traj = synthetic(&grid(4000, period), |t| {
        let a = 2.0 * PI * t / period;
        v(3.0 * a.cos(), 3.0 * a.sin())
    });
    let cert = pe_certificate(&traj, &window(0.0, period)).unwrap();
    assert!((cert.gramian - Mat2::identity() * (period / 2.0)).norm() < 1e-6);
    assert!((cert.lambda_min - period / 2.0).abs() < 1e-6);
    assert!(cert.exciting);
}

#[test]
fn constant_bearing_has_no_excitation() {
    let traj = synthetic(&grid(100, 1.0), |t| v(3.0 + t, 1.5 + 0.5 * t));
    let cert = pe_certificate(&traj, &window(0.0, 1.0)).unwrap();
    assert!(cert.lambda_min.abs() < 1e-12);
    assert!(!cert.exciting);
}

#[test]
fn window_outside_trajectory_is_rejected() {
    let traj = synthetic(&grid(10, 1.0), |t| v(1.0 + t, 1.0));
    assert!(pe_certificate(&traj, &window(0.5, 1.0)).is_err());
}

proptest! {
    #[test]
    fn excitation_is_rotation_invariant(rot in -3.0..3.0f64, phase in -3.0..3.0f64, radius in 0.5..5.0f64, t0 in 0.0..0.5f64) {
        let r = nalgebra::Rotation2::new(rot);
        let path = |t: f64| v(radius * (phase + 2.0 * t).cos(), 0.5 * radius * (phase + 2.0 * t).sin());
        let times = grid(600, 1.5);
        let a = synthetic(&times, path);
        let b = synthetic(&times, |t| r * path(t));
        let ca = pe_certificate(&a, &window(t0, 1.0)).unwrap();
        let cb = pe_certificate(&b, &window(t0, 1.0)).unwrap();
        prop_assert!((ca.lambda_min - cb.lambda_min).abs() < 1e-9);
    }
}

fn orbit(k_omega: f64, t_end: f64) -> Trajectory {
    let law = FrozenEstimate { k_omega, d_star: 2.0 };
    let cfg = IntegratorConfig {
        dt: 1e-3,
        t_end,
        record_stride: 1,
    };
    simulate(&law, WorldState::new(v(8.0, 9.0), v(2.0, 3.0), v(5.0, 6.0)), &TargetMotion::Stationary, &cfg)
}

#[test]
fn gamma_rate_does_not_depend_on_reference_direction() {
    let traj = orbit(5.0, 1.0);
    let a = gamma_rate(&traj, &v(1.0, 0.0));
    let b = gamma_rate(&traj, &v(-0.3, 2.0));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn gamma_rate_follows_tangential_gain_sign() {
    for k in [5.0, -5.0] {
        let traj = orbit(k, 1.0);
        let rates = gamma_rate(&traj, &v(1.0, 0.0));
        let mid = rates[rates.len() / 2];
        assert_eq!(mid.signum(), k.signum(), "k = {k}");
        let worst = gamma_rate_check(&traj, &v(0.0, 1.0)).into_iter().fold(0.0, f64::max);
        assert!(worst < 1e-3, "k = {k}: {worst:e}");
    }
}

#[test]
fn frozen_estimate_is_caught_by_settling_not_by_algebra() {
    let traj = orbit(5.0, 2.0);
    let report = invariant_report(&traj, &MonitorConfig::for_trajectory(&traj, CheckConfig::default()));
    let verdict = |n: &str| report.get(n).unwrap().verdict.clone();
    assert_eq!(verdict("regressor_consistency"), Verdict::Pass);
    assert_eq!(verdict("xi_reconstruction"), Verdict::Pass);
    // a constant error is trivially non-increasing
    assert_eq!(verdict("estimate_monotone"), Verdict::Pass);
    assert_eq!(verdict("estimator_settling"), Verdict::Fail);
    assert!(!report.all_passed());
}

#[test]
fn motionless_agent_is_not_exciting() {
    let cfg = IntegratorConfig {
        dt: 1e-3,
        t_end: 1.0,
        record_stride: 10,
    };
    let traj = simulate(&Still, WorldState::new(v(8.0, 9.0), v(2.0, 3.0), v(5.0, 6.0)), &TargetMotion::Stationary, &cfg);
    let cert = pe_certificate(&traj, &window(0.0, 1.0)).unwrap();
    assert!(!cert.exciting);
    assert!(cert.lambda_min.abs() < 1e-12);
}
