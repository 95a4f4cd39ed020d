//! Planar bearing geometry and the signed power maps shared by the
//! estimator and the controllers.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Agent/target separations below this are treated as a collision.
pub const COINCIDENCE_THRESHOLD: f64 = 1e-12;

/// Clockwise quarter turn: `(v.y, -v.x)`.
#[inline]
pub fn perp_cw(v: &Vec2) -> Vec2 {
    Vec2::new(v.y, -v.x)
}

/// One bearing measurement taken by the agent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BearingObservation {
    /// Unit vector from the agent towards the target.
    pub phi: Vec2,
    /// `phi` rotated clockwise by a quarter turn.
    pub phi_perp: Vec2,
    /// Angle of `phi` from the world x-axis, in (-pi, pi].
    pub theta: f64,
    /// Ground-truth range. Only the simulator and its oracles read this.
    pub distance: f64,
}

/// Bearing from `agent` to `target`.
pub fn bearing(target: &Vec2, agent: &Vec2) -> Result<BearingObservation> {
    let offset = target - agent;
    let distance = offset.norm();
    if !(distance >= COINCIDENCE_THRESHOLD) {
        return Err(Error::DegenerateGeometry { distance });
    }
    let phi = offset / distance;
    Ok(BearingObservation {
        phi,
        phi_perp: perp_cw(&phi),
        theta: phi.y.atan2(phi.x),
        distance,
    })
}

impl BearingObservation {
    /// Rate of change of the bearing for the given relative motion.
    ///
    /// Uses the ground-truth range, so this is an oracle quantity.
    pub fn rate(&self, agent_velocity: &Vec2, target_velocity: &Vec2) -> Vec2 {
        let rel = target_velocity - agent_velocity;
        (rel - self.phi * self.phi.dot(&rel)) / self.distance
    }
}

/// Scalar `sign(z)|z|^alpha`.
#[inline]
pub fn sig_pow(z: f64, alpha: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else {
        z.signum() * z.abs().powf(alpha)
    }
}

/// Componentwise [`sig_pow`].
#[inline]
pub fn sig_pow_vec(z: &Vec2, alpha: f64) -> Vec2 {
    z.map(|c| sig_pow(c, alpha))
}

/// `z / |z|^beta`, and zero at the origin.
#[inline]
pub fn psi_pow(z: &Vec2, beta: f64) -> Vec2 {
    let n = z.norm();
    if n > 0.0 {
        z / n.powf(beta)
    } else {
        Vec2::zeros()
    }
}

/// Continuity-preserving unwrap of an angle sequence: each sample is shifted
/// by a multiple of 2pi to land nearest its predecessor.
pub fn unwrap_angles(angles: &[f64]) -> Vec<f64> {
    use std::f64::consts::TAU;
    let mut out = Vec::with_capacity(angles.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &a in angles {
        if let Some(p) = prev {
            let jump = a + offset - p;
            offset -= (jump / TAU).round() * TAU;
        }
        let v = a + offset;
        out.push(v);
        prev = Some(v);
    }
    out
}

/// Singular values of a 2x2 matrix, largest first.
///
/// The small one is recovered as `|det| / sigma_max`, which keeps relative
/// accuracy when the matrix is nearly rank one.
pub fn singular_values(m: &Mat2) -> (f64, f64) {
    let frob2 = m.norm_squared();
    let det = m.determinant();
    let disc = (frob2 * frob2 - 4.0 * det * det).max(0.0).sqrt();
    let s_max = (0.5 * (frob2 + disc)).sqrt();
    if s_max == 0.0 {
        return (0.0, 0.0);
    }
    (s_max, det.abs() / s_max)
}

/// Smallest eigenvalue of a symmetric 2x2 matrix (the symmetric part is used).
pub fn sym_min_eigenvalue(m: &Mat2) -> f64 {
    let a = m[(0, 0)];
    let c = m[(1, 1)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let mean = 0.5 * (a + c);
    let radius = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    mean - radius
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn bearing_from_initial_simulation_positions() {
        let obs = bearing(&Vec2::new(2.0, 3.0), &Vec2::new(8.0, 9.0)).unwrap();
        let h = -std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(obs.phi, Vec2::new(h, h), epsilon = 1e-12);
        assert_relative_eq!(obs.distance, 72.0_f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(obs.distance, 8.48528, epsilon = 1e-5);
    }

    #[test]
    fn bearing_axis_aligned() {
        let obs = bearing(&Vec2::new(1.0, 0.0), &Vec2::zeros()).unwrap();
        assert_eq!(obs.phi, Vec2::new(1.0, 0.0));
        assert_eq!(obs.phi_perp, Vec2::new(0.0, -1.0));
        assert_eq!(obs.distance, 1.0);
        assert_eq!(obs.theta, 0.0);
    }

    #[test]
    fn coincident_positions_are_degenerate() {
        let err = bearing(&Vec2::zeros(), &Vec2::zeros()).unwrap_err();
        assert!(matches!(err, Error::DegenerateGeometry { .. }));
        assert!(bearing(&Vec2::new(5e-13, 0.0), &Vec2::zeros()).is_err());
    }

    #[test]
    fn theta_range_includes_pi() {
        let obs = bearing(&Vec2::new(-1.0, 0.0), &Vec2::zeros()).unwrap();
        assert_eq!(obs.theta, std::f64::consts::PI);
    }

    #[test]
    fn sig_pow_cases() {
        assert_eq!(sig_pow_vec(&Vec2::new(4.0, -9.0), 0.5), Vec2::new(2.0, -3.0));
        assert_eq!(sig_pow(0.0, 0.5), 0.0);
        assert_eq!(sig_pow(-1.0, 1.0), -1.0);
        // alpha = 0 is the signum, still zero at zero
        assert_eq!(sig_pow(-3.0, 0.0), -1.0);
        assert_eq!(sig_pow(0.0, 0.0), 0.0);
    }

    #[test]
    fn psi_pow_cases() {
        let v = psi_pow(&Vec2::new(3.0, 4.0), 0.5);
        assert_relative_eq!(v, Vec2::new(3.0, 4.0) / 5.0_f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(v, Vec2::new(1.34164, 1.78885), epsilon = 1e-5);
        assert_eq!(psi_pow(&Vec2::zeros(), 0.5), Vec2::zeros());
        assert_eq!(psi_pow(&Vec2::new(0.0, 2.0), 0.0), Vec2::new(0.0, 2.0));
    }

    #[test]
    fn unwrap_continues_across_branch_cut() {
        let wrapped = [3.0, -3.0, -2.5, 3.1];
        let u = unwrap_angles(&wrapped);
        assert_relative_eq!(u[1], -3.0 + std::f64::consts::TAU, epsilon = 1e-15);
        for w in u.windows(2) {
            assert!((w[1] - w[0]).abs() < std::f64::consts::PI);
        }
    }

    #[test]
    fn singular_values_of_diagonal_and_rank_one() {
        let (hi, lo) = singular_values(&Mat2::new(3.0, 0.0, 0.0, -2.0));
        assert_relative_eq!(hi, 3.0, epsilon = 1e-14);
        assert_relative_eq!(lo, 2.0, epsilon = 1e-14);
        let v = Vec2::new(0.6, 0.8);
        let (hi, lo) = singular_values(&(v * v.transpose()));
        assert_relative_eq!(hi, 1.0, epsilon = 1e-14);
        assert!(lo.abs() < 1e-15);
        assert_eq!(singular_values(&Mat2::zeros()), (0.0, 0.0));
    }

    #[test]
    fn bearing_rate_matches_finite_difference() {
        let target = Vec2::new(2.0, 3.0);
        let agent = Vec2::new(8.0, 9.0);
        let va = Vec2::new(-1.0, 4.0);
        let vt = Vec2::new(0.3, -0.2);
        let h = 1e-6;
        let fwd = bearing(&(target + vt * h), &(agent + va * h)).unwrap().phi;
        let bwd = bearing(&(target - vt * h), &(agent - va * h)).unwrap().phi;
        let fd = (fwd - bwd) / (2.0 * h);
        let obs = bearing(&target, &agent).unwrap();
        assert_relative_eq!(obs.rate(&va, &vt), fd, epsilon = 1e-8);
    }

    fn coord() -> impl Strategy<Value = f64> {
        -1e3..1e3f64
    }

    proptest! {
        #[test]
        fn bearing_frame_is_orthonormal(tx in coord(), ty in coord(), ax in coord(), ay in coord()) {
            prop_assume!(((tx - ax).powi(2) + (ty - ay).powi(2)).sqrt() > 1e-6);
            let obs = bearing(&Vec2::new(tx, ty), &Vec2::new(ax, ay)).unwrap();
            prop_assert!((obs.phi.norm() - 1.0).abs() < 1e-12);
            prop_assert!((obs.phi_perp.norm() - 1.0).abs() < 1e-12);
            prop_assert!(obs.phi.dot(&obs.phi_perp).abs() < 1e-12);
        }

        #[test]
        fn bearing_is_translation_invariant(
            tx in coord(), ty in coord(), ax in coord(), ay in coord(),
            cx in coord(), cy in coord()
        ) {
            prop_assume!(((tx - ax).powi(2) + (ty - ay).powi(2)).sqrt() > 1.0);
            let c = Vec2::new(cx, cy);
            let t = Vec2::new(tx, ty);
            let a = Vec2::new(ax, ay);
            let p0 = bearing(&t, &a).unwrap().phi;
            let p1 = bearing(&(t + c), &(a + c)).unwrap().phi;
            prop_assert!((p0 - p1).norm() < 1e-12);
        }

        #[test]
        fn sig_pow_is_odd(z0 in -1e3..1e3f64, z1 in -1e3..1e3f64, alpha in 0.01..2.0f64) {
            let z = Vec2::new(z0, z1);
            prop_assert_eq!(sig_pow_vec(&(-z), alpha), -sig_pow_vec(&z, alpha));
        }

        #[test]
        fn psi_pow_norm_identity(z0 in -1e3..1e3f64, z1 in -1e3..1e3f64, beta in 0.0..=1.0f64) {
            let z = Vec2::new(z0, z1);
            prop_assume!(z.norm() > 1e-9);
            let lhs = psi_pow(&z, beta).norm();
            let rhs = z.norm().powf(1.0 - beta);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }
}
