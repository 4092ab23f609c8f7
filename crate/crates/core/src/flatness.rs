//! Differential-flatness maps: from a flat-output sample (position and yaw
//! with their derivatives) to attitude, thrust, body angular velocity and
//! acceleration, and feedforward torque.
//!
//! The maps exist in two factored layers: core routines that take the heading
//! and yaw derivatives explicitly (shared with the controllers, which apply
//! them to measured attitude and stored thrust), and wrappers that evaluate a
//! whole [`FlatSample`].

use crate::error::{Error, Result};
use crate::geom::{self, heading_from_yaw, Heading, Rotation, SINGULARITY_TOL};
use crate::traj::FlatSample;
use crate::vehicle::VehicleParams;
use crate::{real, Real, Vec3};

/// Complete open-loop state/input trajectory recovered from a flat sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatOutputs<T: Real> {
    pub rot: Rotation<T>,
    /// Thrust magnitude, N.
    pub p: T,
    /// Thrust rate, N/s.
    pub p1: T,
    /// Thrust second derivative, N/s^2.
    pub p2: T,
    /// Body-frame angular velocity, rad/s.
    pub omega: Vec3<T>,
    /// Body-frame angular acceleration, rad/s^2.
    pub alpha: Vec3<T>,
    /// Body-frame feedforward torque, N m.
    pub tau: Vec3<T>,
}

fn check_thrust<T: Real>(p: T) -> Result<()> {
    if p <= real::<T>(SINGULARITY_TOL) {
        Err(Error::ZeroThrustSingularity)
    } else {
        Ok(())
    }
}

fn flip_guard<T: Real>(denom: T) -> Result<T> {
    if denom.abs() <= real::<T>(SINGULARITY_TOL) {
        Err(Error::FlipOverSingularity)
    } else {
        Ok(denom)
    }
}

/// Attitude and thrust from acceleration and yaw: the body up axis aligns
/// with the mass-normalized net specific force, and the basis is completed
/// from the heading.
pub fn attitude_from_flat<T: Real>(
    sample: &FlatSample<T>,
    params: &VehicleParams<T>,
) -> Result<(Rotation<T>, T)> {
    let f = sample.r2 * params.m + geom::e_z::<T>() * (params.m * params.g);
    let p = f.norm();
    check_thrust(p)?;
    let k_b = f / p;
    let h = heading_from_yaw(sample.psi);
    let cross = h.horizontal_normal().cross(&k_b);
    let n = flip_guard(cross.norm())?;
    let i_b = cross / n;
    let j_b = k_b.cross(&i_b);
    Ok((
        Rotation::from_matrix_unchecked(crate::Mat3::from_columns(&[i_b, j_b, k_b])),
        p,
    ))
}

/// Thrust rate and body angular velocity from jerk. Core form: heading and
/// yaw rate passed explicitly.
pub fn omega_core<T: Real>(
    r3: &Vec3<T>,
    psi1: T,
    h: &Heading<T>,
    rot: &Rotation<T>,
    p: T,
    params: &VehicleParams<T>,
) -> Result<(T, Vec3<T>)> {
    check_thrust(p)?;
    let k_b = rot.k_b();
    let p1 = (r3 * params.m).dot(&k_b);
    let h_omega = (r3 * params.m - k_b * p1) / p;
    let omega_x = -h_omega.dot(&rot.j_b());
    let omega_y = h_omega.dot(&rot.i_b());
    let k_prime = h.horizontal_normal();
    let denom = flip_guard(k_prime.dot(&rot.j_b()))?;
    let omega_z = (omega_y * k_prime.dot(&k_b) + psi1 * h.vector().dot(&rot.i_b())) / denom;
    Ok((p1, Vec3::new(omega_x, omega_y, omega_z)))
}

/// [`omega_core`] applied to a flat sample and its reference heading.
pub fn omega_from_flat<T: Real>(
    sample: &FlatSample<T>,
    rot: &Rotation<T>,
    p: T,
    params: &VehicleParams<T>,
) -> Result<(T, Vec3<T>)> {
    let h = heading_from_yaw(sample.psi);
    omega_core(&sample.r3, sample.psi1, &h, rot, p, params)
}

/// Thrust second derivative and body angular acceleration from snap. Core
/// form: heading and yaw derivatives passed explicitly.
pub fn alpha_core<T: Real>(
    r4: &Vec3<T>,
    psi1: T,
    psi2: T,
    h: &Heading<T>,
    rot: &Rotation<T>,
    p: T,
    p1: T,
    omega_body: &Vec3<T>,
    params: &VehicleParams<T>,
) -> Result<(T, Vec3<T>)> {
    check_thrust(p)?;
    let k_b = rot.k_b();
    let i_b = rot.i_b();
    let j_b = rot.j_b();
    let w = rot.to_world(omega_body);
    let two = real::<T>(2.0);

    let h_p = r4 * params.m - w.cross(&w.cross(&k_b)) * p - w.cross(&k_b) * (two * p1);
    let p2 = h_p.dot(&k_b);
    let h_alpha = (h_p - k_b * p2) / p;
    let alpha_x = -h_alpha.dot(&j_b);
    let alpha_y = h_alpha.dot(&i_b);

    let k_prime = h.horizontal_normal();
    let v = (h.vector() * psi2 + k_prime * (psi1 * psi1)).dot(&i_b)
        + two * psi1 * h.vector().dot(&w.cross(&i_b));
    let denom = flip_guard(k_prime.dot(&j_b))?;
    let alpha_z =
        (v + alpha_y * k_prime.dot(&k_b) - k_prime.dot(&w.cross(&w.cross(&i_b)))) / denom;
    Ok((p2, Vec3::new(alpha_x, alpha_y, alpha_z)))
}

/// [`alpha_core`] applied to a flat sample and its reference heading.
pub fn alpha_from_flat<T: Real>(
    sample: &FlatSample<T>,
    rot: &Rotation<T>,
    p: T,
    p1: T,
    omega_body: &Vec3<T>,
    params: &VehicleParams<T>,
) -> Result<(T, Vec3<T>)> {
    let h = heading_from_yaw(sample.psi);
    alpha_core(
        &sample.r4, sample.psi1, sample.psi2, &h, rot, p, p1, omega_body, params,
    )
}

/// Full feedforward chain: attitude, thrust and its derivatives, angular
/// velocity and acceleration, and the torque that sustains them.
pub fn feedforward<T: Real>(
    sample: &FlatSample<T>,
    params: &VehicleParams<T>,
) -> Result<FlatOutputs<T>> {
    let (rot, p) = attitude_from_flat(sample, params)?;
    let (p1, omega) = omega_from_flat(sample, &rot, p, params)?;
    let (p2, alpha) = alpha_from_flat(sample, &rot, p, p1, &omega, params)?;
    let j = params.inertia();
    let tau = j * alpha + omega.cross(&(j * omega));
    Ok(FlatOutputs {
        rot,
        p,
        p1,
        p2,
        omega,
        alpha,
        tau,
    })
}

/// Alternative scalar yaw-rate coupling retained for cross-validation:
/// `omega_z = (psi1 - omega_y (j_B . k)) / (k_B . k)`.
pub fn omega_z_draft<T: Real>(psi1: T, omega_y: T, rot: &Rotation<T>) -> Result<T> {
    let kz = flip_guard(rot.k_b().z)?;
    Ok((psi1 - omega_y * rot.j_b().z) / kz)
}

/// Alternative scalar yaw-acceleration coupling retained for
/// cross-validation:
/// `alpha_z = (psi2 - wx wy (k_B . k) + wx wz (j_B . k) - alpha_y (j_B . k)) / (k_B . k)`.
pub fn alpha_z_draft<T: Real>(
    psi2: T,
    omega_body: &Vec3<T>,
    alpha_y: T,
    rot: &Rotation<T>,
) -> Result<T> {
    let kz = flip_guard(rot.k_b().z)?;
    let jz = rot.j_b().z;
    let (wx, wy, wz) = (omega_body.x, omega_body.y, omega_body.z);
    Ok((psi2 - wx * wy * kz + wx * wz * jz - alpha_y * jz) / kz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traj::hover;
    use approx::assert_relative_eq;

    fn params() -> VehicleParams<f64> {
        VehicleParams::default_params()
    }

    #[test]
    fn attitude_hover() {
        let (rot, p) = attitude_from_flat(&hover(Vec3::zeros(), 0.0), &params()).unwrap();
        assert_relative_eq!(rot.matrix(), &crate::Mat3::identity(), epsilon = 1e-15);
        assert_relative_eq!(p, 4.905);
    }

    #[test]
    fn attitude_vertical_climb() {
        let mut s = hover(Vec3::zeros(), 0.0);
        s.r2 = Vec3::new(0.0, 0.0, 9.81);
        let (rot, p) = attitude_from_flat(&s, &params()).unwrap();
        assert_relative_eq!(rot.matrix(), &crate::Mat3::identity(), epsilon = 1e-15);
        assert_relative_eq!(p, 9.81);
    }

    #[test]
    fn attitude_lateral_acceleration() {
        let mut s = hover(Vec3::zeros(), 0.0);
        s.r2 = Vec3::new(9.81, 0.0, 0.0);
        let (rot, p) = attitude_from_flat(&s, &params()).unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(rot.k_b(), Vec3::new(inv_sqrt2, 0.0, inv_sqrt2), epsilon = 1e-12);
        assert_relative_eq!(p, 2.0f64.sqrt() * 4.905, epsilon = 1e-12);
        // i_B by hand: (k x h) x k_B normalized = (1,0,-1)/sqrt(2).
        assert_relative_eq!(rot.i_b(), Vec3::new(inv_sqrt2, 0.0, -inv_sqrt2), epsilon = 1e-12);
    }

    #[test]
    fn attitude_free_fall_singularity() {
        let mut s = hover(Vec3::zeros(), 0.0);
        s.r2 = Vec3::new(0.0, 0.0, -9.81);
        assert_eq!(
            attitude_from_flat(&s, &params()),
            Err(Error::ZeroThrustSingularity)
        );
    }

    #[test]
    fn omega_hover_cases() {
        let p = params();
        let rot = Rotation::identity();
        let s = hover(Vec3::zeros(), 0.0);
        let (p1, w) = omega_from_flat(&s, &rot, 4.905, &p).unwrap();
        assert_eq!(p1, 0.0);
        assert_eq!(w, Vec3::zeros());

        let mut s = hover(Vec3::zeros(), 0.0);
        s.psi1 = 1.0;
        let (_, w) = omega_from_flat(&s, &rot, 4.905, &p).unwrap();
        assert_relative_eq!(w, Vec3::new(0.0, 0.0, 1.0), epsilon = 1e-15);

        let mut s = hover(Vec3::zeros(), 0.0);
        s.r3 = Vec3::new(0.0, 0.0, 2.0);
        let (p1, w) = omega_from_flat(&s, &rot, 4.905, &p).unwrap();
        assert_relative_eq!(p1, 1.0);
        assert_relative_eq!(w.norm(), 0.0);
    }

    #[test]
    fn alpha_hover_cases() {
        let p = params();
        let rot = Rotation::identity();
        let s = hover(Vec3::zeros(), 0.0);
        let (p2, a) =
            alpha_from_flat(&s, &rot, 4.905, 0.0, &Vec3::zeros(), &p).unwrap();
        assert_eq!(p2, 0.0);
        assert_eq!(a, Vec3::zeros());

        let mut s = hover(Vec3::zeros(), 0.0);
        s.r4 = Vec3::new(0.0, 0.0, 4.0);
        let (p2, a) =
            alpha_from_flat(&s, &rot, 4.905, 0.0, &Vec3::zeros(), &p).unwrap();
        assert_relative_eq!(p2, 2.0);
        assert_relative_eq!(a.norm(), 0.0);

        let mut s = hover(Vec3::zeros(), 0.0);
        s.psi2 = 1.0;
        let (p2, a) =
            alpha_from_flat(&s, &rot, 4.905, 0.0, &Vec3::zeros(), &p).unwrap();
        assert_eq!(p2, 0.0);
        assert_relative_eq!(a, Vec3::new(0.0, 0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn feedforward_hover_and_yaw_spin() {
        let p = params();
        let out = feedforward(&hover(Vec3::zeros(), 0.0), &p).unwrap();
        assert_relative_eq!(out.p, 4.905);
        assert_eq!(out.tau, Vec3::zeros());
        assert_eq!(out.omega, Vec3::zeros());
        assert_eq!(out.alpha, Vec3::zeros());

        // Pure yaw spin: omega parallel to the k principal axis, alpha zero,
        // so the gyroscopic torque vanishes.
        let mut s = hover(Vec3::zeros(), 0.0);
        s.psi1 = 1.0;
        let out = feedforward(&s, &p).unwrap();
        assert_relative_eq!(out.tau.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn feedforward_helix_is_finite() {
        let p = params();
        let s = crate::traj::helix(0.5f64, 5.0, 10.0, crate::traj::YawPolicy::Zero).unwrap();
        let out = feedforward(&s, &p).unwrap();
        assert!(out.p > 0.0);
        assert!(out.tau.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn draft_formulas_hover_identities() {
        let rot = Rotation::<f64>::identity();
        assert_relative_eq!(omega_z_draft(1.0, 0.0, &rot).unwrap(), 1.0);
        assert_relative_eq!(omega_z_draft(0.0, 0.0, &rot).unwrap(), 0.0);
        assert_relative_eq!(
            alpha_z_draft(0.0, &Vec3::zeros(), 0.0, &rot).unwrap(),
            0.0
        );
        assert_relative_eq!(
            alpha_z_draft(1.0, &Vec3::zeros(), 0.0, &rot).unwrap(),
            1.0
        );
    }
}
