//! Geometric PD tracking controller: a desired force vector from position and
//! velocity errors, a desired attitude aligning the body z axis to that force
//! with the reference heading, and torque from rotation-matrix attitude error.

use crate::error::{Error, Result};
use crate::geom::{e_z, heading_from_yaw, vee, Heading, Rotation, SINGULARITY_TOL};
use crate::traj::FlatSample;
use crate::vehicle::{ControlCommand, RigidState, VehicleParams};
use crate::{real, Real, Vec3};

/// Diagonal gains: scalar position/velocity gains `kp`, `kv` and per-axis
/// attitude/rate gains `kr`, `komega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellingerGains<T: Real> {
    pub kp: T,
    pub kv: T,
    pub kr: Vec3<T>,
    pub komega: Vec3<T>,
}

/// Desired world-frame force from the PD position loop plus gravity and
/// acceleration feedforward:
/// `F = -kp (v - r1_T) - kv (r - r0_T) + m g k + m r2_T`.
pub fn desired_force<T: Real>(
    state: &RigidState<T>,
    reference: &FlatSample<T>,
    gains: &MellingerGains<T>,
    params: &VehicleParams<T>,
) -> Vec3<T> {
    -(state.v - reference.r1) * gains.kp - (state.r - reference.r0) * gains.kv
        + e_z::<T>() * (params.m * params.g)
        + reference.r2 * params.m
}

/// Desired attitude whose z axis follows the force direction and whose x axis
/// follows the reference heading projected onto the plane normal to that z.
pub fn desired_attitude<T: Real>(force: &Vec3<T>, heading: &Heading<T>) -> Result<Rotation<T>> {
    let norm = force.norm();
    if norm <= real::<T>(SINGULARITY_TOL) {
        return Err(Error::ZeroForceSingularity);
    }
    let k_des = force / norm;
    let cross = heading.horizontal_normal().cross(&k_des);
    let cross_norm = cross.norm();
    if cross_norm <= real::<T>(SINGULARITY_TOL) {
        return Err(Error::FlipOverSingularity);
    }
    let i_des = cross / cross_norm;
    let j_des = k_des.cross(&i_des);
    Rotation::from_columns(i_des, j_des, k_des)
}

/// Rotation-matrix attitude error `e_R = 1/2 (R_des^T R - R^T R_des)^v`.
pub fn attitude_error<T: Real>(rot: &Rotation<T>, rot_des: &Rotation<T>) -> Vec3<T> {
    let m = rot_des.matrix().transpose() * rot.matrix()
        - rot.matrix().transpose() * rot_des.matrix();
    vee(&m).expect("antisymmetric by construction") * real::<T>(0.5)
}

/// One control cycle: thrust is the desired force projected on the current
/// body z axis; torque is PD on attitude and body-rate error.
pub fn mellinger_step<T: Real>(
    state: &RigidState<T>,
    reference: &FlatSample<T>,
    omega_ref_body: &Vec3<T>,
    gains: &MellingerGains<T>,
    params: &VehicleParams<T>,
) -> Result<ControlCommand<T>> {
    let force = desired_force(state, reference, gains, params);
    let p = force.dot(&state.rot.k_b());
    let heading = heading_from_yaw(reference.psi);
    let rot_des = desired_attitude(&force, &heading)?;
    let e_r = attitude_error(&state.rot, &rot_des);
    let e_omega = state.omega - omega_ref_body;
    let tau = -e_r.component_mul(&gains.kr) - e_omega.component_mul(&gains.komega);
    Ok(ControlCommand { p, tau })
}

/// Stateless wrapper mirroring the snap controller's driving interface. The
/// reference body rate is supplied by the caller (zero for setpoints, the
/// flatness-derived rate for smooth trajectories).
#[derive(Debug, Clone)]
pub struct MellingerController<T: Real> {
    pub gains: MellingerGains<T>,
}

impl<T: Real> MellingerController<T> {
    pub fn new(gains: MellingerGains<T>) -> Self {
        Self { gains }
    }

    pub fn step(
        &self,
        state: &RigidState<T>,
        reference: &FlatSample<T>,
        omega_ref_body: &Vec3<T>,
        params: &VehicleParams<T>,
    ) -> Result<ControlCommand<T>> {
        mellinger_step(state, reference, omega_ref_body, &self.gains, params)
    }
}
