//! Snap controller: parallel position and yaw loops commanding the fourth
//! position derivative and second yaw derivative, mapped to thrust and torque
//! through the flatness machinery with stored thrust state.

use crate::error::{Error, Result};
use crate::flatness::alpha_core;
use crate::geom::{heading_of, Rotation, SINGULARITY_TOL};
use crate::traj::{wrap_angle, FlatSample};
use crate::vehicle::{ControlCommand, RigidState, VehicleParams};
use crate::{real, Real, Vec3};

/// Position gains `K1..K4` (uniform per axis) and yaw gains `K5, K6`,
/// coefficients of the closed-loop error polynomials
/// `e'''' + K1 e''' + K2 e'' + K3 e' + K4 e` and `e'' + K5 e' + K6 e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapGains<T: Real> {
    pub k1: T,
    pub k2: T,
    pub k3: T,
    pub k4: T,
    pub k5: T,
    pub k6: T,
}

/// Thrust and thrust-rate memory carried between control cycles; thrust and
/// its derivative are not sensor inputs, so the controller stores the values
/// it computed last cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapState<T: Real> {
    /// Stored thrust, N.
    pub p: T,
    /// Stored thrust rate, N/s.
    pub p1: T,
}

impl<T: Real> SnapState<T> {
    /// Hover-consistent seed: `p = m g`, `p1 = 0`.
    pub fn hover(params: &VehicleParams<T>) -> Self {
        Self {
            p: params.hover_thrust(),
            p1: T::zero(),
        }
    }
}

/// Reconstruct acceleration and jerk from the stored thrust rather than by
/// differentiating sensors:
/// `r'' = (p k_B - m g k)/m`, `r''' = (p1 k_B + p (w x k_B))/m`,
/// the derivative chain of the translational dynamics with
/// `d(k_B)/dt = w x k_B` for the world angular velocity `w`.
pub fn estimate_motion<T: Real>(
    state: &RigidState<T>,
    snap_state: &SnapState<T>,
    params: &VehicleParams<T>,
) -> (Vec3<T>, Vec3<T>) {
    let k_b = state.rot.k_b();
    let w = state.rot.to_world(&state.omega);
    let gravity = crate::geom::e_z::<T>() * (params.m * params.g);
    let r2 = (k_b * snap_state.p - gravity) / params.m;
    let r3 = (k_b * snap_state.p1 + w.cross(&k_b) * snap_state.p) / params.m;
    (r2, r3)
}

/// Current yaw in `(-pi, pi]` and yaw rate from the attitude and body rates:
/// `psi = atan2(i_B . j, i_B . i)`,
/// `psi1 = (w_k (k x h).j_B - w_j (k x h).k_B) / (h . i_B)`.
pub fn yaw_and_rate<T: Real>(rot: &Rotation<T>, omega_body: &Vec3<T>) -> Result<(T, T)> {
    let h = heading_of(rot)?;
    let i_b = rot.i_b();
    let psi = i_b.y.atan2(i_b.x);
    let denom = h.vector().dot(&i_b);
    if denom <= real::<T>(SINGULARITY_TOL) {
        return Err(Error::FlipOverSingularity);
    }
    let k_prime = h.horizontal_normal();
    let psi1 = (omega_body.z * k_prime.dot(&rot.j_b())
        - omega_body.y * k_prime.dot(&rot.k_b()))
        / denom;
    Ok((psi, psi1))
}

/// Measured quantities the snap law consumes.
#[derive(Debug, Clone, Copy)]
pub struct SnapMeasurement<T: Real> {
    pub r: Vec3<T>,
    pub v: Vec3<T>,
    pub r2: Vec3<T>,
    pub r3: Vec3<T>,
    pub psi: T,
    pub psi1: T,
}

/// The parallel fourth-order position law and second-order yaw law. The yaw
/// error is wrapped to the shortest arc. When `snap_feedforward` is set, the
/// reference snap is added to the position law; the law as published carries
/// no such term, so the flag defaults to off in every consumer.
pub fn snap_law<T: Real>(
    meas: &SnapMeasurement<T>,
    reference: &FlatSample<T>,
    gains: &SnapGains<T>,
    snap_feedforward: bool,
) -> (Vec3<T>, T) {
    let mut r4_des = -(meas.r3 - reference.r3) * gains.k1
        - (meas.r2 - reference.r2) * gains.k2
        - (meas.v - reference.r1) * gains.k3
        - (meas.r - reference.r0) * gains.k4;
    if snap_feedforward {
        r4_des += reference.r4;
    }
    let psi2_des = -gains.k5 * (meas.psi1 - reference.psi1)
        - gains.k6 * wrap_angle(meas.psi - reference.psi);
    (r4_des, psi2_des)
}

/// Map desired snap and yaw acceleration to a thrust/torque command. The
/// desired thrust second derivative and body angular acceleration come from
/// the flatness projection evaluated at the current attitude with the stored
/// thrust; thrust is then integrated twice (semi-implicit Euler at the
/// control step) and torque follows from the rotational dynamics.
pub fn snap_output<T: Real>(
    r4_des: &Vec3<T>,
    psi2_des: T,
    state: &RigidState<T>,
    snap_state: &SnapState<T>,
    params: &VehicleParams<T>,
    dt: T,
) -> Result<(ControlCommand<T>, SnapState<T>)> {
    let h = heading_of(&state.rot)?;
    let (_, psi1) = yaw_and_rate(&state.rot, &state.omega)?;
    let (p2_des, alpha_des) = alpha_core(
        r4_des,
        psi1,
        psi2_des,
        &h,
        &state.rot,
        snap_state.p,
        snap_state.p1,
        &state.omega,
        params,
    )?;
    let p1_next = snap_state.p1 + p2_des * dt;
    let p_next = snap_state.p + p1_next * dt;
    let j = params.inertia();
    let tau = j * alpha_des + state.omega.cross(&(j * state.omega));
    Ok((
        ControlCommand { p: p_next, tau },
        SnapState {
            p: p_next,
            p1: p1_next,
        },
    ))
}

/// Stateful wrapper driving the snap pipeline once per control cycle.
#[derive(Debug, Clone)]
pub struct SnapController<T: Real> {
    pub gains: SnapGains<T>,
    pub state: SnapState<T>,
    pub snap_feedforward: bool,
}

impl<T: Real> SnapController<T> {
    pub fn new(gains: SnapGains<T>, params: &VehicleParams<T>) -> Self {
        Self {
            gains,
            state: SnapState::hover(params),
            snap_feedforward: false,
        }
    }

    pub fn step(
        &mut self,
        state: &RigidState<T>,
        reference: &FlatSample<T>,
        params: &VehicleParams<T>,
        dt: T,
    ) -> Result<ControlCommand<T>> {
        let (r2, r3) = estimate_motion(state, &self.state, params);
        let (psi, psi1) = yaw_and_rate(&state.rot, &state.omega)?;
        let meas = SnapMeasurement {
            r: state.r,
            v: state.v,
            r2,
            r3,
            psi,
            psi1,
        };
        let (r4_des, psi2_des) = snap_law(&meas, reference, &self.gains, self.snap_feedforward);
        let (cmd, next) = snap_output(&r4_des, psi2_des, state, &self.state, params, dt)?;
        self.state = next;
        Ok(cmd)
    }
}
