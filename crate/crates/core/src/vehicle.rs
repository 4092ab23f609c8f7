//! Vehicle parameters, rotor mixer with clamping, rigid-body equations of
//! motion, and the fixed-step RK4 integrator.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geom::{self, hat, Rotation};
use crate::{real, Mat3, Real, Vec3};

/// Default maximum rotor speed, rad/s. Hover needs about 202 rad/s on the
/// default parameters, so this leaves roughly a 3.9x thrust ceiling.
pub const DEFAULT_S_MAX: f64 = 400.0;

/// Physical constants of the "+"-configuration quadcopter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams<T: Real> {
    /// Mass, kg.
    pub m: T,
    /// Gravitational acceleration, m/s^2.
    pub g: T,
    /// Arm length from center of mass to each rotor, m.
    pub l: T,
    /// Diagonal inertia (J_x, J_y, J_z), kg m^2.
    pub j: Vec3<T>,
    /// Rotor thrust coefficient, N s^2/rad^2.
    pub k_f: T,
    /// Rotor torque coefficient, N m s^2/rad^2.
    pub k_m: T,
    /// Maximum rotor angular speed, rad/s. May be infinite to disable the
    /// upper clamp.
    pub s_max: T,
}

#[derive(Debug, Deserialize)]
#[allow(non_snake_case)]
struct VehicleParamsRaw {
    #[serde(default = "d_m")]
    m: f64,
    #[serde(default = "d_g")]
    g: f64,
    #[serde(default = "d_l")]
    L: f64,
    #[serde(default = "d_jxy")]
    Jx: f64,
    #[serde(default = "d_jxy")]
    Jy: f64,
    #[serde(default = "d_jz")]
    Jz: f64,
    #[serde(default = "d_kf")]
    kF: f64,
    #[serde(default = "d_km")]
    kM: f64,
    #[serde(default = "d_smax")]
    s_max: f64,
}

fn d_m() -> f64 {
    0.5
}
fn d_g() -> f64 {
    9.81
}
fn d_l() -> f64 {
    0.25
}
fn d_jxy() -> f64 {
    0.0196
}
fn d_jz() -> f64 {
    0.0264
}
fn d_kf() -> f64 {
    3e-5
}
fn d_km() -> f64 {
    1.1e-6
}
fn d_smax() -> f64 {
    DEFAULT_S_MAX
}

impl<T: Real> VehicleParams<T> {
    /// The simulation parameter set: m = 0.5 kg, g = 9.81 m/s^2, L = 0.25 m,
    /// J = diag(0.0196, 0.0196, 0.0264) kg m^2, k_F = 3e-5, k_M = 1.1e-6.
    pub fn default_params() -> Self {
        Self {
            m: real(0.5),
            g: real(9.81),
            l: real(0.25),
            j: Vec3::new(real(0.0196), real(0.0196), real(0.0264)),
            k_f: real(3e-5),
            k_m: real(1.1e-6),
            s_max: real(DEFAULT_S_MAX),
        }
    }

    /// Load from a JSON document with keys
    /// `{"m","g","L","Jx","Jy","Jz","kF","kM","s_max"}`; missing keys take
    /// the defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: VehicleParamsRaw = serde_json::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("vehicle params: {e}")))?;
        let p = Self {
            m: real(raw.m),
            g: real(raw.g),
            l: real(raw.L),
            j: Vec3::new(real(raw.Jx), real(raw.Jy), real(raw.Jz)),
            k_f: real(raw.kF),
            k_m: real(raw.kM),
            s_max: real(raw.s_max),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [self.m, self.g, self.l, self.j.x, self.j.y, self.j.z, self.k_f, self.k_m, self.s_max];
        if pos.iter().any(|&x| x <= T::zero()) {
            return Err(Error::InvalidConfig(
                "vehicle parameters must be strictly positive".into(),
            ));
        }
        Ok(())
    }

    /// Hover thrust `m g`, N.
    pub fn hover_thrust(&self) -> T {
        self.m * self.g
    }

    pub fn inertia(&self) -> Mat3<T> {
        Mat3::from_diagonal(&self.j)
    }

    /// Disable the upper rotor-speed clamp.
    pub fn without_rotor_limit(mut self) -> Self {
        self.s_max = real(f64::INFINITY);
        self
    }
}

/// Simulated truth and sensor payload: position, velocity, attitude and
/// body-frame angular velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidState<T: Real> {
    /// World position, m.
    pub r: Vec3<T>,
    /// World velocity, m/s.
    pub v: Vec3<T>,
    /// Attitude.
    pub rot: Rotation<T>,
    /// Body-frame angular velocity, rad/s.
    pub omega: Vec3<T>,
}

impl<T: Real> RigidState<T> {
    /// At rest with identity attitude.
    pub fn hover_at(r: Vec3<T>) -> Self {
        Self {
            r,
            v: Vec3::zeros(),
            rot: Rotation::identity(),
            omega: Vec3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.r.iter().all(|x| x.is_finite())
            && self.v.iter().all(|x| x.is_finite())
            && self.rot.matrix().iter().all(|x| x.is_finite())
            && self.omega.iter().all(|x| x.is_finite())
    }
}

/// Clamped rotor speeds together with per-rotor saturation flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorSpeeds<T: Real> {
    /// Angular speeds, rad/s, each in `[0, s_max]`.
    pub s: [T; 4],
    /// True where the unclamped solution fell outside `[0, s_max]`.
    pub saturated: [bool; 4],
}

impl<T: Real> RotorSpeeds<T> {
    pub fn any_saturated(&self) -> bool {
        self.saturated.iter().any(|&b| b)
    }

    pub fn squared(&self) -> [T; 4] {
        [
            self.s[0] * self.s[0],
            self.s[1] * self.s[1],
            self.s[2] * self.s[2],
            self.s[3] * self.s[3],
        ]
    }
}

/// Collective thrust magnitude and body-frame torque.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlCommand<T: Real> {
    /// Thrust along the body up axis, N.
    pub p: T,
    /// Body-frame torque, N m.
    pub tau: Vec3<T>,
}

impl<T: Real> ControlCommand<T> {
    pub fn hover(params: &VehicleParams<T>) -> Self {
        Self {
            p: params.hover_thrust(),
            tau: Vec3::zeros(),
        }
    }
}

/// Net thrust and body torque produced by squared rotor speeds:
///
/// ```text
/// [p, tau_x, tau_y, tau_z] = [[ kF,    kF,   kF,   kF  ],
///                             [ 0,    -kF L, 0,    kF L],
///                             [-kF L,  0,    kF L, 0   ],
///                             [-kM,    kM,  -kM,   kM  ]] s^2
/// ```
pub fn mixer_forward<T: Real>(s_sq: &[T; 4], params: &VehicleParams<T>) -> (T, Vec3<T>) {
    let kf = params.k_f;
    let kfl = params.k_f * params.l;
    let km = params.k_m;
    let p = kf * (s_sq[0] + s_sq[1] + s_sq[2] + s_sq[3]);
    let tau = Vec3::new(
        kfl * (s_sq[3] - s_sq[1]),
        kfl * (s_sq[2] - s_sq[0]),
        km * (-s_sq[0] + s_sq[1] - s_sq[2] + s_sq[3]),
    );
    (p, tau)
}

/// Invert the mixer for a commanded thrust/torque and clamp each rotor to
/// `[0, s_max]`, flagging clamped rotors. Clamping, not failure, is the
/// defined behavior for infeasible commands.
pub fn mixer_inverse<T: Real>(
    cmd: &ControlCommand<T>,
    params: &VehicleParams<T>,
) -> RotorSpeeds<T> {
    let quarter = real::<T>(0.25);
    let half = real::<T>(0.5);
    let p4 = quarter * cmd.p / params.k_f;
    let tx = half * cmd.tau.x / (params.k_f * params.l);
    let ty = half * cmd.tau.y / (params.k_f * params.l);
    let tz = quarter * cmd.tau.z / params.k_m;
    let s_sq = [p4 - ty - tz, p4 - tx + tz, p4 + ty - tz, p4 + tx + tz];
    let mut s = [T::zero(); 4];
    let mut saturated = [false; 4];
    for i in 0..4 {
        if s_sq[i] < T::zero() {
            s[i] = T::zero();
            saturated[i] = true;
        } else {
            let speed = s_sq[i].sqrt();
            if speed > params.s_max {
                s[i] = params.s_max;
                saturated[i] = true;
            } else {
                s[i] = speed;
            }
        }
    }
    RotorSpeeds { s, saturated }
}

/// Time derivative of a rigid state.
#[derive(Debug, Clone, Copy)]
pub struct StateDerivative<T: Real> {
    pub dr: Vec3<T>,
    pub dv: Vec3<T>,
    pub drot: Mat3<T>,
    pub domega: Vec3<T>,
}

/// Rigid-body equations of motion:
/// `r' = v`, `m v' = p k_B - m g k`, `R' = R hat(omega)`,
/// `J omega' = tau - omega x (J omega)`.
pub fn dynamics<T: Real>(
    state: &RigidState<T>,
    cmd: &ControlCommand<T>,
    params: &VehicleParams<T>,
) -> StateDerivative<T> {
    let k_b = state.rot.k_b();
    let dv = (k_b * cmd.p - geom::e_z::<T>() * (params.m * params.g)) / params.m;
    let drot = state.rot.matrix() * hat(&state.omega);
    let j_omega = params.inertia() * state.omega;
    let domega = Vec3::new(
        (cmd.tau.x - (state.omega.cross(&j_omega)).x) / params.j.x,
        (cmd.tau.y - (state.omega.cross(&j_omega)).y) / params.j.y,
        (cmd.tau.z - (state.omega.cross(&j_omega)).z) / params.j.z,
    );
    StateDerivative {
        dr: state.v,
        dv,
        drot,
        domega,
    }
}

/// Classical four-stage Runge-Kutta step with zero-order-hold command, with
/// the attitude reorthonormalized afterwards.
pub fn rk4_step<T: Real>(
    state: &RigidState<T>,
    cmd: &ControlCommand<T>,
    dt: T,
    params: &VehicleParams<T>,
) -> Result<RigidState<T>> {
    let advance = |s: &RigidState<T>, d: &StateDerivative<T>, h: T| RigidState {
        r: s.r + d.dr * h,
        v: s.v + d.dv * h,
        rot: Rotation::from_matrix_unchecked(s.rot.matrix() + d.drot * h),
        omega: s.omega + d.domega * h,
    };
    let half = dt * real::<T>(0.5);
    let k1 = dynamics(state, cmd, params);
    let k2 = dynamics(&advance(state, &k1, half), cmd, params);
    let k3 = dynamics(&advance(state, &k2, half), cmd, params);
    let k4 = dynamics(&advance(state, &k3, dt), cmd, params);
    let sixth = dt / real::<T>(6.0);
    let two = real::<T>(2.0);
    let combined = StateDerivative {
        dr: (k1.dr + k2.dr * two + k3.dr * two + k4.dr) * sixth,
        dv: (k1.dv + k2.dv * two + k3.dv * two + k4.dv) * sixth,
        drot: (k1.drot + k2.drot * two + k3.drot * two + k4.drot) * sixth,
        domega: (k1.domega + k2.domega * two + k3.domega * two + k4.domega) * sixth,
    };
    let raw = state.rot.matrix() + combined.drot;
    Ok(RigidState {
        r: state.r + combined.dr,
        v: state.v + combined.dv,
        rot: geom::reorthonormalize(&raw)?,
        omega: state.omega + combined.domega,
    })
}
