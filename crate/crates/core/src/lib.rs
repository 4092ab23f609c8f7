//! Quadcopter flight dynamics and Euler-angle-free trajectory tracking.
//!
//! The library models a "+"-configuration quadcopter (rotor mixer, rigid-body
//! dynamics, fixed-step RK4 integration) and implements two flatness-based
//! position/yaw tracking controllers formulated purely with rotation matrices
//! and a heading vector, with no Euler angles anywhere in the control path:
//!
//! * a snap controller: parallel position and yaw loops commanding the fourth
//!   position derivative and second yaw derivative, with stored thrust state,
//! * a geometric controller: cascaded position and attitude loops with the
//!   vee-map attitude error.
//!
//! Supporting machinery includes analytic helix/hover reference trajectories
//! (derivatives through snap), differential-flatness maps from flat outputs to
//! attitude/thrust/angular rates, pole-placement gain synthesis, a closed-loop
//! simulation harness with rotor-saturation sweeps, and a decentralized
//! leader/follower affine-formation layer.
//!
//! All numerics are generic over the scalar type; `f64` aliases live at the
//! crate root.

pub mod error;
pub mod flatness;
pub mod formation;
pub mod geom;
pub mod mellinger;
pub mod sim;
pub mod snap;
pub mod traj;
pub mod tuning;
pub mod vehicle;

pub use error::Error;

/// Scalar type the whole crate is generic over: `f32` or `f64`.
pub trait Real:
    nalgebra::RealField + num_traits::FromPrimitive + num_traits::ToPrimitive + Copy
{
}

impl<T> Real for T where
    T: nalgebra::RealField + num_traits::FromPrimitive + num_traits::ToPrimitive + Copy
{
}

pub type Vec3<T> = nalgebra::Vector3<T>;
pub type Mat3<T> = nalgebra::Matrix3<T>;

/// Lift an `f64` literal into the generic scalar.
pub(crate) fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable in scalar type")
}

// Concrete aliases for the common double-precision instantiation.
pub type Rotation64 = geom::Rotation<f64>;
pub type Heading64 = geom::Heading<f64>;
pub type VehicleParams64 = vehicle::VehicleParams<f64>;
pub type RigidState64 = vehicle::RigidState<f64>;
pub type ControlCommand64 = vehicle::ControlCommand<f64>;
pub type FlatSample64 = traj::FlatSample<f64>;
pub type FlatOutputs64 = flatness::FlatOutputs<f64>;
pub type SnapGains64 = snap::SnapGains<f64>;
pub type MellingerGains64 = mellinger::MellingerGains<f64>;
pub type SimConfig64 = sim::SimConfig<f64>;
pub type SimLog64 = sim::SimLog<f64>;
