//! Reference-trajectory generators with analytic derivatives through snap.

use crate::error::{Error, Result};
use crate::{real, Real, Vec3};

/// A reference trajectory sample: position and its derivatives through the
/// fourth order, plus yaw, yaw rate, and yaw acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatSample<T: Real> {
    /// Position, m.
    pub r0: Vec3<T>,
    /// Velocity, m/s.
    pub r1: Vec3<T>,
    /// Acceleration, m/s^2.
    pub r2: Vec3<T>,
    /// Jerk, m/s^3.
    pub r3: Vec3<T>,
    /// Snap, m/s^4.
    pub r4: Vec3<T>,
    /// Yaw, rad.
    pub psi: T,
    /// Yaw rate, rad/s.
    pub psi1: T,
    /// Yaw acceleration, rad/s^2.
    pub psi2: T,
}

/// Yaw reference policy for generated trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum YawPolicy {
    /// Zero yaw with zero derivatives.
    #[default]
    Zero,
    /// Yaw follows the horizontal velocity direction.
    Tangent,
}

/// Activation polynomial `sigma(t) = -20 t^7 + 70 t^6 - 84 t^5 + 35 t^4` and
/// its first four derivatives. It rises from 0 to 1 on `[0, 1]` with zero
/// velocity, acceleration, and jerk at both ends.
pub fn sigma<T: Real>(t: T) -> Result<[T; 5]> {
    if t < T::zero() || t > T::one() {
        return Err(Error::OutOfDomain {
            value: t.to_f64().unwrap_or(f64::NAN),
            min: 0.0,
            max: 1.0,
        });
    }
    let c = |x: f64| real::<T>(x);
    let horner = |k: &[f64], low: u32| {
        // Evaluates (sum_i k_i t^i) * t^low with the coefficients ascending.
        let mut acc = T::zero();
        for &coeff in k.iter().rev() {
            acc = acc * t + c(coeff);
        }
        acc * t.powi(low as i32)
    };
    Ok([
        horner(&[35.0, -84.0, 70.0, -20.0], 4),
        horner(&[140.0, -420.0, 420.0, -140.0], 3),
        horner(&[420.0, -1680.0, 2100.0, -840.0], 2),
        horner(&[840.0, -5040.0, 8400.0, -4200.0], 1),
        horner(&[840.0, -10080.0, 25200.0, -16800.0], 0),
    ])
}

/// Duration-scaled activation `sigma_T(t) = T sigma(t/T)`, rising from 0 to
/// `T` over `[0, T]`; derivative n is `T^(1-n) sigma^(n)(t/T)`.
pub fn sigma_t<T: Real>(t: T, duration: T) -> Result<[T; 5]> {
    if duration <= T::zero() {
        return Err(Error::OutOfDomain {
            value: duration.to_f64().unwrap_or(f64::NAN),
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let s = sigma(t / duration)?;
    let mut out = [T::zero(); 5];
    let mut scale = duration;
    for n in 0..5 {
        out[n] = s[n] * scale;
        scale = scale / duration;
    }
    Ok(out)
}

/// Helix benchmark trajectory
/// `r(t) = [cos(Omega sigma_T(t)), sin(Omega sigma_T(t)), 0.1 sigma_T(t)]`,
/// with derivatives through snap composed in closed form.
pub fn helix<T: Real>(omega: T, t: T, duration: T, yaw: YawPolicy) -> Result<FlatSample<T>> {
    let s = sigma_t(t, duration)?;
    let theta = omega * s[0];
    let th1 = omega * s[1];
    let th2 = omega * s[2];
    let th3 = omega * s[3];
    let th4 = omega * s[4];
    let (sin, cos) = (theta.sin(), theta.cos());
    let c = |x: f64| real::<T>(x);

    // Chain rule for cos(theta(t)) and sin(theta(t)) through order four.
    let x0 = cos;
    let x1 = -sin * th1;
    let x2 = -cos * th1 * th1 - sin * th2;
    let x3 = sin * th1 * th1 * th1 - c(3.0) * cos * th1 * th2 - sin * th3;
    let x4 = cos * th1.powi(4) + c(6.0) * sin * th1 * th1 * th2 - c(3.0) * cos * th2 * th2
        - c(4.0) * cos * th1 * th3
        - sin * th4;
    let y0 = sin;
    let y1 = cos * th1;
    let y2 = -sin * th1 * th1 + cos * th2;
    let y3 = -cos * th1 * th1 * th1 - c(3.0) * sin * th1 * th2 + cos * th3;
    let y4 = sin * th1.powi(4) - c(6.0) * cos * th1 * th1 * th2 - c(3.0) * sin * th2 * th2
        - c(4.0) * sin * th1 * th3
        + cos * th4;
    let climb = c(0.1);

    let (psi, psi1, psi2) = match yaw {
        YawPolicy::Zero => (T::zero(), T::zero(), T::zero()),
        // The horizontal velocity of the unit circle leads the phase by 90
        // degrees; its angle and derivatives follow theta directly.
        YawPolicy::Tangent => (
            wrap_angle(theta + T::frac_pi_2()),
            th1,
            th2,
        ),
    };

    Ok(FlatSample {
        r0: Vec3::new(x0, y0, climb * s[0]),
        r1: Vec3::new(x1, y1, climb * s[1]),
        r2: Vec3::new(x2, y2, climb * s[2]),
        r3: Vec3::new(x3, y3, climb * s[3]),
        r4: Vec3::new(x4, y4, climb * s[4]),
        psi,
        psi1,
        psi2,
    })
}

/// Constant-position fixture with all derivatives zero.
pub fn hover<T: Real>(point: Vec3<T>, psi: T) -> FlatSample<T> {
    FlatSample {
        r0: point,
        r1: Vec3::zeros(),
        r2: Vec3::zeros(),
        r3: Vec3::zeros(),
        r4: Vec3::zeros(),
        psi,
        psi1: T::zero(),
        psi2: T::zero(),
    }
}

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::two_pi();
    let mut x = a;
    while x > T::pi() {
        x -= two_pi;
    }
    while x <= -T::pi() {
        x += two_pi;
    }
    x
}
