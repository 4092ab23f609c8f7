//! Rotation-matrix and heading-vector primitives. No Euler angles anywhere.
//!
//! The attitude is carried by the rotation matrix `R = [i_B  j_B  k_B]` whose
//! columns are the body axes expressed in the inertial frame, and yaw is
//! carried by the heading vector: the normalized projection of the body
//! forward axis `i_B` onto the horizontal plane.

use crate::error::{Error, Result};
use crate::{real, Mat3, Real, Vec3};

/// Orthonormality tolerance accepted when validating a rotation.
pub const ROTATION_TOL: f64 = 1e-9;
/// Frobenius distance within which a matrix is considered repairable.
pub const NEAR_ROTATION_TOL: f64 = 1e-3;
/// Divisor magnitude below which heading/flatness denominators are singular.
pub const SINGULARITY_TOL: f64 = 1e-9;

/// Inertial basis vector `i`.
pub fn e_x<T: Real>() -> Vec3<T> {
    Vec3::new(T::one(), T::zero(), T::zero())
}

/// Inertial basis vector `j`.
pub fn e_y<T: Real>() -> Vec3<T> {
    Vec3::new(T::zero(), T::one(), T::zero())
}

/// Inertial basis vector `k` (up).
pub fn e_z<T: Real>() -> Vec3<T> {
    Vec3::new(T::zero(), T::zero(), T::one())
}

/// A proper rotation matrix with columns `i_B`, `j_B`, `k_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation<T: Real> {
    m: Mat3<T>,
}

impl<T: Real> Rotation<T> {
    pub fn identity() -> Self {
        Self { m: Mat3::identity() }
    }

    /// Validates orthonormality and determinant before accepting `m`.
    pub fn from_matrix(m: Mat3<T>) -> Result<Self> {
        let tol = real::<T>(ROTATION_TOL);
        let gram = m.transpose() * m - Mat3::identity();
        let err = gram.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
        if err > tol {
            return Err(Error::NotNearRotation(err.to_f64().unwrap_or(f64::NAN)));
        }
        if (m.determinant() - T::one()).abs() > tol {
            return Err(Error::NotNearRotation(
                (m.determinant() - T::one()).abs().to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(Self { m })
    }

    /// Caller guarantees the matrix is a rotation.
    pub fn from_matrix_unchecked(m: Mat3<T>) -> Self {
        Self { m }
    }

    pub fn from_columns(i_b: Vec3<T>, j_b: Vec3<T>, k_b: Vec3<T>) -> Result<Self> {
        Self::from_matrix(Mat3::from_columns(&[i_b, j_b, k_b]))
    }

    pub fn matrix(&self) -> &Mat3<T> {
        &self.m
    }

    /// Body forward axis in inertial coordinates.
    pub fn i_b(&self) -> Vec3<T> {
        self.m.column(0).into()
    }

    /// Body left axis in inertial coordinates.
    pub fn j_b(&self) -> Vec3<T> {
        self.m.column(1).into()
    }

    /// Body up axis in inertial coordinates.
    pub fn k_b(&self) -> Vec3<T> {
        self.m.column(2).into()
    }

    /// Map body-frame coordinates to inertial coordinates.
    pub fn to_world(&self, body: &Vec3<T>) -> Vec3<T> {
        self.m * body
    }

    /// Map inertial coordinates to body-frame coordinates.
    pub fn to_body(&self, world: &Vec3<T>) -> Vec3<T> {
        self.m.transpose() * world
    }

    /// Rotation about the inertial `k` axis.
    pub fn about_z(angle: T) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        Self {
            m: Mat3::new(
                c,
                -s,
                T::zero(),
                s,
                c,
                T::zero(),
                T::zero(),
                T::zero(),
                T::one(),
            ),
        }
    }
}

/// Cross-product (hat) operator: `hat(v) * w == v x w`.
pub fn hat<T: Real>(v: &Vec3<T>) -> Mat3<T> {
    Mat3::new(
        T::zero(),
        -v.z,
        v.y,
        v.z,
        T::zero(),
        -v.x,
        -v.y,
        v.x,
        T::zero(),
    )
}

/// Vee map from skew-symmetric matrices to vectors, inverse of [`hat`]:
/// `[[0,a,b],[-a,0,c],[-b,-c,0]]` maps to `(-c, b, -a)`.
pub fn vee<T: Real>(m: &Mat3<T>) -> Result<Vec3<T>> {
    let sym = m + m.transpose();
    let err = sym.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
    if err > real::<T>(ROTATION_TOL) {
        return Err(Error::NonSkewInput(err.to_f64().unwrap_or(f64::NAN)));
    }
    let (a, b, c) = (m[(0, 1)], m[(0, 2)], m[(1, 2)]);
    Ok(Vec3::new(-c, b, -a))
}

/// Unit vector in the horizontal plane carrying the yaw of an attitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Heading<T: Real> {
    v: Vec3<T>,
}

impl<T: Real> Heading<T> {
    pub fn vector(&self) -> Vec3<T> {
        self.v
    }

    /// `k x h`, the horizontal axis orthogonal to the heading.
    pub fn horizontal_normal(&self) -> Vec3<T> {
        Vec3::new(-self.v.y, self.v.x, T::zero())
    }
}

/// Normalized horizontal projection of the body forward axis.
///
/// Fails when `i_B` points within tolerance of straight up or down, where the
/// projection (and therefore yaw) is undefined.
pub fn heading_of<T: Real>(r: &Rotation<T>) -> Result<Heading<T>> {
    let i_b = r.i_b();
    let n = (i_b.x * i_b.x + i_b.y * i_b.y).sqrt();
    if n <= real::<T>(SINGULARITY_TOL) {
        return Err(Error::DegenerateHeading);
    }
    Ok(Heading {
        v: Vec3::new(i_b.x / n, i_b.y / n, T::zero()),
    })
}

/// Principal angle of the heading, in `(-pi, pi]`.
pub fn yaw_of<T: Real>(h: &Heading<T>) -> T {
    h.v.y.atan2(h.v.x)
}

/// `h = cos(psi) i + sin(psi) j`.
pub fn heading_from_yaw<T: Real>(psi: T) -> Heading<T> {
    Heading {
        v: Vec3::new(psi.cos(), psi.sin(), T::zero()),
    }
}

/// Repair integrator drift: modified Gram-Schmidt on the columns, forward
/// axis first, with the remaining axes completed by cross products.
pub fn reorthonormalize<T: Real>(m: &Mat3<T>) -> Result<Rotation<T>> {
    let c0: Vec3<T> = m.column(0).into();
    let c1: Vec3<T> = m.column(1).into();
    let n0 = c0.norm();
    if n0 <= real::<T>(SINGULARITY_TOL) {
        return Err(Error::NotNearRotation(f64::INFINITY));
    }
    let i_b = c0 / n0;
    let j_raw = c1 - i_b * i_b.dot(&c1);
    let n1 = j_raw.norm();
    if n1 <= real::<T>(SINGULARITY_TOL) {
        return Err(Error::NotNearRotation(f64::INFINITY));
    }
    let j_b = j_raw / n1;
    let k_b = i_b.cross(&j_b);
    let r = Mat3::from_columns(&[i_b, j_b, k_b]);
    let dist = (m - r).norm();
    if dist > real::<T>(NEAR_ROTATION_TOL) {
        return Err(Error::NotNearRotation(dist.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(Rotation { m: r })
}

/// Rodrigues rotation `exp(hat(v))`.
pub fn exp_hat<T: Real>(v: &Vec3<T>) -> Mat3<T> {
    let theta = v.norm();
    if theta <= real::<T>(1e-8) {
        // Second-order series; adequate below sqrt(eps).
        return Mat3::identity() + hat(v) + hat(v) * hat(v) * real::<T>(0.5);
    }
    let axis = v / theta;
    let k = hat(&axis);
    Mat3::identity() + k * theta.sin() + k * k * (T::one() - theta.cos())
}
