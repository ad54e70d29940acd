//! Quaternion algebra, attitude kinematics and Euler-angle conversion.
//!
//! Conventions: Hamilton product (i·j = k), scalar-first storage, and
//! body-to-inertial rotation written as `q ⊗ (0, v) ⊗ q*`.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm below which a quaternion cannot be normalized.
pub const EPS_NORM: f64 = 1e-9;
/// Allowed deviation of `‖q‖` from 1 for operations that require a unit quaternion.
pub const UNIT_TOLERANCE: f64 = 1e-9;
/// Guard on `1 + â·b̂` in [`Quaternion::from_two_vectors`].
pub const EPS_ALIGN: f64 = 1e-6;

/// Three-component vector. Units depend on context (m, m/s, rad/s, N·m, ...).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Component-wise product, used for diagonal gain and inertia matrices.
    pub fn component_mul(self, other: Vec3) -> Vec3 {
        Vec3::new(self.x * other.x, self.y * other.y, self.z * other.z)
    }

    pub fn normalized(self) -> Result<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Ok(self / n)
        } else {
            Err(Error::ZeroVector)
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Roll, pitch, yaw in radians (Z-Y-X sequence).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerAngles {
    pub const fn new(phi: f64, theta: f64, psi: f64) -> Self {
        Self { phi, theta, psi }
    }
}

/// Quaternion `q0 + q1·i + q2·j + q3·k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl Default for Quaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl From<[f64; 4]> for Quaternion {
    fn from(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        q.to_array()
    }
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);

    pub const fn new(q0: f64, q1: f64, q2: f64, q3: f64) -> Self {
        Self { q0, q1, q2, q3 }
    }

    /// Pure quaternion `(0, v)`.
    pub const fn pure(v: Vec3) -> Self {
        Self::new(0.0, v.x, v.y, v.z)
    }

    pub fn from_scalar_vector(s: f64, v: Vec3) -> Self {
        Self::new(s, v.x, v.y, v.z)
    }

    pub fn vector(self) -> Vec3 {
        Vec3::new(self.q1, self.q2, self.q3)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.q0, self.q1, self.q2, self.q3]
    }

    pub fn dot(self, o: Quaternion) -> f64 {
        self.q0 * o.q0 + self.q1 * o.q1 + self.q2 * o.q2 + self.q3 * o.q3
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> Quaternion {
        Quaternion::new(self.q0 * s, self.q1 * s, self.q2 * s, self.q3 * s)
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    /// Hamilton product `self ⊗ rhs`.
    pub fn multiply(self, rhs: Quaternion) -> Quaternion {
        let (a0, av) = (self.q0, self.vector());
        let (b0, bv) = (rhs.q0, rhs.vector());
        Quaternion::from_scalar_vector(a0 * b0 - av.dot(bv), b0 * av + a0 * bv + av.cross(bv))
    }

    pub fn conjugate(self) -> Quaternion {
        Quaternion::new(self.q0, -self.q1, -self.q2, -self.q3)
    }

    pub fn normalize(self) -> Result<Quaternion> {
        let n = self.norm();
        if !(n > EPS_NORM) || !n.is_finite() {
            return Err(Error::DegenerateQuaternion { norm: n });
        }
        Ok(self.scale(1.0 / n))
    }

    /// Returns `self` or `-self`, whichever has a non-negative scalar part.
    pub fn canonical(self) -> Quaternion {
        if self.q0 < 0.0 {
            self.scale(-1.0)
        } else {
            self
        }
    }

    /// Fails with [`Error::NonUnitQuaternion`] unless `‖self‖` is within
    /// [`UNIT_TOLERANCE`] of 1.
    pub fn ensure_unit(self) -> Result<Quaternion> {
        let n = self.norm();
        if (n - 1.0).abs() <= UNIT_TOLERANCE {
            Ok(self)
        } else {
            Err(Error::NonUnitQuaternion { norm: n })
        }
    }

    /// Attitude kinematics `q̇ = ½ q ⊗ (0, Ω)` with `Ω` the body rates.
    pub fn derivative(self, omega: Vec3) -> Quaternion {
        self.multiply(Quaternion::pure(omega)).scale(0.5)
    }

    /// Body-to-inertial rotation of `v`: vector part of `q ⊗ (0, v) ⊗ q*`.
    pub fn rotate(self, v: Vec3) -> Result<Vec3> {
        self.ensure_unit()?;
        Ok(self
            .multiply(Quaternion::pure(v))
            .multiply(self.conjugate())
            .vector())
    }

    /// Inertial-to-body rotation, the inverse of [`Quaternion::rotate`].
    pub fn rotate_inverse(self, v: Vec3) -> Result<Vec3> {
        self.conjugate().rotate(v)
    }

    pub fn to_euler(self) -> Result<EulerAngles> {
        self.ensure_unit()?;
        let Quaternion { q0, q1, q2, q3 } = self;
        let phi = (2.0 * (q0 * q1 + q2 * q3)).atan2(1.0 - 2.0 * (q1 * q1 + q2 * q2));
        let theta = (2.0 * (q0 * q2 - q3 * q1)).clamp(-1.0, 1.0).asin();
        let psi = (2.0 * (q0 * q3 + q1 * q2)).atan2(1.0 - 2.0 * (q2 * q2 + q3 * q3));
        Ok(EulerAngles { phi, theta, psi })
    }

    /// Z-Y-X composition `q_z(ψ) ⊗ q_y(θ) ⊗ q_x(φ)`; inverse of [`Quaternion::to_euler`]
    /// away from gimbal lock.
    pub fn from_euler(e: EulerAngles) -> Quaternion {
        let (sr, cr) = (0.5 * e.phi).sin_cos();
        let (sp, cp) = (0.5 * e.theta).sin_cos();
        let (sy, cy) = (0.5 * e.psi).sin_cos();
        Quaternion::new(
            cr * cp * cy + sr * sp * sy,
            sr * cp * cy - cr * sp * sy,
            cr * sp * cy + sr * cp * sy,
            cr * cp * sy - sr * sp * cy,
        )
    }

    /// Rotation about the z axis by `angle` radians.
    pub fn about_z(angle: f64) -> Quaternion {
        let (s, c) = (0.5 * angle).sin_cos();
        Quaternion::new(c, 0.0, 0.0, s)
    }

    /// Shortest-arc unit quaternion rotating the direction of `a` onto the
    /// direction of `b`.
    pub fn from_two_vectors(a: Vec3, b: Vec3) -> Result<Quaternion> {
        let a = a.normalized()?;
        let b = b.normalized()?;
        let cos_sum = 1.0 + a.dot(b);
        if cos_sum < EPS_ALIGN {
            return Err(Error::AntiparallelVectors { cos_sum });
        }
        let q = Quaternion::from_scalar_vector(cos_sum, a.cross(b)).scale(1.0 / (2.0 * cos_sum).sqrt());
        // Exact arithmetic gives a unit result; this only removes round-off.
        q.normalize()
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        self.multiply(rhs)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.q0 + o.q0, self.q1 + o.q1, self.q2 + o.q2, self.q3 + o.q3)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.q0 - o.q0, self.q1 - o.q1, self.q2 - o.q2, self.q3 - o.q3)
    }
}
