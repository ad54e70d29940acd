//! Outer PID loop: position error to desired acceleration, translational
//! tilt commands, collective speed and desired attitude.

use serde::{Deserialize, Serialize};

use crate::dynamics::{RigidBodyState, VehicleParams};
use crate::error::{Error, Result};
use crate::quat::{Quaternion, Vec3};

/// Smallest admissible `Σ cos θi` before [`hover_speed`] refuses.
pub const EPS_COS: f64 = 0.1;

pub const DEFAULT_CAPTURE_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionGains {
    pub kp: Vec3,
    pub ki: Vec3,
    pub kd: Vec3,
    /// Gains of the Δθ_x, Δθ_y rows, acting on the x and y errors.
    pub kp_tilt: [f64; 2],
    pub ki_tilt: [f64; 2],
    pub kd_tilt: [f64; 2],
    /// Bound on each integral state (m·s).
    pub integral_clamp: f64,
}

impl Default for PositionGains {
    fn default() -> Self {
        Self {
            kp: Vec3::new(0.25, 0.25, 4.0),
            ki: Vec3::new(0.0, 0.0, 1.0),
            kd: Vec3::new(0.7, 0.7, 3.0),
            kp_tilt: [0.02, 0.02],
            ki_tilt: [0.0, 0.0],
            kd_tilt: [0.05, 0.05],
            integral_clamp: 2.0,
        }
    }
}

impl PositionGains {
    pub fn validate(&self) -> Result<()> {
        let all = self
            .kp
            .to_array()
            .into_iter()
            .chain(self.ki.to_array())
            .chain(self.kd.to_array())
            .chain(self.kp_tilt)
            .chain(self.ki_tilt)
            .chain(self.kd_tilt);
        for g in all {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::Config("position_gains must be non-negative".into()));
            }
        }
        if !(self.integral_clamp > 0.0 && self.integral_clamp.is_finite()) {
            return Err(Error::Config("position_gains.integral_clamp must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionSetpoint {
    pub target: Vec3,
    pub yaw_des: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionCommand {
    pub accel_des: Vec3,
    /// (Δθ_x, Δθ_y)
    pub d_tilt_xy: [f64; 2],
    pub omega_h: f64,
    pub q_des: Quaternion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidOutput {
    pub accel_des: Vec3,
    pub d_tilt_xy: [f64; 2],
    pub integrals: Vec3,
}

/// One PID update. Integrals advance by the rectangle rule and are clamped
/// before use; the z row carries the gravity feed-forward.
pub fn pid_update(
    errors: Vec3,
    error_rates: Vec3,
    integrals: Vec3,
    gains: &PositionGains,
    gravity: f64,
    dt: f64,
) -> Result<PidOutput> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    let c = gains.integral_clamp;
    let i = integrals + errors * dt;
    let i = Vec3::new(i.x.clamp(-c, c), i.y.clamp(-c, c), i.z.clamp(-c, c));
    let accel_des = errors.component_mul(gains.kp)
        + i.component_mul(gains.ki)
        + error_rates.component_mul(gains.kd)
        + Vec3::new(0.0, 0.0, gravity);
    let tilt = |k: usize, e: f64, ed: f64, ie: f64| gains.kp_tilt[k] * e + gains.ki_tilt[k] * ie + gains.kd_tilt[k] * ed;
    Ok(PidOutput {
        accel_des,
        d_tilt_xy: [tilt(0, errors.x, error_rates.x, i.x), tilt(1, errors.y, error_rates.y, i.y)],
        integrals: i,
    })
}

/// Collective speed `√(m r̈z / (k_f Σ cos θi))`.
pub fn hover_speed(accel_z_des: f64, tilts: [f64; 4], params: &VehicleParams) -> Result<f64> {
    let cos_sum: f64 = tilts.iter().map(|t| t.cos()).sum();
    if !(cos_sum > EPS_COS) {
        return Err(Error::TiltSingularity(cos_sum));
    }
    if !(accel_z_des > 0.0) {
        return Err(Error::NegativeThrustDemand(accel_z_des));
    }
    Ok((params.mass * accel_z_des / (params.k_f * cos_sum)).sqrt())
}

fn axis_angle(axis: Vec3, angle: f64) -> Quaternion {
    let (s, c) = (0.5 * angle).sin_cos();
    Quaternion::from_scalar_vector(c, axis * s)
}

/// Minimal rotation taking `a_body` onto `accel_des`, followed by a twist
/// about the aligned axis chosen so the body x-axis heads along `yaw_des`.
///
/// The twist is appended on the body side (`q̃ ⊗ q_twist(â_b, δ)`), which
/// leaves `â_b → â_i` untouched for any δ. When `â_b` is body z this is an
/// ordinary z rotation of the body.
pub fn desired_quaternion(a_body: Vec3, accel_des: Vec3, yaw_des: f64) -> Result<Quaternion> {
    let k = a_body.normalized()?;
    accel_des.normalized()?;
    let q_tilt = Quaternion::from_two_vectors(a_body, accel_des)?;

    // body x-axis after the twist: x(δ) = R̃[k kx + (e_x − k kx) cos δ + (k × e_x) sin δ]
    let kx = k.x;
    let c0 = q_tilt.rotate(k * kx)?;
    let c1 = q_tilt.rotate(Vec3::X - k * kx)?;
    let c2 = q_tilt.rotate(k.cross(Vec3::X))?;
    let (sy, cy) = yaw_des.sin_cos();
    let lateral = Vec3::new(-sy, cy, 0.0);
    let heading = Vec3::new(cy, sy, 0.0);

    // solve a cos δ + b sin δ = −c for zero lateral component
    let (a, b, c) = (c1.dot(lateral), c2.dot(lateral), c0.dot(lateral));
    let r = a.hypot(b);
    if r < 1e-12 {
        // body x-axis cannot be steered horizontally; keep the minimal rotation
        return q_tilt.normalize();
    }
    let phase = b.atan2(a);
    let spread = (-c / r).clamp(-1.0, 1.0).acos();
    let forward = |d: f64| (c0 + c1 * d.cos() + c2 * d.sin()).dot(heading);
    let (d1, d2) = (phase + spread, phase - spread);
    let delta = if forward(d1) >= forward(d2) { d1 } else { d2 };

    q_tilt.multiply(axis_angle(k, delta)).normalize()
}

/// Errors, PID, collective speed and desired attitude for one control tick.
/// Returns the command together with the updated integral state.
pub fn position_step(
    state: &RigidBodyState,
    setpoint: &PositionSetpoint,
    integrals: Vec3,
    tilts: [f64; 4],
    gains: &PositionGains,
    params: &VehicleParams,
    dt: f64,
) -> Result<(PositionCommand, Vec3)> {
    let errors = setpoint.target - state.position;
    let pid = pid_update(errors, -state.velocity, integrals, gains, params.gravity, dt)?;
    let omega_h = hover_speed(pid.accel_des.z, tilts, params)?;
    let q_des = desired_quaternion(Vec3::Z, pid.accel_des, setpoint.yaw_des)?;
    Ok((
        PositionCommand {
            accel_des: pid.accel_des,
            d_tilt_xy: pid.d_tilt_xy,
            omega_h,
            q_des,
        },
        pid.integrals,
    ))
}

/// Horizontal distance between two points.
pub fn horizontal_distance(a: Vec3, b: Vec3) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Advance past the current waypoint once within `capture_radius`
/// horizontally; the last waypoint is held.
pub fn waypoint_advance(position: Vec3, mission: &[Vec3], index: usize, capture_radius: f64) -> usize {
    match mission.get(index) {
        Some(&wp) if index + 1 < mission.len() && horizontal_distance(position, wp) < capture_radius => index + 1,
        _ => index,
    }
}
