//! Nonlinear 6-DOF rigid-body model of the tilt-rotor quadcopter.
//!
//! Rotor `i` produces thrust `F_i = k_f ω_i²` and drag moment `M_i = k_m ω_i²`
//! and can tilt by `θ_i` about its arm. Translational motion is integrated in
//! the inertial frame (z up), rotational motion in the body frame. Rotor spin
//! directions are implied by the signs of the yaw-moment row of
//! [`body_torque`]; no separate spin parameter exists.

use std::f64::consts::FRAC_PI_6;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::{Quaternion, Vec3};

/// Magnitude beyond which any state component is treated as divergence.
pub const DIVERGENCE_BOUND: f64 = 1e6;

/// Default integration step (s).
pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    /// kg
    pub mass: f64,
    /// m
    pub arm_length: f64,
    /// N·s²/rad²
    pub k_f: f64,
    /// N·m·s²/rad²
    pub k_m: f64,
    /// kg·m²
    pub i_xx: f64,
    pub i_yy: f64,
    pub i_zz: f64,
    /// m/s²
    pub gravity: f64,
    /// rad/s
    pub omega_max: f64,
    /// rad
    pub tilt_max: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self::reference()
    }
}

impl VehicleParams {
    /// The 1.56 kg reference airframe used throughout the simulations.
    pub const fn reference() -> Self {
        Self {
            mass: 1.56,
            arm_length: 0.12,
            k_f: 2.2e-4,
            k_m: 5.4e-6,
            i_xx: 0.0449,
            i_yy: 0.0449,
            i_zz: 0.0899,
            gravity: 9.81,
            omega_max: 400.0,
            tilt_max: FRAC_PI_6,
        }
    }

    pub fn inertia(&self) -> Vec3 {
        Vec3::new(self.i_xx, self.i_yy, self.i_zz)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass),
            ("arm_length", self.arm_length),
            ("k_f", self.k_f),
            ("k_m", self.k_m),
            ("i_xx", self.i_xx),
            ("i_yy", self.i_yy),
            ("i_zz", self.i_zz),
            ("gravity", self.gravity),
            ("omega_max", self.omega_max),
            ("tilt_max", self.tilt_max),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Config(format!("vehicle.{name} must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

/// The eight physical inputs: rotor speeds (rad/s) and rotor tilts (rad).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActuatorCommand {
    pub omega: [f64; 4],
    pub tilt: [f64; 4],
}

impl ActuatorCommand {
    pub fn uniform(omega: f64) -> Self {
        Self {
            omega: [omega; 4],
            tilt: [0.0; 4],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidBodyState {
    /// Inertial position (m), z up.
    pub position: Vec3,
    /// Inertial velocity (m/s).
    pub velocity: Vec3,
    /// Body-to-inertial attitude.
    pub attitude: Quaternion,
    /// Body rates (p, q, r) in rad/s.
    pub rates: Vec3,
}

impl RigidBodyState {
    pub fn at_rest(position: Vec3) -> Self {
        Self {
            position,
            ..Self::default()
        }
    }

    fn advanced(&self, d: &StateDerivative, h: f64) -> RigidBodyState {
        RigidBodyState {
            position: self.position + d.velocity * h,
            velocity: self.velocity + d.acceleration * h,
            attitude: self.attitude + d.attitude_rate.scale(h),
            rates: self.rates + d.angular_acceleration * h,
        }
    }

    fn check_bounded(&self) -> Result<()> {
        let finite = self.position.is_finite()
            && self.velocity.is_finite()
            && self.attitude.is_finite()
            && self.rates.is_finite();
        let largest = self
            .position
            .max_abs()
            .max(self.velocity.max_abs())
            .max(self.rates.max_abs());
        if !finite || largest > DIVERGENCE_BOUND {
            return Err(Error::NumericalDivergence(format!(
                "state component magnitude {largest:e} exceeds {DIVERGENCE_BOUND:e}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateDerivative {
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub attitude_rate: Quaternion,
    pub angular_acceleration: Vec3,
}

impl StateDerivative {
    fn weighted_sum(parts: [(&StateDerivative, f64); 4]) -> StateDerivative {
        let mut out = StateDerivative {
            attitude_rate: Quaternion::new(0.0, 0.0, 0.0, 0.0),
            ..StateDerivative::default()
        };
        for (d, w) in parts {
            out.velocity += d.velocity * w;
            out.acceleration += d.acceleration * w;
            out.attitude_rate = out.attitude_rate + d.attitude_rate.scale(w);
            out.angular_acceleration += d.angular_acceleration * w;
        }
        out
    }
}

/// Thrust and drag moment of a single rotor.
pub fn rotor_force_moment(omega: f64, params: &VehicleParams) -> Result<(f64, f64)> {
    if omega < 0.0 {
        return Err(Error::NegativeSpeed(omega));
    }
    let w2 = omega * omega;
    Ok((params.k_f * w2, params.k_m * w2))
}

fn forces_moments(cmd: &ActuatorCommand, params: &VehicleParams) -> ([f64; 4], [f64; 4]) {
    let f = cmd.omega.map(|w| params.k_f * w * w);
    let m = cmd.omega.map(|w| params.k_m * w * w);
    (f, m)
}

/// Total rotor force in the body frame divided by mass (m/s²).
pub fn body_specific_force(cmd: &ActuatorCommand, params: &VehicleParams) -> Vec3 {
    let (f, _) = forces_moments(cmd, params);
    let (s, c) = (cmd.tilt.map(f64::sin), cmd.tilt.map(f64::cos));
    Vec3::new(
        f[1] * s[1] + f[3] * s[3],
        -f[0] * s[0] - f[2] * s[2],
        f[0] * c[0] + f[1] * c[1] + f[2] * c[2] + f[3] * c[3],
    ) / params.mass
}

/// Inertial acceleration: rotor force rotated into the inertial frame, minus gravity.
pub fn translational_accel(
    state: &RigidBodyState,
    cmd: &ActuatorCommand,
    params: &VehicleParams,
) -> Result<Vec3> {
    let inertial = state.attitude.rotate(body_specific_force(cmd, params))?;
    Ok(inertial - Vec3::new(0.0, 0.0, params.gravity))
}

/// Body torque (N·m) from rotor thrusts, drag moments and tilts.
pub fn body_torque(cmd: &ActuatorCommand, params: &VehicleParams) -> Vec3 {
    let (f, m) = forces_moments(cmd, params);
    let (s, c) = (cmd.tilt.map(f64::sin), cmd.tilt.map(f64::cos));
    let l = params.arm_length;
    Vec3::new(
        l * (f[1] * c[1] - f[3] * c[3]) + m[1] * s[1] + m[3] * s[3],
        l * (f[2] * c[2] - f[0] * c[0]) + m[2] * s[2] + m[0] * s[0],
        l * (-f[0] * s[0] - f[1] * s[1] + f[2] * s[2] + f[3] * s[3]) - m[0] * c[0] + m[1] * c[1]
            - m[2] * c[2]
            + m[3] * c[3],
    )
}

/// Euler's rotation equation `Ω̇ = I⁻¹(τ − Ω × IΩ)` with the gyroscopic term retained.
pub fn angular_accel(tau: Vec3, rates: Vec3, params: &VehicleParams) -> Vec3 {
    let inertia = params.inertia();
    let gyro = rates.cross(rates.component_mul(inertia));
    let net = tau - gyro;
    Vec3::new(net.x / inertia.x, net.y / inertia.y, net.z / inertia.z)
}

/// Time derivative of the full state under a fixed actuator command.
///
/// Runge–Kutta stage states carry slightly non-unit attitudes; the frame
/// rotation uses the normalized attitude while the kinematics use the raw one.
pub fn state_derivative(
    state: &RigidBodyState,
    cmd: &ActuatorCommand,
    params: &VehicleParams,
) -> Result<StateDerivative> {
    let unit = RigidBodyState {
        attitude: state.attitude.normalize()?,
        ..*state
    };
    Ok(StateDerivative {
        velocity: state.velocity,
        acceleration: translational_accel(&unit, cmd, params)?,
        attitude_rate: state.attitude.derivative(state.rates),
        angular_acceleration: angular_accel(body_torque(cmd, params), state.rates, params),
    })
}

/// One classical RK4 step of `dx/dt = f(x)`, followed by attitude
/// renormalization and a divergence check.
///
/// `f` is evaluated at every stage, so a feedback law placed inside it acts as
/// a continuous-time controller.
pub fn rk4_step<F>(state: &RigidBodyState, dt: f64, mut f: F) -> Result<RigidBodyState>
where
    F: FnMut(&RigidBodyState) -> Result<StateDerivative>,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("integration step must be positive, got {dt}")));
    }
    let k1 = f(state)?;
    let k2 = f(&state.advanced(&k1, 0.5 * dt))?;
    let k3 = f(&state.advanced(&k2, 0.5 * dt))?;
    let k4 = f(&state.advanced(&k3, dt))?;
    let slope = StateDerivative::weighted_sum([
        (&k1, 1.0 / 6.0),
        (&k2, 1.0 / 3.0),
        (&k3, 1.0 / 3.0),
        (&k4, 1.0 / 6.0),
    ]);
    let mut next = state.advanced(&slope, dt);
    next.check_bounded()?;
    next.attitude = next.attitude.normalize()?;
    Ok(next)
}

/// Advance the state by `dt` holding `cmd` constant.
pub fn step(
    state: &RigidBodyState,
    cmd: &ActuatorCommand,
    dt: f64,
    params: &VehicleParams,
) -> Result<RigidBodyState> {
    rk4_step(state, dt, |s| state_derivative(s, cmd, params))
}

/// Saturate rotor speeds to `[0, omega_max]` and tilts to `[-tilt_max, tilt_max]`.
pub fn clamp_command(cmd: &ActuatorCommand, params: &VehicleParams) -> ActuatorCommand {
    ActuatorCommand {
        omega: cmd.omega.map(|w| w.clamp(0.0, params.omega_max)),
        tilt: cmd.tilt.map(|t| t.clamp(-params.tilt_max, params.tilt_max)),
    }
}
