//! Quaternion-error attitude feedback and the Lyapunov monitor.
//!
//! Two error quaternions appear here. [`error_quaternion`] is
//! `q_des ⊗ q*`, the rotation from the current to the desired attitude
//! expressed in the inertial frame; it is what gets logged. The feedback laws
//! act on [`body_error_quaternion`], `q_des* ⊗ q`, whose kinematics are
//! `q̇_err = ½ q_err ⊗ (0, Ω_err)`. Its vector part `ε` is positive about an
//! axis when the vehicle has rotated past the target about that axis, so
//! `−k ε` is restoring. Both share the same scalar part.

use serde::{Deserialize, Serialize};

use crate::allocation::VirtualControlVector;
use crate::dynamics::{ActuatorCommand, VehicleParams};
use crate::error::{Error, Result};
use crate::quat::{Quaternion, Vec3};

/// Diagonal gains of the speed and tilt feedback channels, per body axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttitudeGains {
    /// Quaternion-error gain on the speed channels (rad/s per unit ε).
    pub k_q: Vec3,
    /// Rate gain on the speed channels (rad/s per rad/s).
    pub k_w: Vec3,
    /// Quaternion-error gain on the tilt channels (rad per unit ε).
    pub k_q_tilt: Vec3,
    /// Rate gain on the tilt channels (rad per rad/s).
    pub k_w_tilt: Vec3,
}

impl Default for AttitudeGains {
    /// Tuned for the reference airframe. Roll and pitch rely on the speed
    /// channels; yaw relies on the tilt channel, whose authority at trim is
    /// roughly 300 times that of the differential drag moment.
    fn default() -> Self {
        Self {
            k_q: Vec3::new(30.0, 30.0, 15.0),
            k_w: Vec3::new(12.0, 12.0, 4.0),
            k_q_tilt: Vec3::new(0.2, 0.2, 0.3),
            k_w_tilt: Vec3::new(0.05, 0.05, 0.12),
        }
    }
}

impl AttitudeGains {
    pub fn validate(&self) -> Result<()> {
        for (name, g) in [
            ("k_q", self.k_q),
            ("k_w", self.k_w),
            ("k_q_tilt", self.k_q_tilt),
            ("k_w_tilt", self.k_w_tilt),
        ] {
            if !g.to_array().iter().all(|&v| v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("attitude_gains.{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Scalar gains `k_Q`, `k_Ω` of the torque-level law and of the Lyapunov function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovGains {
    /// N·m per unit ε
    pub k_q: f64,
    /// N·m·s
    pub k_omega: f64,
}

impl Default for LyapunovGains {
    fn default() -> Self {
        Self {
            k_q: 0.36,
            k_omega: 0.16,
        }
    }
}

impl LyapunovGains {
    pub fn validate(&self) -> Result<()> {
        if self.k_q > 0.0 && self.k_omega > 0.0 && self.k_q.is_finite() && self.k_omega.is_finite() {
            Ok(())
        } else {
            Err(Error::Config("lyapunov_gains must be positive".into()))
        }
    }
}

/// Speed increments (Δω_φ, Δω_θ, Δω_ψ) and tilt increments (Δθ_φ, Δθ_θ, Δθ_ψ).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VirtualAttitudeControls {
    pub d_omega: Vec3,
    pub d_tilt: Vec3,
}

impl VirtualAttitudeControls {
    /// Place the attitude channels into a full virtual-control vector,
    /// together with the translational tilt commands.
    pub fn with_translation(self, x_tilt: f64, y_tilt: f64) -> VirtualControlVector {
        VirtualControlVector {
            roll_speed: self.d_omega.x,
            pitch_speed: self.d_omega.y,
            yaw_speed: self.d_omega.z,
            roll_tilt: self.d_tilt.x,
            pitch_tilt: self.d_tilt.y,
            yaw_tilt: self.d_tilt.z,
            x_tilt,
            y_tilt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LyapunovSample {
    pub v: f64,
    pub v_dot: f64,
    pub t: f64,
}

/// `q_des ⊗ q*`, renormalized, with non-negative scalar part.
pub fn error_quaternion(q_des: Quaternion, q: Quaternion) -> Result<Quaternion> {
    q_des.ensure_unit()?;
    q.ensure_unit()?;
    Ok(q_des.multiply(q.conjugate()).normalize()?.canonical())
}

/// `q_des* ⊗ q`, renormalized, with non-negative scalar part.
pub fn body_error_quaternion(q_des: Quaternion, q: Quaternion) -> Result<Quaternion> {
    q_des.ensure_unit()?;
    q.ensure_unit()?;
    Ok(q_des.conjugate().multiply(q).normalize()?.canonical())
}

/// `Δω = −k_q ε − k_w Ω`, `Δθ = −k_q' ε − k_w' Ω` with diagonal gains.
pub fn attitude_law(q_err: Quaternion, rates: Vec3, gains: &AttitudeGains) -> VirtualAttitudeControls {
    let eps = q_err.vector();
    VirtualAttitudeControls {
        d_omega: -eps.component_mul(gains.k_q) - rates.component_mul(gains.k_w),
        d_tilt: -eps.component_mul(gains.k_q_tilt) - rates.component_mul(gains.k_w_tilt),
    }
}

/// Torque-level tracking law
/// `τ = −k_Q ε − k_Ω Ω_err + I Ω̇_des − I(Ω × Ω_des) + Ω × IΩ`, `Ω_err = Ω − Ω_des`.
pub fn control_torque(
    q_err: Quaternion,
    rates: Vec3,
    rates_des: Vec3,
    rates_des_dot: Vec3,
    gains: &LyapunovGains,
    params: &VehicleParams,
) -> Vec3 {
    let inertia = params.inertia();
    let eps = q_err.vector();
    let rates_err = rates - rates_des;
    -(gains.k_q * eps) - gains.k_omega * rates_err + rates_des_dot.component_mul(inertia)
        - rates.cross(rates_des).component_mul(inertia)
        + rates.cross(rates.component_mul(inertia))
}

/// `V = k_Q ‖q_err − (1,0,0,0)‖² + ½ Ω_errᵀ I Ω_err` and its derivative
/// `V̇ = −k_Ω ‖Ω_err‖²` under [`control_torque`].
pub fn lyapunov_sample(
    q_err: Quaternion,
    rates_err: Vec3,
    gains: &LyapunovGains,
    params: &VehicleParams,
    t: f64,
) -> LyapunovSample {
    let attitude_term = (q_err - Quaternion::IDENTITY).dot(q_err - Quaternion::IDENTITY);
    let kinetic = 0.5 * rates_err.dot(rates_err.component_mul(params.inertia()));
    LyapunovSample {
        v: gains.k_q * attitude_term + kinetic,
        v_dot: -gains.k_omega * rates_err.dot(rates_err),
        t,
    }
}

/// `dV/dt` evaluated from the actual body angular acceleration, valid under
/// any control law (setpoint held constant). Equals the `v_dot` of
/// [`lyapunov_sample`] when the torque comes from [`control_torque`].
pub fn lyapunov_rate(
    q_err: Quaternion,
    rates: Vec3,
    angular_acceleration: Vec3,
    gains: &LyapunovGains,
    params: &VehicleParams,
) -> f64 {
    let q_err_dot = q_err.derivative(rates);
    2.0 * gains.k_q * (q_err - Quaternion::IDENTITY).dot(q_err_dot)
        + rates.dot(angular_acceleration.component_mul(params.inertia()))
}

/// Rotor speeds (zero tilt) producing collective thrust `thrust` (N) and body
/// torque `tau` exactly. The flag reports whether any rotor saturated, in
/// which case the torque is only approximated.
pub fn realize_torque(thrust: f64, tau: Vec3, params: &VehicleParams) -> (ActuatorCommand, bool) {
    let l = params.arm_length;
    let drag_ratio = params.k_m / params.k_f;
    let pair_24 = 0.5 * (thrust + tau.z / drag_ratio);
    let pair_13 = 0.5 * (thrust - tau.z / drag_ratio);
    let forces = [
        0.5 * (pair_13 - tau.y / l),
        0.5 * (pair_24 + tau.x / l),
        0.5 * (pair_13 + tau.y / l),
        0.5 * (pair_24 - tau.x / l),
    ];
    let mut saturated = false;
    let omega = forces.map(|f| {
        let w = (f.max(0.0) / params.k_f).sqrt();
        if f < 0.0 || w > params.omega_max {
            saturated = true;
        }
        w.min(params.omega_max)
    });
    (ActuatorCommand { omega, tilt: [0.0; 4] }, saturated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{compose, mix, HoverTrim};
    use crate::dynamics::body_torque;
    use crate::quat::EulerAngles;

    const P: VehicleParams = VehicleParams::reference();

    fn q(phi: f64, theta: f64, psi: f64) -> Quaternion {
        Quaternion::from_euler(EulerAngles::new(phi, theta, psi))
    }

    #[test]
    fn error_of_equal_attitudes_is_identity() {
        let a = q(0.3, -0.4, 2.0);
        let e = error_quaternion(a, a).unwrap();
        assert!((e - Quaternion::IDENTITY).norm() < 1e-15);
        let e = body_error_quaternion(a, a).unwrap();
        assert!((e - Quaternion::IDENTITY).norm() < 1e-15);
    }

    #[test]
    fn error_from_identity_is_desired() {
        let d = q(0.5, 0.2, -0.1);
        assert!((error_quaternion(d, Quaternion::IDENTITY).unwrap() - d).norm() < 1e-15);
    }

    #[test]
    fn error_round_trip() {
        let d = q(0.5, 0.2, -2.1);
        let c = q(-1.0, 0.7, 2.5);
        let e = error_quaternion(d, c).unwrap();
        let back = e * c;
        assert!((back - d).norm() < 1e-10 || (back + d).norm() < 1e-10);
        assert!(e.q0 >= 0.0);
    }

    #[test]
    fn error_requires_unit_inputs() {
        let bad = Quaternion::new(2.0, 0.0, 0.0, 0.0);
        assert!(matches!(
            error_quaternion(bad, Quaternion::IDENTITY),
            Err(Error::NonUnitQuaternion { .. })
        ));
    }

    #[test]
    fn errors_share_scalar_part_and_error_norm() {
        let d = q(0.9, -0.3, 1.2);
        let c = q(0.1, 0.4, -0.6);
        let inertial = error_quaternion(d, c).unwrap();
        let body = body_error_quaternion(d, c).unwrap();
        assert!((inertial.q0 - body.q0).abs() < 1e-15);
        // Body error vector is the negated inertial one expressed in body axes.
        let rotated = c.rotate_inverse(inertial.vector()).unwrap();
        assert!((rotated + body.vector()).norm() < 1e-12);
    }

    #[test]
    fn law_is_zero_at_regulation() {
        let out = attitude_law(Quaternion::IDENTITY, Vec3::ZERO, &AttitudeGains::default());
        assert_eq!(out, VirtualAttitudeControls::default());
    }

    #[test]
    fn law_single_axis_structure() {
        let g = AttitudeGains::default();
        let e = 0.1;
        let out = attitude_law(Quaternion::new((1.0f64 - e * e).sqrt(), e, 0.0, 0.0), Vec3::ZERO, &g);
        assert_eq!(out.d_omega, Vec3::new(-g.k_q.x * e, 0.0, 0.0));
        assert_eq!(out.d_tilt.y, 0.0);
        assert_eq!(out.d_tilt.z, 0.0);
    }

    #[test]
    fn law_hand_evaluation() {
        let g = AttitudeGains {
            k_q: Vec3::new(2.0, 2.0, 2.0),
            k_w: Vec3::new(0.5, 0.5, 0.5),
            ..AttitudeGains::default()
        };
        let eps = Vec3::new(0.1, -0.2, 0.3);
        let q_err = Quaternion::from_scalar_vector((1.0 - eps.dot(eps)).sqrt(), eps);
        let out = attitude_law(q_err, Vec3::new(0.1, 0.1, 0.1), &g);
        let expected = Vec3::new(-0.25, 0.35, -0.65);
        assert!((out.d_omega - expected).norm() < 1e-15, "{:?}", out.d_omega);
    }

    #[test]
    fn restoring_sign_through_mixer_and_plant() {
        // Desired roll exceeds current: inertial error ε1 > 0.
        let q_des = q(0.2, 0.0, 0.0);
        let inertial = error_quaternion(q_des, Quaternion::IDENTITY).unwrap();
        assert!(inertial.q1 > 0.0);
        // The feedback error is past-target positive, so here ε1 < 0.
        let body = body_error_quaternion(q_des, Quaternion::IDENTITY).unwrap();
        assert!(body.q1 < 0.0);
        let out = attitude_law(body, Vec3::ZERO, &AttitudeGains::default());
        assert!(out.d_omega.x > 0.0 && out.d_tilt.x > 0.0);

        let trim = HoverTrim::level(131.87);
        let d = mix(&out.with_translation(0.0, 0.0));
        let tau = body_torque(&compose(&trim, &d, &P), &P) - body_torque(&compose(&trim, &Default::default(), &P), &P);
        assert!(tau.x > 0.0, "{tau:?}");

        // A vehicle rolled past its target (ε1 > 0) gets Δω_φ < 0 and negative τx.
        let past = body_error_quaternion(Quaternion::IDENTITY, q(0.2, 0.0, 0.0)).unwrap();
        assert!(past.q1 > 0.0);
        let out = attitude_law(past, Vec3::ZERO, &AttitudeGains::default());
        assert!(out.d_omega.x < 0.0);
        let d = mix(&out.with_translation(0.0, 0.0));
        assert!(body_torque(&compose(&trim, &d, &P), &P).x < 0.0);
    }

    #[test]
    fn control_torque_at_equilibrium_is_zero() {
        let t = control_torque(Quaternion::IDENTITY, Vec3::ZERO, Vec3::ZERO, Vec3::ZERO, &LyapunovGains::default(), &P);
        assert_eq!(t, Vec3::ZERO);
    }

    #[test]
    fn control_torque_regulation_form() {
        let g = LyapunovGains::default();
        let qe = Quaternion::new(0.9, 0.1, -0.3, 0.2).normalize().unwrap();
        let w = Vec3::new(0.5, -1.0, 0.3);
        let t = control_torque(qe, w, Vec3::ZERO, Vec3::ZERO, &g, &P);
        let expected = -(g.k_q * qe.vector()) - g.k_omega * w + w.cross(w.component_mul(P.inertia()));
        assert!((t - expected).norm() < 1e-15);
    }

    #[test]
    fn lyapunov_examples() {
        let g = LyapunovGains { k_q: 0.7, k_omega: 1.0 };
        let s = lyapunov_sample(Quaternion::IDENTITY, Vec3::ZERO, &g, &P, 0.0);
        assert_eq!((s.v, s.v_dot), (0.0, 0.0));
        let s = lyapunov_sample(Quaternion::IDENTITY, Vec3::X, &g, &P, 1.5);
        assert_eq!(s.v_dot, -1.0);
        assert_eq!(s.v, 0.5 * P.i_xx);
        assert_eq!(s.t, 1.5);
    }

    #[test]
    fn realized_torque_is_exact() {
        let tau = Vec3::new(0.1, -0.05, 0.08);
        let thrust = P.mass * P.gravity;
        let (cmd, saturated) = realize_torque(thrust, tau, &P);
        assert!(!saturated);
        assert!((body_torque(&cmd, &P) - tau).norm() < 1e-12);
        let total: f64 = cmd.omega.iter().map(|w| P.k_f * w * w).sum();
        assert!((total - thrust).abs() < 1e-12);
        let (_, saturated) = realize_torque(thrust, Vec3::new(5.0, 0.0, 0.0), &P);
        assert!(saturated);
    }

    #[test]
    fn measured_rate_matches_closed_form_under_law() {
        use crate::dynamics::angular_accel;
        let g = LyapunovGains::default();
        let qe = Quaternion::new(0.8, -0.2, 0.4, 0.1).normalize().unwrap();
        let w = Vec3::new(0.3, -0.6, 0.9);
        let tau = control_torque(qe, w, Vec3::ZERO, Vec3::ZERO, &g, &P);
        let measured = lyapunov_rate(qe, w, angular_accel(tau, w, &P), &g, &P);
        let closed = lyapunov_sample(qe, w, &g, &P, 0.0).v_dot;
        assert!((measured - closed).abs() < 1e-14, "{measured} vs {closed}");
    }
}
