//! Independent reference implementations used by the integration tests.
//! Quaternion algebra and rank come from nalgebra; the rotor model is a
//! plain untilted quadcopter written out longhand.
#![allow(dead_code)]

use nalgebra as na;
use rand::Rng;
use tiltrotor::attitude::{body_error_quaternion, control_torque, realize_torque, LyapunovGains};
use tiltrotor::dynamics::{rk4_step, state_derivative, RigidBodyState, VehicleParams};
use tiltrotor::{EulerAngles, Quaternion, Vec3};

pub fn to_na(q: Quaternion) -> na::Quaternion<f64> {
    na::Quaternion::new(q.q0, q.q1, q.q2, q.q3)
}

pub fn from_na(q: na::Quaternion<f64>) -> Quaternion {
    Quaternion::new(q.w, q.i, q.j, q.k)
}

pub fn na_vec(v: Vec3) -> na::Vector3<f64> {
    na::Vector3::new(v.x, v.y, v.z)
}

pub fn oracle_product(a: Quaternion, b: Quaternion) -> Quaternion {
    from_na(to_na(a) * to_na(b))
}

/// Rotation through the direction-cosine matrix of the normalized quaternion.
pub fn oracle_rotate(q: Quaternion, v: Vec3) -> Vec3 {
    let r = na::UnitQuaternion::from_quaternion(to_na(q)).to_rotation_matrix();
    let out = r * na_vec(v);
    Vec3::new(out.x, out.y, out.z)
}

/// Z-Y-X Euler angles, yaw applied last.
pub fn oracle_from_euler(e: EulerAngles) -> Quaternion {
    from_na(*na::UnitQuaternion::from_euler_angles(e.phi, e.theta, e.psi).quaternion())
}

/// Same attitude up to the double-cover sign.
pub fn same_attitude(a: Quaternion, b: Quaternion, tol: f64) -> bool {
    (a - b).norm() < tol || (a + b).norm() < tol
}

/// `q̇ = ½ f(q) Ω` with `f = [−εᵀ; q0 I + [ε×]]`.
pub fn f_matrix(q: Quaternion) -> [[f64; 3]; 4] {
    let (w, x, y, z) = (q.q0, q.q1, q.q2, q.q3);
    [[-x, -y, -z], [w, -z, y], [z, w, -x], [-y, x, w]]
}

pub fn f_transpose_times(q: Quaternion, p: Quaternion) -> Vec3 {
    let f = f_matrix(q);
    let p = p.to_array();
    let col = |j: usize| (0..4).map(|i| f[i][j] * p[i]).sum::<f64>();
    Vec3::new(col(0), col(1), col(2))
}

/// Body-frame thrust and torque of a conventional untilted quadcopter:
/// rotor 1 on +x, 2 on +y, 3 on −x, 4 on −y; 1/3 and 2/4 counter-rotate.
pub fn plain_quad(omega: [f64; 4], p: &VehicleParams) -> (f64, Vec3) {
    let f: Vec<f64> = omega.iter().map(|w| p.k_f * w * w).collect();
    let m: Vec<f64> = omega.iter().map(|w| p.k_m * w * w).collect();
    let thrust = f[0] + f[1] + f[2] + f[3];
    let torque = Vec3::new(
        p.arm_length * (f[1] - f[3]),
        p.arm_length * (f[2] - f[0]),
        -m[0] + m[1] - m[2] + m[3],
    );
    (thrust, torque)
}

pub fn rank_svd(m: [[f64; 8]; 8]) -> usize {
    let mat = na::DMatrix::from_fn(8, 8, |i, j| m[i][j]);
    mat.svd(false, false).rank(1e-9)
}

pub fn random_unit<R: Rng>(rng: &mut R) -> Quaternion {
    loop {
        let q = Quaternion::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = q.norm();
        if n > 0.1 && n <= 1.0 {
            return q.scale(1.0 / n);
        }
    }
}

pub fn random_vec<R: Rng>(rng: &mut R, scale: f64) -> Vec3 {
    Vec3::new(
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
    )
}

/// Attitude regulation with the torque-level law evaluated at every RK4
/// stage and constant collective thrust: a smooth closed-loop ODE.
pub fn regulation_segment(dt: f64, duration: f64) -> RigidBodyState {
    let p = VehicleParams::reference();
    let gains = LyapunovGains::default();
    let thrust = p.mass * p.gravity;
    let q_des = Quaternion::from_euler(EulerAngles::new(0.4, -0.3, 0.2));
    let mut s = RigidBodyState {
        rates: Vec3::new(0.3, -0.2, 0.1),
        ..RigidBodyState::at_rest(Vec3::new(0.0, 0.0, 5.0))
    };
    let steps = (duration / dt).round() as usize;
    for _ in 0..steps {
        s = rk4_step(&s, dt, |st| {
            let e = body_error_quaternion(q_des, st.attitude.normalize()?)?;
            let tau = control_torque(e, st.rates, Vec3::ZERO, Vec3::ZERO, &gains, &p);
            let (cmd, _) = realize_torque(thrust, tau, &p);
            state_derivative(st, &cmd, &p)
        })
        .expect("segment integrates");
    }
    s
}

pub fn state_distance(a: &RigidBodyState, b: &RigidBodyState) -> f64 {
    let q = if (a.attitude - b.attitude).norm() < (a.attitude + b.attitude).norm() {
        (a.attitude - b.attitude).norm()
    } else {
        (a.attitude + b.attitude).norm()
    };
    (a.position - b.position)
        .norm()
        .max((a.velocity - b.velocity).norm())
        .max(q)
        .max((a.rates - b.rates).norm())
}
