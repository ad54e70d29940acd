mod common;

use proptest::prelude::*;

use common::*;
use tiltrotor::allocation::{channel_values, compose, mix, HoverTrim, VirtualControlVector, ALLOCATION_MATRIX};
use tiltrotor::attitude::{
    attitude_law, body_error_quaternion, control_torque, error_quaternion, lyapunov_sample, AttitudeGains,
    LyapunovGains,
};
use tiltrotor::dynamics::{
    angular_accel, body_specific_force, body_torque, rk4_step, ActuatorCommand, RigidBodyState, StateDerivative,
    VehicleParams,
};
use tiltrotor::harness::config::{ScenarioConfig, StepCommand};
use tiltrotor::linearization::{analytic_model, Axis};
use tiltrotor::position::{desired_quaternion, hover_speed, pid_update, position_step, PositionGains, PositionSetpoint};
use tiltrotor::quat::EPS_ALIGN;
use tiltrotor::{EulerAngles, Quaternion, Vec3};

const P: VehicleParams = VehicleParams::reference();

fn quat_any() -> impl Strategy<Value = Quaternion> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b, c, d)| Quaternion::new(a, b, c, d))
}

fn unit_quat() -> impl Strategy<Value = Quaternion> {
    quat_any()
        .prop_filter("well away from zero", |q| q.norm() > 0.1)
        .prop_map(|q| q.scale(1.0 / q.norm()))
}

fn vec3(scale: f64) -> impl Strategy<Value = Vec3> {
    (-scale..scale, -scale..scale, -scale..scale).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn trim() -> HoverTrim {
    HoverTrim::level(hover_speed(P.gravity, [0.0; 4], &P).unwrap())
}

proptest! {
    #[test]
    fn product_norm_is_multiplicative(a in quat_any(), b in quat_any()) {
        let lhs = a.multiply(b).norm();
        let rhs = a.norm() * b.norm();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }

    #[test]
    fn product_agrees_with_reference_algebra(a in quat_any(), b in quat_any()) {
        prop_assert!((a.multiply(b) - oracle_product(a, b)).norm() <= 1e-12 * (1.0 + a.norm() * b.norm()));
    }

    #[test]
    fn identity_and_conjugate_laws(q in unit_quat()) {
        prop_assert_eq!(q.multiply(Quaternion::IDENTITY), q);
        prop_assert_eq!(Quaternion::IDENTITY.multiply(q), q);
        prop_assert!((q.multiply(q.conjugate()) - Quaternion::IDENTITY).norm() < 1e-15);
        prop_assert_eq!(q.conjugate().conjugate(), q);
    }

    #[test]
    fn rotation_is_linear_and_isometric(q in unit_quat(), a in vec3(10.0), b in vec3(10.0), k in -3.0..3.0f64) {
        let ra = q.rotate(a).unwrap();
        prop_assert!((ra.norm() - a.norm()).abs() <= 1e-12 * (1.0 + a.norm()));
        let lin = q.rotate(a + b * k).unwrap() - (ra + q.rotate(b).unwrap() * k);
        prop_assert!(lin.norm() <= 1e-12 * (1.0 + a.norm() + k.abs() * b.norm()));
    }

    #[test]
    fn sandwich_and_matrix_rotation_agree(q in unit_quat(), v in vec3(10.0)) {
        let sandwich = q.multiply(Quaternion::pure(v)).multiply(q.conjugate());
        prop_assert!(sandwich.q0.abs() < 1e-12 * (1.0 + v.norm()));
        prop_assert!((sandwich.vector() - oracle_rotate(q, v)).norm() <= 1e-12 * (1.0 + v.norm()));
        prop_assert!((q.rotate(v).unwrap() - oracle_rotate(q, v)).norm() <= 1e-12 * (1.0 + v.norm()));
    }

    #[test]
    fn euler_round_trip_away_from_gimbal_lock(q in unit_quat()) {
        let e = q.to_euler().unwrap();
        prop_assume!(e.theta.abs() <= std::f64::consts::FRAC_PI_2 - 1e-3);
        prop_assert!(same_attitude(oracle_from_euler(e), q, 1e-9));
        prop_assert!(same_attitude(Quaternion::from_euler(e), q, 1e-9));
    }

    #[test]
    fn from_euler_matches_reference(phi in -3.1..3.1f64, theta in -1.5..1.5f64, psi in -3.1..3.1f64) {
        let e = EulerAngles::new(phi, theta, psi);
        prop_assert!(same_attitude(Quaternion::from_euler(e), oracle_from_euler(e), 1e-12));
    }

    #[test]
    fn kinematics_preserve_norm_to_first_order(q in unit_quat(), w in vec3(10.0)) {
        prop_assert!(q.dot(q.derivative(w)).abs() <= 1e-14 * (1.0 + w.norm()));
    }

    #[test]
    fn kinematic_matrix_identities(q in unit_quat(), w in vec3(5.0)) {
        // q̇ = ½ f Ω, fᵀq = 0 and fᵀ(q − e0) = ε
        let f = f_matrix(q);
        let qd = q.derivative(w).to_array();
        for (i, row) in f.iter().enumerate() {
            let expect = 0.5 * (row[0] * w.x + row[1] * w.y + row[2] * w.z);
            prop_assert!((qd[i] - expect).abs() < 1e-14 * (1.0 + w.norm()));
        }
        prop_assert!(f_transpose_times(q, q).norm() < 1e-15);
        prop_assert!((f_transpose_times(q, q - Quaternion::IDENTITY) - q.vector()).norm() < 1e-15);
    }

    #[test]
    fn two_vector_alignment(a in vec3(5.0), b in vec3(5.0)) {
        prop_assume!(a.norm() > 1e-3 && b.norm() > 1e-3);
        let (ah, bh) = (a.normalized().unwrap(), b.normalized().unwrap());
        prop_assume!(1.0 + ah.dot(bh) >= EPS_ALIGN);
        let q = Quaternion::from_two_vectors(a, b).unwrap();
        prop_assert!((q.norm() - 1.0).abs() < 1e-12);
        // Near-antiparallel inputs lose digits in the axis; the bound scales accordingly.
        let tol = 1e-10f64.max(1e-15 / (1.0 + ah.dot(bh)));
        prop_assert!((q.rotate(ah).unwrap() - bh).norm() < tol);
    }

    #[test]
    fn untilted_model_is_a_plain_quadcopter(w in proptest::array::uniform4(0.0..400.0f64)) {
        let cmd = ActuatorCommand { omega: w, tilt: [0.0; 4] };
        let (thrust, torque) = plain_quad(w, &P);
        let f = body_specific_force(&cmd, &P);
        prop_assert!((f - Vec3::new(0.0, 0.0, thrust / P.mass)).norm() < 1e-12 * (1.0 + thrust));
        prop_assert!((body_torque(&cmd, &P) - torque).norm() < 1e-12 * (1.0 + thrust));
    }

    #[test]
    fn error_quaternions_are_canonical_units(a in unit_quat(), b in unit_quat()) {
        for e in [error_quaternion(a, b).unwrap(), body_error_quaternion(a, b).unwrap()] {
            prop_assert!(e.q0 >= 0.0);
            prop_assert!((e.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn attitude_law_is_linear(
        e1 in proptest::array::uniform3(-512i32..512), w1 in proptest::array::uniform3(-512i32..512),
        e2 in proptest::array::uniform3(-512i32..512), w2 in proptest::array::uniform3(-512i32..512),
        a in -8i32..8, b in -8i32..8,
    ) {
        // Dyadic inputs, gains and weights keep every product exact.
        let g = AttitudeGains {
            k_q: Vec3::new(30.0, 30.0, 15.0),
            k_w: Vec3::new(12.0, 12.0, 4.0),
            k_q_tilt: Vec3::new(0.25, 0.25, 0.375),
            k_w_tilt: Vec3::new(0.0625, 0.0625, 0.125),
        };
        let v = |c: [i32; 3]| Vec3::new(f64::from(c[0]), f64::from(c[1]), f64::from(c[2])) * (1.0 / 1024.0);
        let q = |e: Vec3| Quaternion::from_scalar_vector(1.0, e);
        let (a, b) = (f64::from(a), f64::from(b));
        let combined = attitude_law(q(v(e1) * a + v(e2) * b), v(w1) * a + v(w2) * b, &g);
        let l1 = attitude_law(q(v(e1)), v(w1), &g);
        let l2 = attitude_law(q(v(e2)), v(w2), &g);
        prop_assert_eq!(combined.d_omega, l1.d_omega * a + l2.d_omega * b);
        prop_assert_eq!(combined.d_tilt, l1.d_tilt * a + l2.d_tilt * b);
    }

    #[test]
    fn mix_is_exact_on_integers(v in proptest::array::uniform8(-1000i32..1000), w in proptest::array::uniform8(-1000i32..1000)) {
        let f = |a: [i32; 8]| VirtualControlVector::from_array(a.map(f64::from));
        let sum: [i32; 8] = std::array::from_fn(|i| v[i] + w[i]);
        let lhs = mix(&f(sum)).to_array();
        let (mv, mw) = (mix(&f(v)).to_array(), mix(&f(w)).to_array());
        for i in 0..8 {
            prop_assert_eq!(lhs[i], mv[i] + mw[i]);
            let by_hand: i32 = (0..8).map(|j| ALLOCATION_MATRIX[i][j] * v[j]).sum();
            prop_assert_eq!(mv[i], f64::from(by_hand));
        }
    }

    #[test]
    fn mixed_torque_matches_linear_prediction(
        speeds in proptest::array::uniform3(-1.0..1.0f64),
        tilts in proptest::array::uniform5(-0.01..0.01f64),
    ) {
        let v = VirtualControlVector::from_array([
            speeds[0] / 3f64.sqrt(), speeds[1] / 3f64.sqrt(), speeds[2] / 3f64.sqrt(),
            tilts[0] / 5f64.sqrt(), tilts[1] / 5f64.sqrt(), tilts[2] / 5f64.sqrt(), tilts[3] / 5f64.sqrt(), tilts[4] / 5f64.sqrt(),
        ]);
        let trim = trim();
        let d = mix(&v);
        // scale keeps ‖Δω‖ ≤ 1 and ‖Δθ‖ ≤ 0.01 after mixing
        let scale = 1.0f64.min(1.0 / norm4(d.d_omega)).min(0.01 / norm4(d.d_tilt));
        let v = VirtualControlVector::from_array(v.to_array().map(|x| x * scale));
        let d = mix(&v);
        let actual = body_torque(&compose(&trim, &d, &P), &P) - body_torque(&compose(&trim, &Default::default(), &P), &P);

        let ch = channel_values(&d);
        let coef = |axis| analytic_model(axis, &trim, &P);
        let (r, p, y) = (coef(Axis::Roll), coef(Axis::Pitch), coef(Axis::Yaw));
        let predicted = Vec3::new(
            P.i_xx * (r.speed_coefficient() * ch[0] + r.tilt_coefficient() * ch[3]),
            P.i_yy * (p.speed_coefficient() * ch[1] + p.tilt_coefficient() * ch[4]),
            P.i_zz * (y.speed_coefficient() * ch[2] + y.tilt_coefficient() * ch[5]),
        );
        prop_assume!(predicted.norm() > 1e-6);
        prop_assert!((actual - predicted).norm() <= 0.05 * predicted.norm(), "{:?} vs {:?}", actual, predicted);
    }

    #[test]
    fn hover_speed_inverts_thrust_balance(az in 0.1..40.0f64, tilts in proptest::array::uniform4(-0.5..0.5f64)) {
        let w = hover_speed(az, tilts, &P).unwrap();
        let cos_sum: f64 = tilts.iter().map(|t| t.cos()).sum();
        let lhs = P.k_f * w * w * cos_sum;
        prop_assert!((lhs - P.mass * az).abs() <= 1e-10 * P.mass * az);
    }

    #[test]
    fn desired_attitude_keeps_thrust_aligned(
        tilt in 0.0..(std::f64::consts::PI / 3.0), heading in -3.1..3.1f64, mag in 1.0..30.0f64, yaw in -3.1..3.1f64,
    ) {
        let accel = Vec3::new(tilt.sin() * heading.cos(), tilt.sin() * heading.sin(), tilt.cos()) * mag;
        let q = desired_quaternion(Vec3::Z, accel, yaw).unwrap();
        prop_assert!((q.norm() - 1.0).abs() < 1e-12);
        prop_assert!((q.rotate(Vec3::Z).unwrap() - accel.normalized().unwrap()).norm() < 1e-9);
        let psi = q.to_euler().unwrap().psi;
        let wrapped = (psi - yaw + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
        prop_assert!(wrapped.abs() < 1e-9, "yaw {} got {}", yaw, psi);
    }

    #[test]
    fn integrals_stay_clamped(errors in proptest::collection::vec(vec3(50.0), 1..200), dt in 1e-3..0.5f64) {
        let g = PositionGains::default();
        let mut i = Vec3::ZERO;
        for e in errors {
            i = pid_update(e, Vec3::ZERO, i, &g, P.gravity, dt).unwrap().integrals;
            prop_assert!(i.max_abs() <= g.integral_clamp);
        }
    }

    #[test]
    fn at_target_commands_hover(target in vec3(100.0), yaw in -3.0..3.0f64) {
        let s = RigidBodyState::at_rest(target);
        let sp = PositionSetpoint { target, yaw_des: yaw };
        let (cmd, _) = position_step(&s, &sp, Vec3::ZERO, [0.0; 4], &PositionGains::default(), &P, 1e-3).unwrap();
        prop_assert_eq!(cmd.accel_des, Vec3::new(0.0, 0.0, P.gravity));
        prop_assert_eq!(cmd.d_tilt_xy, [0.0, 0.0]);
    }

    #[test]
    fn config_round_trips(dt in 1e-4..1e-2f64, duration in 1.0..100.0f64, kq in 0.01..10.0f64, t in 0.0..30.0f64, m in -2.0..2.0f64) {
        let mut cfg = ScenarioConfig::attitude_steps();
        cfg.scenario.dt = dt;
        cfg.scenario.duration = duration;
        cfg.lyapunov_gains.k_q = kq;
        cfg.steps.push(StepCommand { time: t, axis: Axis::Pitch, magnitude: m });
        let text = cfg.to_toml().unwrap();
        let back = ScenarioConfig::from_toml(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml().unwrap(), text);
    }
}

fn norm4(a: [f64; 4]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Torque law applied directly to the rigid body: V never rises.
    #[test]
    fn lyapunov_function_never_increases(q0 in unit_quat(), w0 in vec3(2.0 / 3f64.sqrt())) {
        let gains = LyapunovGains::default();
        let q_des = Quaternion::IDENTITY;
        let dt = 1e-3;
        let mut s = RigidBodyState { attitude: q0, rates: w0, ..RigidBodyState::default() };
        let v_of = |s: &RigidBodyState| {
            lyapunov_sample(body_error_quaternion(q_des, s.attitude).unwrap(), s.rates, &gains, &P, 0.0).v
        };
        let mut v = v_of(&s);
        for _ in 0..3000 {
            s = rk4_step(&s, dt, |st| {
                let e = body_error_quaternion(q_des, st.attitude.normalize()?)?;
                let tau = control_torque(e, st.rates, Vec3::ZERO, Vec3::ZERO, &gains, &P);
                Ok(StateDerivative {
                    velocity: st.velocity,
                    acceleration: Vec3::ZERO,
                    attitude_rate: st.attitude.derivative(st.rates),
                    angular_acceleration: angular_accel(tau, st.rates, &P),
                })
            }).unwrap();
            let next = v_of(&s);
            prop_assert!(next <= v + 1e-8, "V rose from {} to {}", v, next);
            v = next;
        }
    }
}
