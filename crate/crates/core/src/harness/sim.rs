//! Closed-loop scenario runs.
//!
//! Every run shares one engine: an outer guidance closure supplies the desired
//! attitude, desired acceleration and translational tilts each step, and the
//! inner loop turns them into actuator commands according to
//! [`AttitudeLaw`]. Allocation-mode commands are held over each RK4 step;
//! Lyapunov-mode torque is re-evaluated at every stage.

use crate::allocation::{compose, mix, HoverTrim};
use crate::attitude::{
    attitude_law, body_error_quaternion, control_torque, error_quaternion, lyapunov_rate, lyapunov_sample,
    realize_torque,
};
use crate::dynamics::{angular_accel, body_torque, clamp_command, rk4_step, state_derivative, ActuatorCommand, RigidBodyState};
use crate::error::{Error, Result};
use crate::harness::config::{AttitudeLaw, ScenarioConfig, ScenarioKind};
use crate::linearization::Axis;
use crate::position::{hover_speed, horizontal_distance, pid_update, position_step, waypoint_advance, PositionSetpoint};
use crate::quat::{EulerAngles, Quaternion, Vec3};

/// Lower bound on the body-z vertical component used for thrust tilt compensation.
const MIN_VERTICAL: f64 = 0.2;
/// Climb is complete once altitude and climb rate are within these bounds.
const CLIMB_SETTLE_HEIGHT: f64 = 0.05;
const CLIMB_SETTLE_RATE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub attitude: Quaternion,
    pub euler: EulerAngles,
    pub rates: Vec3,
    pub omega: [f64; 4],
    pub tilt: [f64; 4],
    /// `q_des ⊗ q*`
    pub q_err: Quaternion,
    pub lyapunov_v: f64,
    /// Measured from the actual angular acceleration, not the closed form.
    pub lyapunov_v_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaypointCapture {
    pub index: usize,
    pub t: f64,
    pub position: Vec3,
    /// Horizontal distance to the waypoint at capture.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimLog {
    pub rows: Vec<LogRow>,
    /// Times at which the attitude setpoint of a step schedule changed.
    pub setpoint_changes: Vec<f64>,
    pub captures: Vec<WaypointCapture>,
    /// Start of the cruise phase of a mission (end of the initial climb).
    pub cruise_start: Option<f64>,
    /// Integration steps during which an actuator hit a limit.
    pub saturated_steps: usize,
    pub final_state: RigidBodyState,
}

impl SimLog {
    pub fn last(&self) -> Option<&LogRow> {
        self.rows.last()
    }

    /// Last row at or before `t`.
    pub fn row_at(&self, t: f64) -> Option<&LogRow> {
        self.rows.iter().take_while(|r| r.t <= t + 1e-9).last()
    }
}

/// What the outer loop asks of the inner loop for one step.
#[derive(Debug, Clone, Copy)]
struct Guidance {
    q_des: Quaternion,
    accel_des: Vec3,
    d_tilt_xy: [f64; 2],
}

/// Run whichever scenario the config names.
pub fn simulate(cfg: &ScenarioConfig) -> Result<SimLog> {
    match cfg.scenario.kind {
        ScenarioKind::AttitudeSteps => run_attitude_steps(cfg),
        ScenarioKind::WaypointMission => run_waypoint_mission(cfg),
        ScenarioKind::Custom => run_custom(cfg),
    }
}

/// Commanded Euler angles at `t`: the sum of all steps issued so far.
pub fn scheduled_euler(cfg: &ScenarioConfig, t: f64) -> EulerAngles {
    let half = 0.5 * cfg.scenario.dt;
    let mut e = EulerAngles::new(0.0, 0.0, 0.0);
    for s in cfg.steps.iter().filter(|s| s.time <= t + half) {
        match s.axis {
            Axis::Roll => e.phi += s.magnitude,
            Axis::Pitch => e.theta += s.magnitude,
            Axis::Yaw => e.psi += s.magnitude,
        }
    }
    e
}

/// Euler-angle steps with the position loop reduced to altitude hold.
pub fn run_attitude_steps(cfg: &ScenarioConfig) -> Result<SimLog> {
    cfg.validate()?;
    let params = cfg.vehicle;
    let gains = cfg.position_gains;
    let z_hold = cfg.initial_state.position.z;
    let dt = cfg.scenario.dt;
    let mut integrals = Vec3::ZERO;

    let mut log = run_engine(cfg, |_, t, s| {
        let errors = Vec3::new(0.0, 0.0, z_hold - s.position.z);
        let rates = Vec3::new(0.0, 0.0, -s.velocity.z);
        let pid = pid_update(errors, rates, integrals, &gains, params.gravity, dt)?;
        integrals = pid.integrals;
        Ok(Guidance {
            q_des: Quaternion::from_euler(scheduled_euler(cfg, t)),
            accel_des: pid.accel_des,
            d_tilt_xy: [0.0, 0.0],
        })
    })?;

    let mut changes: Vec<f64> = cfg
        .steps
        .iter()
        .map(|s| s.time)
        .filter(|&t| t <= cfg.scenario.duration)
        .collect();
    changes.sort_by(f64::total_cmp);
    changes.dedup();
    log.setpoint_changes = changes;
    Ok(log)
}

/// Climb to the mission altitude above the start point, then capture each
/// waypoint in order and hold the last one.
pub fn run_waypoint_mission(cfg: &ScenarioConfig) -> Result<SimLog> {
    cfg.validate()?;
    let mission = cfg
        .mission
        .as_ref()
        .ok_or_else(|| Error::Config("waypoint_mission requires a [mission] section".into()))?;
    let points = mission.points();
    let start = cfg.initial_state.position;
    let climb_target = Vec3::new(start.x, start.y, mission.altitude);
    let radius = mission.capture_radius;

    let mut integrals = Vec3::ZERO;
    let mut cruise_start = None;
    let mut index = 0usize;
    let mut captures: Vec<WaypointCapture> = Vec::new();

    let mut log = run_engine(cfg, |tilts, t, s| {
        if cruise_start.is_none()
            && (s.position.z - mission.altitude).abs() < CLIMB_SETTLE_HEIGHT
            && s.velocity.z.abs() < CLIMB_SETTLE_RATE
        {
            cruise_start = Some(t);
        }
        let target = if cruise_start.is_some() {
            let distance = horizontal_distance(s.position, points[index]);
            if distance < radius && captures.last().is_none_or(|c| c.index < index) {
                captures.push(WaypointCapture {
                    index,
                    t,
                    position: s.position,
                    distance,
                });
            }
            index = waypoint_advance(s.position, &points, index, radius);
            points[index]
        } else {
            climb_target
        };
        let setpoint = PositionSetpoint {
            target,
            yaw_des: mission.yaw,
        };
        let (cmd, next) = position_step(s, &setpoint, integrals, tilts, &cfg.position_gains, &cfg.vehicle, cfg.scenario.dt)?;
        integrals = next;
        Ok(Guidance {
            q_des: cmd.q_des,
            accel_des: cmd.accel_des,
            d_tilt_xy: cmd.d_tilt_xy,
        })
    })?;

    log.cruise_start = cruise_start;
    let complete = captures.last().is_some_and(|c| c.index + 1 == points.len());
    log.captures = captures;
    if !complete {
        return Err(Error::MissionTimeout(cfg.scenario.duration));
    }
    Ok(log)
}

/// Hold the `[custom]` target with the full dual loop.
pub fn run_custom(cfg: &ScenarioConfig) -> Result<SimLog> {
    cfg.validate()?;
    let custom = cfg
        .custom
        .ok_or_else(|| Error::Config("custom scenario requires a [custom] section".into()))?;
    let setpoint = PositionSetpoint {
        target: custom.target,
        yaw_des: custom.yaw,
    };
    let mut integrals = Vec3::ZERO;
    run_engine(cfg, |tilts, _, s| {
        let (cmd, next) = position_step(s, &setpoint, integrals, tilts, &cfg.position_gains, &cfg.vehicle, cfg.scenario.dt)?;
        integrals = next;
        Ok(Guidance {
            q_des: cmd.q_des,
            accel_des: cmd.accel_des,
            d_tilt_xy: cmd.d_tilt_xy,
        })
    })
}

/// Deployed inner loop: diagonal feedback, mixer, hover trim.
fn allocation_command(cfg: &ScenarioConfig, s: &RigidBodyState, g: &Guidance, thrust_accel: f64) -> Result<(ActuatorCommand, bool)> {
    let params = &cfg.vehicle;
    let q_err = body_error_quaternion(g.q_des, s.attitude)?;
    let virtual_controls = attitude_law(q_err, s.rates, &cfg.attitude_gains).with_translation(g.d_tilt_xy[0], g.d_tilt_xy[1]);
    let delta = mix(&virtual_controls);
    let tilts = clamp_command(
        &ActuatorCommand {
            omega: [0.0; 4],
            tilt: delta.d_tilt,
        },
        params,
    )
    .tilt;
    let omega_h = hover_speed(thrust_accel, tilts, params)?;
    let cmd = compose(&HoverTrim::level(omega_h), &delta, params);
    let saturated = (0..4).any(|i| cmd.omega[i] != omega_h + delta.d_omega[i] || cmd.tilt[i] != delta.d_tilt[i]);
    Ok((cmd, saturated))
}

/// Lemma-style inner loop: exact torque realization with zero tilts.
fn lyapunov_command(cfg: &ScenarioConfig, s: &RigidBodyState, q_des: Quaternion, thrust: f64) -> Result<(ActuatorCommand, bool)> {
    let attitude = s.attitude.normalize()?;
    let q_err = body_error_quaternion(q_des, attitude)?;
    let tau = control_torque(q_err, s.rates, Vec3::ZERO, Vec3::ZERO, &cfg.lyapunov_gains, &cfg.vehicle);
    Ok(realize_torque(thrust, tau, &cfg.vehicle))
}

fn run_engine<G>(cfg: &ScenarioConfig, mut guidance: G) -> Result<SimLog>
where
    G: FnMut([f64; 4], f64, &RigidBodyState) -> Result<Guidance>,
{
    let params = cfg.vehicle;
    let dt = cfg.scenario.dt;
    let steps = cfg.step_count();
    let mut state = cfg.initial_state;
    state.attitude = state.attitude.normalize()?;
    let mut tilts = [0.0; 4];
    let mut log = SimLog {
        rows: Vec::with_capacity(steps / cfg.scenario.log_every + 1),
        ..SimLog::default()
    };

    for n in 0..=steps {
        let t = n as f64 * dt;
        let g = guidance(tilts, t, &state)?;
        let vertical = state.attitude.rotate(Vec3::Z)?.z.max(MIN_VERTICAL);
        let thrust_accel = g.accel_des.z / vertical;
        if !(thrust_accel > 0.0) {
            return Err(Error::NegativeThrustDemand(g.accel_des.z));
        }
        let (cmd, saturated) = match cfg.scenario.attitude_law {
            AttitudeLaw::Allocation => allocation_command(cfg, &state, &g, thrust_accel)?,
            AttitudeLaw::Lyapunov => lyapunov_command(cfg, &state, g.q_des, params.mass * thrust_accel)?,
        };

        if n % cfg.scenario.log_every == 0 {
            log.rows.push(log_row(cfg, t, &state, &cmd, g.q_des)?);
        }
        if n == steps {
            break;
        }

        let mut any_saturated = saturated;
        state = match cfg.scenario.attitude_law {
            AttitudeLaw::Allocation => rk4_step(&state, dt, |s| state_derivative(s, &cmd, &params))?,
            AttitudeLaw::Lyapunov => {
                let thrust = params.mass * thrust_accel;
                rk4_step(&state, dt, |s| {
                    let (c, sat) = lyapunov_command(cfg, s, g.q_des, thrust)?;
                    any_saturated |= sat;
                    state_derivative(s, &c, &params)
                })?
            }
        };
        if any_saturated {
            log.saturated_steps += 1;
        }
        tilts = cmd.tilt;
    }
    log.final_state = state;
    Ok(log)
}

fn log_row(cfg: &ScenarioConfig, t: f64, s: &RigidBodyState, cmd: &ActuatorCommand, q_des: Quaternion) -> Result<LogRow> {
    let params = &cfg.vehicle;
    let body_err = body_error_quaternion(q_des, s.attitude)?;
    let alpha = angular_accel(body_torque(cmd, params), s.rates, params);
    let v = lyapunov_sample(body_err, s.rates, &cfg.lyapunov_gains, params, t).v;
    let v_dot = lyapunov_rate(body_err, s.rates, alpha, &cfg.lyapunov_gains, params);
    Ok(LogRow {
        t,
        position: s.position,
        velocity: s.velocity,
        attitude: s.attitude,
        euler: s.attitude.to_euler()?,
        rates: s.rates,
        omega: cmd.omega,
        tilt: cmd.tilt,
        q_err: error_quaternion(q_des, s.attitude)?,
        lyapunov_v: v,
        lyapunov_v_dot: v_dot,
    })
}
