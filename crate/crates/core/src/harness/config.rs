//! TOML scenario files.
//!
//! Every section except `[scenario]` falls back to the reference values, so a
//! minimal file is
//!
//! ```toml
//! schema_version = 1
//! [scenario]
//! kind = "attitude_steps"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attitude::{AttitudeGains, LyapunovGains};
use crate::dynamics::{RigidBodyState, VehicleParams, DEFAULT_DT};
use crate::error::{Error, Result};
use crate::linearization::Axis;
use crate::position::{PositionGains, DEFAULT_CAPTURE_RADIUS};
use crate::quat::Vec3;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    AttitudeSteps,
    WaypointMission,
    /// Hold a fixed position setpoint with the full dual loop.
    Custom,
}

/// How the inner loop turns attitude error into actuator commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttitudeLaw {
    /// Diagonal speed/tilt feedback through the 8×8 mixer, sampled at `dt`.
    #[default]
    Allocation,
    /// Torque-level law evaluated continuously and realized exactly by the
    /// rotor speeds (tilts held at zero).
    Lyapunov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// Integration steps per logged row.
    #[serde(default = "default_log_every")]
    pub log_every: usize,
    #[serde(default)]
    pub attitude_law: AttitudeLaw,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_duration() -> f64 {
    35.0
}
fn default_log_every() -> usize {
    10
}

/// Attitude step: at `time`, add `magnitude` (rad) to the commanded Euler angle of `axis`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepCommand {
    pub time: f64,
    pub axis: Axis,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionSection {
    /// Horizontal (x, y) waypoints, visited in order.
    pub waypoints: Vec<[f64; 2]>,
    pub altitude: f64,
    #[serde(default = "default_capture_radius")]
    pub capture_radius: f64,
    #[serde(default)]
    pub yaw: f64,
}

fn default_capture_radius() -> f64 {
    DEFAULT_CAPTURE_RADIUS
}

impl MissionSection {
    pub fn reference() -> Self {
        Self {
            waypoints: vec![[5.0, 5.0], [5.0, 10.0], [10.0, 10.0], [15.0, 20.0], [20.0, 20.0]],
            altitude: 5.0,
            capture_radius: DEFAULT_CAPTURE_RADIUS,
            yaw: 0.0,
        }
    }

    pub fn points(&self) -> Vec<Vec3> {
        self.waypoints.iter().map(|&[x, y]| Vec3::new(x, y, self.altitude)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSection {
    pub target: Vec3,
    #[serde(default)]
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub vehicle: VehicleParams,
    #[serde(default)]
    pub attitude_gains: AttitudeGains,
    #[serde(default)]
    pub lyapunov_gains: LyapunovGains,
    #[serde(default)]
    pub position_gains: PositionGains,
    #[serde(default)]
    pub initial_state: RigidBodyState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mission: Option<MissionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepCommand>,
}

impl ScenarioConfig {
    fn base(kind: ScenarioKind, duration: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: ScenarioSection {
                kind,
                dt: DEFAULT_DT,
                duration,
                log_every: default_log_every(),
                attitude_law: AttitudeLaw::Allocation,
                output: None,
            },
            vehicle: VehicleParams::reference(),
            attitude_gains: AttitudeGains::default(),
            lyapunov_gains: LyapunovGains::default(),
            position_gains: PositionGains::default(),
            initial_state: RigidBodyState::default(),
            mission: None,
            custom: None,
            steps: Vec::new(),
        }
    }

    /// Roll, pitch and yaw steps of 1 rad at 5, 15 and 25 s; 35 s total.
    pub fn attitude_steps() -> Self {
        Self {
            steps: vec![
                StepCommand { time: 5.0, axis: Axis::Roll, magnitude: 1.0 },
                StepCommand { time: 15.0, axis: Axis::Pitch, magnitude: 1.0 },
                StepCommand { time: 25.0, axis: Axis::Yaw, magnitude: 1.0 },
            ],
            ..Self::base(ScenarioKind::AttitudeSteps, 35.0)
        }
    }

    /// Five waypoints at 5 m, starting at rest at the origin.
    pub fn waypoint_mission() -> Self {
        Self {
            mission: Some(MissionSection::reference()),
            ..Self::base(ScenarioKind::WaypointMission, 60.0)
        }
    }

    /// Hold `target` from the initial state.
    pub fn hold(target: Vec3, duration: f64) -> Self {
        Self {
            custom: Some(CustomSection { target, yaw: 0.0 }),
            ..Self::base(ScenarioKind::Custom, duration)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Number of integration steps covering `duration`.
    pub fn step_count(&self) -> usize {
        (self.scenario.duration / self.scenario.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let s = &self.scenario;
        if !(s.dt > 0.0 && s.dt.is_finite()) {
            return bad(format!("scenario.dt must be positive, got {}", s.dt));
        }
        if !(s.duration > s.dt && s.duration.is_finite()) {
            return bad(format!("scenario.duration {} must exceed dt {}", s.duration, s.dt));
        }
        if s.log_every == 0 {
            return bad("scenario.log_every must be at least 1".into());
        }
        self.vehicle.validate()?;
        self.attitude_gains.validate()?;
        self.lyapunov_gains.validate()?;
        self.position_gains.validate()?;
        if self.initial_state.attitude.ensure_unit().is_err() {
            return bad("initial_state.attitude must be a unit quaternion".into());
        }
        for st in &self.steps {
            if !(st.time >= 0.0 && st.time.is_finite() && st.magnitude.is_finite()) {
                return bad(format!("step at t = {} is not finite and non-negative", st.time));
            }
        }
        match s.kind {
            ScenarioKind::WaypointMission => match &self.mission {
                None => return bad("waypoint_mission requires a [mission] section".into()),
                Some(m) if m.waypoints.is_empty() => return bad("mission.waypoints must not be empty".into()),
                Some(m) if !(m.capture_radius > 0.0) => return bad("mission.capture_radius must be positive".into()),
                Some(_) => {}
            },
            ScenarioKind::Custom if self.custom.is_none() => {
                return bad("custom scenario requires a [custom] section".into())
            }
            _ => {}
        }
        Ok(())
    }
}
