//! Control allocation: virtual axis commands to rotor speed and tilt increments.

use std::fmt;

use crate::dynamics::{clamp_command, ActuatorCommand, VehicleParams};

/// Rows: (Δω1..Δω4, Δθ1..Δθ4). Columns: (Δω_φ, Δω_θ, Δω_ψ, Δθ_φ, Δθ_θ, Δθ_ψ, Δθ_x, Δθ_y).
pub const ALLOCATION_MATRIX: [[i32; 8]; 8] = [
    [0, -1, -1, 0, 0, 0, 0, 0],
    [1, 0, 1, 0, 0, 0, 0, 0],
    [0, 1, -1, 0, 0, 0, 0, 0],
    [-1, 0, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, -1, 0, -1],
    [0, 0, 0, 1, 0, -1, 1, 0],
    [0, 0, 0, 0, 1, 1, 0, -1],
    [0, 0, 0, 1, 0, 1, 1, 0],
];

/// Names of the eight virtual channels, in column order.
pub const CHANNEL_NAMES: [&str; 8] = [
    "roll_speed",
    "pitch_speed",
    "yaw_speed",
    "roll_tilt",
    "pitch_tilt",
    "yaw_tilt",
    "x_tilt",
    "y_tilt",
];

/// How each virtual channel is defined in terms of actuator increments
/// (Δω1..Δω4, Δθ1..Δθ4), e.g. `Δω_φ = δω2 − δω4`.
///
/// The last two rows are the tilt combinations that produce body x and y
/// force at trim (`F2 sθ2 + F4 sθ4` and `−F1 sθ1 − F3 sθ3`).
pub const CHANNEL_DEFINITIONS: [[i32; 8]; 8] = [
    [0, 1, 0, -1, 0, 0, 0, 0],
    [-1, 0, 1, 0, 0, 0, 0, 0],
    [-1, 1, -1, 1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, 0, 1],
    [0, 0, 0, 0, 1, 0, 1, 0],
    [0, 0, 0, 0, -1, -1, 1, 1],
    [0, 0, 0, 0, 0, 1, 0, 1],
    [0, 0, 0, 0, -1, 0, -1, 0],
];

/// Virtual controls: speed increments in rad/s, tilt increments in rad.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VirtualControlVector {
    pub roll_speed: f64,
    pub pitch_speed: f64,
    pub yaw_speed: f64,
    pub roll_tilt: f64,
    pub pitch_tilt: f64,
    pub yaw_tilt: f64,
    pub x_tilt: f64,
    pub y_tilt: f64,
}

impl VirtualControlVector {
    pub fn to_array(self) -> [f64; 8] {
        [
            self.roll_speed,
            self.pitch_speed,
            self.yaw_speed,
            self.roll_tilt,
            self.pitch_tilt,
            self.yaw_tilt,
            self.x_tilt,
            self.y_tilt,
        ]
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        Self {
            roll_speed: a[0],
            pitch_speed: a[1],
            yaw_speed: a[2],
            roll_tilt: a[3],
            pitch_tilt: a[4],
            yaw_tilt: a[5],
            x_tilt: a[6],
            y_tilt: a[7],
        }
    }
}

/// Per-actuator increments about the hover trim.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActuatorDeltaVector {
    pub d_omega: [f64; 4],
    pub d_tilt: [f64; 4],
}

impl ActuatorDeltaVector {
    pub fn to_array(self) -> [f64; 8] {
        let mut out = [0.0; 8];
        out[..4].copy_from_slice(&self.d_omega);
        out[4..].copy_from_slice(&self.d_tilt);
        out
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        Self {
            d_omega: [a[0], a[1], a[2], a[3]],
            d_tilt: [a[4], a[5], a[6], a[7]],
        }
    }
}

/// Operating point about which increments are applied.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HoverTrim {
    pub omega_h: f64,
    pub theta_h: f64,
}

impl HoverTrim {
    pub fn level(omega_h: f64) -> Self {
        Self { omega_h, theta_h: 0.0 }
    }
}

fn apply(matrix: &[[i32; 8]; 8], v: [f64; 8]) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (row, o) in matrix.iter().zip(out.iter_mut()) {
        *o = row.iter().zip(v.iter()).map(|(&a, &x)| f64::from(a) * x).sum();
    }
    out
}

/// Apply the allocation matrix.
pub fn mix(v: &VirtualControlVector) -> ActuatorDeltaVector {
    mix_with(&ALLOCATION_MATRIX, v)
}

pub fn mix_with(matrix: &[[i32; 8]; 8], v: &VirtualControlVector) -> ActuatorDeltaVector {
    ActuatorDeltaVector::from_array(apply(matrix, v.to_array()))
}

/// Evaluate every channel definition on a set of actuator increments.
pub fn channel_values(d: &ActuatorDeltaVector) -> [f64; 8] {
    apply(&CHANNEL_DEFINITIONS, d.to_array())
}

/// `ω_i = ω_h + Δω_i`, `θ_i = θ_h + Δθ_i`, then actuator saturation.
pub fn compose(trim: &HoverTrim, d: &ActuatorDeltaVector, params: &VehicleParams) -> ActuatorCommand {
    let cmd = ActuatorCommand {
        omega: d.d_omega.map(|dw| trim.omega_h + dw),
        tilt: d.d_tilt.map(|dt| trim.theta_h + dt),
    };
    clamp_command(&cmd, params)
}

/// Expected `definitions · matrix` product: each channel reproduces itself
/// scaled by 2 (differential pairs) or 4 (yaw quadruples), and the
/// translational tilt channels share actuators with the roll/pitch tilt channels.
pub const EXPECTED_RESPONSE: [[i32; 8]; 8] = [
    [2, 0, 0, 0, 0, 0, 0, 0],
    [0, 2, 0, 0, 0, 0, 0, 0],
    [0, 0, 4, 0, 0, 0, 0, 0],
    [0, 0, 0, 2, 0, 0, 2, 0],
    [0, 0, 0, 0, 2, 0, 0, -2],
    [0, 0, 0, 0, 0, 4, 0, 0],
    [0, 0, 0, 2, 0, 0, 2, 0],
    [0, 0, 0, 0, -2, 0, 0, 2],
];

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFactor {
    pub channel: &'static str,
    /// Value of the channel's own definition when only that channel is set to 1.
    pub factor: f64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseDeviation {
    /// Definition evaluated (row of the response).
    pub definition: &'static str,
    /// Virtual channel excited (column of the response).
    pub channel: &'static str,
    pub found: f64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationReport {
    /// `response[k][j]`: definition `k` evaluated on `mix(e_j)`.
    pub response: [[f64; 8]; 8],
    pub factors: Vec<ChannelFactor>,
    pub deviations: Vec<ResponseDeviation>,
    pub rank: usize,
}

impl AllocationReport {
    pub fn is_consistent(&self) -> bool {
        self.deviations.is_empty()
    }
}

impl fmt::Display for AllocationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "allocation matrix rank: {}", self.rank)?;
        for c in &self.factors {
            writeln!(f, "{:<12} gain factor {:>4} (expected {})", c.channel, c.factor, c.expected)?;
        }
        if self.deviations.is_empty() {
            writeln!(f, "no asymmetry detected")?;
        }
        for d in &self.deviations {
            writeln!(
                f,
                "ASYMMETRY: {} on channel {}: {} (expected {})",
                d.definition, d.channel, d.found, d.expected
            )?;
        }
        Ok(())
    }
}

/// Check an allocation matrix against the virtual-channel definitions.
pub fn allocation_consistency_report(matrix: &[[i32; 8]; 8]) -> AllocationReport {
    let mut response = [[0.0; 8]; 8];
    for j in 0..8 {
        let mut unit = [0.0; 8];
        unit[j] = 1.0;
        let values = channel_values(&mix_with(matrix, &VirtualControlVector::from_array(unit)));
        for (k, v) in values.into_iter().enumerate() {
            response[k][j] = v;
        }
    }
    let factors = (0..8)
        .map(|j| ChannelFactor {
            channel: CHANNEL_NAMES[j],
            factor: response[j][j],
            expected: f64::from(EXPECTED_RESPONSE[j][j]),
        })
        .collect();
    let mut deviations = Vec::new();
    for k in 0..8 {
        for j in 0..8 {
            let expected = f64::from(EXPECTED_RESPONSE[k][j]);
            if response[k][j] != expected {
                deviations.push(ResponseDeviation {
                    definition: CHANNEL_NAMES[k],
                    channel: CHANNEL_NAMES[j],
                    found: response[k][j],
                    expected,
                });
            }
        }
    }
    let as_f64 = matrix.map(|row| row.map(f64::from));
    AllocationReport {
        response,
        factors,
        deviations,
        rank: matrix_rank(as_f64, 1e-9),
    }
}

/// Numerical rank by Gaussian elimination with partial pivoting.
pub fn matrix_rank<const N: usize>(mut m: [[f64; N]; N], tol: f64) -> usize {
    let mut rank = 0;
    for col in 0..N {
        let pivot = (rank..N).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()));
        let Some(pivot) = pivot else { break };
        if m[pivot][col].abs() <= tol {
            continue;
        }
        m.swap(rank, pivot);
        for row in (rank + 1)..N {
            let factor = m[row][col] / m[rank][col];
            let pivot_row = m[rank];
            for (dst, src) in m[row].iter_mut().zip(pivot_row).skip(col) {
                *dst -= factor * src;
            }
        }
        rank += 1;
    }
    rank
}

/// The allocation matrix as CSV, one line per actuator row.
pub fn matrix_csv(matrix: &[[i32; 8]; 8]) -> String {
    matrix
        .iter()
        .map(|row| row.iter().map(i32::to_string).collect::<Vec<_>>().join(",") + "\n")
        .collect()
}
