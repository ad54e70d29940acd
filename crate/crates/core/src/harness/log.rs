//! CSV telemetry: one header row, then one row per logged sample with every
//! number in `{:.16e}` (17 significant digits, round-trips exactly).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::sim::{LogRow, SimLog};

pub const COLUMNS: [&str; COLUMN_COUNT] = [
    "t", "x", "y", "z", "vx", "vy", "vz", "q0", "q1", "q2", "q3", "phi", "theta", "psi", "p", "q", "r", "omega1",
    "omega2", "omega3", "omega4", "tilt1", "tilt2", "tilt3", "tilt4", "qerr0", "qerr1", "qerr2", "qerr3",
    "lyapunov_v", "lyapunov_v_dot",
];

pub const COLUMN_COUNT: usize = 31;

pub fn header() -> String {
    COLUMNS.join(",")
}

pub fn row_values(r: &LogRow) -> [f64; COLUMN_COUNT] {
    let mut v = [0.0; COLUMN_COUNT];
    let parts: [&[f64]; 11] = [
        &[r.t],
        &r.position.to_array(),
        &r.velocity.to_array(),
        &r.attitude.to_array(),
        &[r.euler.phi, r.euler.theta, r.euler.psi],
        &r.rates.to_array(),
        &r.omega,
        &r.tilt,
        &r.q_err.to_array(),
        &[r.lyapunov_v],
        &[r.lyapunov_v_dot],
    ];
    let mut i = 0;
    for part in parts {
        for &x in part {
            v[i] = x;
            i += 1;
        }
    }
    v
}

pub fn to_csv(log: &SimLog) -> String {
    let mut out = header();
    out.push('\n');
    for r in &log.rows {
        let values = row_values(r);
        for (i, x) in values.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{x:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn write_log(log: &SimLog, path: &Path) -> Result<()> {
    std::fs::write(path, to_csv(log)).map_err(|e| Error::io(path, e))
}

/// Extract two named columns from a log file.
pub fn plot_columns(path: &Path, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::io(path, e))?;
    let headers = reader.headers().map_err(|e| Error::io(path, e))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("column '{name}' not found in {}", path.display())))
    };
    let (ix, iy) = (find(x)?, find(y)?);
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::io(path, e))?;
        let parse = |i: usize| -> Result<f64> {
            record[i]
                .parse()
                .map_err(|_| Error::Config(format!("non-numeric value '{}' in {}", &record[i], path.display())))
        };
        out.push((parse(ix)?, parse(iy)?));
    }
    Ok(out)
}

pub fn pairs_csv(x: &str, y: &str, pairs: &[(f64, f64)]) -> String {
    let mut out = format!("{x},{y}\n");
    for (a, b) in pairs {
        let _ = writeln!(out, "{a:.16e},{b:.16e}");
    }
    out
}
