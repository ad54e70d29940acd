//! Scenario configuration, closed-loop runs and telemetry files.

pub mod config;
pub mod log;
pub mod sim;

use std::path::{Path, PathBuf};

pub use config::{AttitudeLaw, ScenarioConfig, ScenarioKind, StepCommand};
pub use log::{plot_columns, write_log};
pub use sim::{simulate, LogRow, SimLog, WaypointCapture};

use crate::error::{Error, Result};

/// Load `config_path`, run it and write the log to `out`.
pub fn simulate_file(config_path: &Path, out: &Path) -> Result<SimLog> {
    let cfg = ScenarioConfig::load(config_path)?;
    let log = simulate(&cfg)?;
    write_log(&log, out)?;
    Ok(log)
}

/// Run every `*.toml` in `dir` concurrently, one thread per config, writing
/// `<out_dir>/<stem>.csv`. Results come back sorted by config path.
pub fn run_batch(dir: &Path, out_dir: &Path) -> Result<Vec<(PathBuf, Result<PathBuf>)>> {
    let mut configs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    configs.sort();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    Ok(std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| {
                scope.spawn(move || {
                    let stem = cfg.file_stem().unwrap_or_default();
                    let out = out_dir.join(stem).with_extension("csv");
                    simulate_file(cfg, &out).map(|_| out)
                })
            })
            .collect();
        configs
            .iter()
            .cloned()
            .zip(handles)
            .map(|(cfg, h)| {
                let result = h
                    .join()
                    .unwrap_or_else(|_| Err(Error::NumericalDivergence("simulation thread panicked".into())));
                (cfg, result)
            })
            .collect()
    }))
}
