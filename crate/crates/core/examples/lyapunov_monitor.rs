//! Track V and dV/dt along a regulation manoeuvre under the torque-level law,
//! compared with the deployed mixer-based loop.

use tiltrotor::harness::config::{AttitudeLaw, ScenarioConfig, StepCommand};
use tiltrotor::harness::simulate;
use tiltrotor::linearization::Axis;

fn main() -> tiltrotor::Result<()> {
    for law in [AttitudeLaw::Lyapunov, AttitudeLaw::Allocation] {
        let mut cfg = ScenarioConfig::attitude_steps();
        cfg.scenario.attitude_law = law;
        cfg.scenario.duration = 8.0;
        cfg.steps = vec![
            StepCommand { time: 0.5, axis: Axis::Roll, magnitude: 0.8 },
            StepCommand { time: 0.5, axis: Axis::Pitch, magnitude: -0.5 },
        ];
        let log = simulate(&cfg)?;
        let after: Vec<_> = log.rows.iter().filter(|r| r.t >= 0.5).collect();
        let worst_rise = after
            .windows(2)
            .map(|w| w[1].lyapunov_v - w[0].lyapunov_v)
            .fold(f64::MIN, f64::max);
        let max_v_dot = after.iter().map(|r| r.lyapunov_v_dot).fold(f64::MIN, f64::max);
        println!("{law:?}: V {:.4e} -> {:.4e}", after[0].lyapunov_v, after.last().unwrap().lyapunov_v);
        println!("  largest step-to-step rise in V: {worst_rise:.3e}");
        println!("  largest dV/dt: {max_v_dot:.3e}");
    }
    Ok(())
}
