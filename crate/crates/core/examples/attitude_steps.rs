//! Roll, pitch and yaw steps of 1 rad at 5, 15 and 25 s, under both inner
//! loops. Pass a path to also write the CSV log.

use tiltrotor::harness::config::{AttitudeLaw, ScenarioConfig};
use tiltrotor::harness::{simulate, write_log};

fn main() -> tiltrotor::Result<()> {
    let out = std::env::args().nth(1);
    for law in [AttitudeLaw::Allocation, AttitudeLaw::Lyapunov] {
        let mut cfg = ScenarioConfig::attitude_steps();
        cfg.scenario.attitude_law = law;
        let log = simulate(&cfg)?;
        println!("{law:?}:");
        for t in [4.99, 14.99, 24.99, 35.0] {
            let r = log.row_at(t).expect("row");
            println!(
                "  t={:5.2}  phi={:+.4} theta={:+.4} psi={:+.4}  q=({:+.3}, {:+.3}, {:+.3}, {:+.3})",
                r.t, r.euler.phi, r.euler.theta, r.euler.psi, r.attitude.q0, r.attitude.q1, r.attitude.q2, r.attitude.q3
            );
        }
        if let (Some(path), AttitudeLaw::Allocation) = (&out, law) {
            write_log(&log, path.as_ref())?;
            println!("  wrote {path}");
        }
    }
    Ok(())
}
