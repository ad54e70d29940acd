//! Climb to 5 m and visit five waypoints with the dual-loop controller.

use tiltrotor::harness::config::ScenarioConfig;
use tiltrotor::harness::sim::run_waypoint_mission;

fn main() -> tiltrotor::Result<()> {
    let cfg = ScenarioConfig::waypoint_mission();
    let log = run_waypoint_mission(&cfg)?;
    println!("climb finished at t = {:.2} s", log.cruise_start.unwrap_or(f64::NAN));
    for c in &log.captures {
        println!(
            "waypoint {} captured at t = {:6.2} s  ({:.2}, {:.2}, {:.3})",
            c.index, c.t, c.position.x, c.position.y, c.position.z
        );
    }
    let cruise = log.cruise_start.unwrap_or(0.0);
    let (lo, hi) = log
        .rows
        .iter()
        .filter(|r| r.t >= cruise)
        .fold((f64::MAX, f64::MIN), |(lo, hi), r| (lo.min(r.position.z), hi.max(r.position.z)));
    println!("cruise altitude range [{lo:.3}, {hi:.3}] m");
    let last = log.last().expect("rows");
    println!("terminal |vec(q_err)| = {:.3e}", last.q_err.vector().norm());
    Ok(())
}
