//! Hover speed from the vehicle parameters, then 10 s of flight at that trim.

use tiltrotor::dynamics::{step, ActuatorCommand, RigidBodyState, VehicleParams, DEFAULT_DT};
use tiltrotor::position::hover_speed;
use tiltrotor::Vec3;

fn main() -> tiltrotor::Result<()> {
    let params = VehicleParams::reference();
    let omega_h = hover_speed(params.gravity, [0.0; 4], &params)?;
    println!("omega_h = {omega_h:.6} rad/s  (sqrt(m g / 4 k_f))");
    for tilt in [0.1, 0.3, 0.5] {
        println!("  all rotors tilted {tilt}: {:.4} rad/s", hover_speed(params.gravity, [tilt; 4], &params)?);
    }

    let start = Vec3::new(0.0, 0.0, 5.0);
    let mut s = RigidBodyState::at_rest(start);
    let cmd = ActuatorCommand::uniform(omega_h);
    for _ in 0..10_000 {
        s = step(&s, &cmd, DEFAULT_DT, &params)?;
    }
    let e = s.attitude.to_euler()?;
    println!(
        "after 10 s open loop: drift {:.3e} m, attitude {:.3e} rad",
        (s.position - start).norm(),
        e.phi.abs().max(e.theta.abs()).max(e.psi.abs())
    );
    Ok(())
}
