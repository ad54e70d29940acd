//! Hover linearization coefficients against a finite-difference Jacobian of
//! the full torque map, and the mixer checked channel by channel.

use tiltrotor::allocation::{allocation_consistency_report, matrix_csv, HoverTrim, ALLOCATION_MATRIX};
use tiltrotor::dynamics::VehicleParams;
use tiltrotor::linearization::verify_with;
use tiltrotor::position::hover_speed;

fn main() -> tiltrotor::Result<()> {
    let params = VehicleParams::reference();
    let trim = HoverTrim::level(hover_speed(params.gravity, [0.0; 4], &params)?);

    println!("{}", tiltrotor::linearization::verify(&trim, &params)?);
    println!("{}", allocation_consistency_report(&ALLOCATION_MATRIX));
    print!("{}", matrix_csv(&ALLOCATION_MATRIX));

    // A model built with a wrong thrust coefficient is caught.
    let wrong = VehicleParams { k_f: params.k_f * 1.05, ..params };
    let report = verify_with(&trim, &wrong, &params)?;
    println!("\nwith k_f off by 5%, flagged:");
    for c in report.flagged() {
        println!("  {} rel.err {:.2e}", c.channel, c.relative_error);
    }
    Ok(())
}
