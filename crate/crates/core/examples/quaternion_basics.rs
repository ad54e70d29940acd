//! Hamilton products, rotation, Euler conversion and two-vector alignment.

use tiltrotor::{EulerAngles, Quaternion, Vec3};

fn main() -> tiltrotor::Result<()> {
    let yaw90 = Quaternion::about_z(std::f64::consts::FRAC_PI_2);
    println!("rotate x by 90° yaw: {:?}", yaw90.rotate(Vec3::X)?);

    let q = Quaternion::from_euler(EulerAngles::new(0.3, -0.2, 1.1));
    let e = q.to_euler()?;
    println!("euler round trip: phi={:.6} theta={:.6} psi={:.6}", e.phi, e.theta, e.psi);

    // the two rotation forms agree
    let v = Vec3::new(0.4, -1.0, 2.0);
    let sandwich = q.multiply(Quaternion::pure(v)).multiply(q.conjugate()).vector();
    println!("q v q* = {:?}\nrotate  = {:?}", sandwich, q.rotate(v)?);

    let thrust_dir = Vec3::new(0.5, 0.0, 9.81);
    let align = Quaternion::from_two_vectors(Vec3::Z, thrust_dir)?;
    println!("body z mapped to {:?} (target {:?})", align.rotate(Vec3::Z)?, thrust_dir.normalized()?);

    match Quaternion::from_two_vectors(Vec3::Z, -Vec3::Z) {
        Err(err) => println!("antiparallel: {err}"),
        Ok(q) => println!("unexpected {q:?}"),
    }
    Ok(())
}
