//! Reduced dynamics: the X⊗Y drift rotates (1, 0) into the Bell point, and a
//! random schedule moves a 3x3 state while the operator lift tracks it.

use std::f64::consts::FRAC_PI_4;

use schmidt_sphere::operators::pauli;
use schmidt_sphere::reduced::{integrate_lift, integrate_reduced, ControlSchedule};
use schmidt_sphere::sampling;
use schmidt_sphere::{CouplingHamiltonian, Kind, SchmidtPoint, Shape};

fn main() -> schmidt_sphere::Result<()> {
    let xy = CouplingHamiltonian::new(Kind::Distinguishable, 2, 2, vec![(pauli::x(), pauli::y())])?;
    let shape = xy.shape();
    let schedule = ControlSchedule::identity(shape, FRAC_PI_4)?;
    let p0 = SchmidtPoint::from_slice(shape, &[1.0, 0.0])?;
    let traj = integrate_reduced(&xy, &schedule, &p0, 1e-3)?;
    println!("X⊗Y: σ(π/4) = {:.12?}", traj.last().values().as_slice());

    let mut rng = sampling::rng(3);
    let shape = Shape::distinguishable(3, 3)?;
    let h0 = sampling::random_coupling(Kind::Distinguishable, 3, 3, 2, &mut rng);
    let schedule = ControlSchedule::random(shape, 2.0, 5, &mut rng);
    let p0 = sampling::random_point(&shape, &mut rng);
    let traj = integrate_reduced(&h0, &schedule, &p0, 1e-2)?;
    let lift = integrate_lift(&h0, &schedule, 1e-2)?;
    let r = lift.rotations.last().expect("non-empty");
    println!("3x3: σ(0) = {:.6?}", p0.values().as_slice());
    println!("     σ(T) = {:.6?}", traj.last().values().as_slice());
    println!("     |R(T)σ(0) − σ(T)| = {:.1e}", (r * p0.values() - traj.last().values()).norm());
    println!("     max speed {:.4}", traj.max_discrete_speed());
    Ok(())
}
