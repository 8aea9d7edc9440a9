//! Full Schrödinger dynamics under the drift, with the schedule's unitaries
//! applied as instantaneous kicks.
//!
//! Without compensation the drift also turns the local frame, so only the
//! initial velocity of the Schmidt values agrees with the reduced field; the
//! equivalence example adds the compensating Hamiltonians.

use schmidt_sphere::lift::{integrate_full, LocalDrive};
use schmidt_sphere::reduced::{integrate_reduced, schedule_fields, ControlSchedule};
use schmidt_sphere::sampling;
use schmidt_sphere::{Kind, Shape};

fn main() -> schmidt_sphere::Result<()> {
    let mut rng = sampling::rng(4);
    let shape = Shape::bosonic(3)?;
    let h0 = sampling::random_coupling(Kind::Bosonic, 3, 3, 2, &mut rng);
    let schedule = ControlSchedule::random(shape, 1.0, 4, &mut rng);
    let p0 = sampling::random_point(&shape, &mut rng).weyl_sorted();

    let dt = 1e-4;
    let full = integrate_full(&h0, &LocalDrive::from_schedule(&schedule), &p0.to_state(), dt)?;
    let fd = (full.sing_sorted(1).values() - p0.values()) / (full.times[1] - full.times[0]);
    let field = schedule_fields(&h0, &schedule)?[0].matrix() * p0.values();
    println!("initial velocity: full {:.6?}", fd.as_slice());
    println!("                  field {:.6?}", field.as_slice());

    let reduced = integrate_reduced(&h0, &schedule, &p0, dt)?;
    let k = full.times.len() - 1;
    println!("at T: full (kicks only) {:.6?}", full.sing_sorted(k).values().as_slice());
    println!("      reduced           {:.6?}", reduced.last().weyl_sorted().values().as_slice());
    println!("‖ψ(T)‖ = {:.15}", full.state(k).matrix().norm());
    Ok(())
}
