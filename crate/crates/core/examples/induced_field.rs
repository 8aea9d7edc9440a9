//! Induced vector fields of a drift at a few local unitaries.

use schmidt_sphere::fields::{induced_field, speed_limit_bound};
use schmidt_sphere::operators::pauli;
use schmidt_sphere::sampling;
use schmidt_sphere::{CouplingHamiltonian, Kind, LocalUnitary, Shape};

fn main() -> schmidt_sphere::Result<()> {
    let xy = CouplingHamiltonian::new(Kind::Distinguishable, 2, 2, vec![(pauli::x(), pauli::y())])?;
    let f = induced_field(&xy, &LocalUnitary::identity(xy.shape()))?;
    println!("X⊗Y at U = 1:{}", f.matrix());

    let mut rng = sampling::rng(2);
    for kind in [Kind::Distinguishable, Kind::Bosonic, Kind::Fermionic] {
        let d = if kind == Kind::Fermionic { 6 } else { 3 };
        let shape = Shape::new(kind, d, d)?;
        let h0 = sampling::random_coupling(kind, d, d, 2, &mut rng);
        let u = sampling::random_local_unitary(&shape, &mut rng);
        let f = induced_field(&h0, &u)?;
        println!("{} d={d}: ‖H_U‖ = {:.4} ≤ {:.4}{}", kind.name(), f.norm(), speed_limit_bound(&h0), f.matrix());
    }

    // a local drift moves nothing
    let shape = Shape::distinguishable(3, 3)?;
    let local = sampling::random_local_coupling(Kind::Distinguishable, 3, 3, &mut rng);
    let u = sampling::random_local_unitary(&shape, &mut rng);
    println!("local drift: max |H_U| = {:.1e}", induced_field(&local, &u)?.matrix().amax());
    Ok(())
}
