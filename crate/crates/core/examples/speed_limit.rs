//! Speed limit, Weyl-chamber diameter and the resulting control-time bound.

use schmidt_sphere::fields::{induced_field, speed_limit_bound};
use schmidt_sphere::operators::pauli;
use schmidt_sphere::reduced::{chamber_diameter, control_time_lower_bound};
use schmidt_sphere::sampling;
use schmidt_sphere::{CouplingHamiltonian, Kind, Shape};

fn main() -> schmidt_sphere::Result<()> {
    let xy = CouplingHamiltonian::new(Kind::Distinguishable, 2, 2, vec![(pauli::x(), pauli::y())])?;
    println!(
        "X⊗Y: bound {}, control time ≥ {:.12} (π/8 = {:.12})",
        speed_limit_bound(&xy),
        control_time_lower_bound(&xy),
        std::f64::consts::FRAC_PI_8
    );
    for n in 1..=6 {
        println!("chamber diameter n={n}: {:.12}", chamber_diameter(n));
    }

    let mut rng = sampling::rng(9);
    let shape = Shape::distinguishable(3, 3)?;
    let h0 = sampling::random_coupling(Kind::Distinguishable, 3, 3, 3, &mut rng);
    let worst = (0..2000)
        .map(|_| induced_field(&h0, &sampling::random_local_unitary(&shape, &mut rng)).map(|f| f.norm()))
        .collect::<schmidt_sphere::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    println!("3x3 random drift: max sampled ‖H_U‖ {worst:.4} ≤ bound {:.4}", speed_limit_bound(&h0));
    Ok(())
}
