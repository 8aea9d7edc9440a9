//! Stabilizability: the Weyl average of any field vanishes, and commuting
//! factors give a local unitary whose field is zero.

use schmidt_sphere::fields::{induced_field, strong_stab_search, weyl_average};
use schmidt_sphere::linalg::c;
use schmidt_sphere::sampling;
use schmidt_sphere::{CouplingHamiltonian, Kind, Shape};

fn main() -> schmidt_sphere::Result<()> {
    let mut rng = sampling::rng(12);
    let shape = Shape::distinguishable(3, 3)?;
    let h0 = sampling::random_coupling(Kind::Distinguishable, 3, 3, 2, &mut rng);
    let u = sampling::random_local_unitary(&shape, &mut rng);
    println!("Weyl average of H_U: max entry {:.1e}", weyl_average(&h0, &u)?.amax());

    // E_k diagonal in a common basis
    let q = sampling::haar_unitary(3, &mut rng);
    let factors = (0..3)
        .map(|k| {
            let diag = schmidt_sphere::linalg::CMat::from_diagonal(&nalgebra::DVector::from_fn(3, |i, _| {
                c((i * k) as f64 - 1.0, 0.0)
            }));
            (&q * diag * q.adjoint(), sampling::random_hermitian(3, &mut rng))
        })
        .collect();
    let commuting = CouplingHamiltonian::new(Kind::Distinguishable, 3, 3, factors)?;
    let sigma = sampling::random_point(&shape, &mut rng);
    let st = strong_stab_search(&commuting, &sigma, 16, &mut rng)?;
    println!("commuting factors: exact {}, ‖H_U‖ = {:.1e}", st.exact, induced_field(&commuting, &st.u)?.norm());

    let st = strong_stab_search(&h0, &sigma, 16, &mut rng)?;
    println!("generic drift: best residual ‖H_U σ‖ = {:.3e} (exact {})", st.residual, st.exact);
    Ok(())
}
