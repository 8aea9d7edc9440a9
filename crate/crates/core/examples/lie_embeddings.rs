//! Embeddings of states into the symmetric Lie algebras AIII, CI and DIII and
//! the checks relating them to the reduced fields.

use schmidt_sphere::fields::induced_field;
use schmidt_sphere::sampling;
use schmidt_sphere::symlie::{lie_field, verify_lie};
use schmidt_sphere::Shape;

fn main() -> schmidt_sphere::Result<()> {
    let mut rng = sampling::rng(7);
    for shape in [Shape::distinguishable(2, 3)?, Shape::bosonic(3)?, Shape::fermionic(4)?] {
        for chk in verify_lie(&shape, 50, &mut rng) {
            println!(
                "{:5} {:32} {:.2e} (tol {:.0e}) {}",
                chk.lie_type.name(),
                chk.property,
                chk.value,
                chk.tolerance,
                if chk.pass { "ok" } else { "FAIL" }
            );
        }
        let h0 = sampling::random_coupling(shape.kind, shape.d1, shape.d2, 2, &mut rng);
        let u = sampling::random_local_unitary(&shape, &mut rng);
        let diff = (lie_field(&h0, &u)? - induced_field(&h0, &u)?.matrix()).amax();
        println!("      field from the Lie picture differs by {diff:.1e}");
    }
    Ok(())
}
