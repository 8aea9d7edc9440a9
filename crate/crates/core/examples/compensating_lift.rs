//! The infinitesimal local action, its closed-form pseudoinverse and the
//! compensating Hamiltonian, whose size grows as two Schmidt values meet.

use schmidt_sphere::lift::{ad_apply, ad_pinv, compensating_hamiltonian, project_perp};
use schmidt_sphere::linalg::frob;
use schmidt_sphere::sampling;
use schmidt_sphere::states::project_symmetry;
use schmidt_sphere::{Kind, SchmidtPoint, Shape};

fn main() -> schmidt_sphere::Result<()> {
    let mut rng = sampling::rng(5);
    for shape in [Shape::distinguishable(2, 3)?, Shape::bosonic(3)?, Shape::fermionic(5)?] {
        let p = SchmidtPoint::normalized(
            shape,
            (0..shape.reduced_dim()).map(|i| 1.0 + i as f64).collect::<Vec<_>>().into(),
        )?;
        let a =
            project_perp(&shape, &project_symmetry(shape.kind, &sampling::random_matrix(shape.d1, shape.d2, &mut rng)));
        let h = ad_pinv(&p, &a)?;
        let back = ad_apply(&p, &h)?;
        println!("{} {}x{}: |ad(ad⁺A) − A| = {:.1e}", shape.kind.name(), shape.d1, shape.d2, frob(&(back - &a)));
    }

    let shape = Shape::distinguishable(2, 2)?;
    let h0 = sampling::random_coupling(Kind::Distinguishable, 2, 2, 2, &mut rng);
    let u = sampling::random_local_unitary(&shape, &mut rng);
    for gap in [1e-1, 1e-2, 1e-3, 1e-4] {
        let x: f64 = gap / 2.0;
        let y = (0.5 - x * x).sqrt();
        let p = SchmidtPoint::from_slice(shape, &[y + x, y - x])?;
        let h = compensating_hamiltonian(&h0, &u, None, &p)?;
        println!("σ₁ − σ₂ = {gap:.0e}: ‖H‖ = {:.4e}", h.norm());
    }
    Ok(())
}
