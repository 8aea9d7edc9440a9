//! Controllability through the Lie closure of sampled induced fields.

use schmidt_sphere::reduced::lie_rank;
use schmidt_sphere::sampling;
use schmidt_sphere::{Kind, Shape};

fn main() -> schmidt_sphere::Result<()> {
    let mut rng = sampling::rng(8);
    for (kind, d) in [(Kind::Distinguishable, 3), (Kind::Distinguishable, 4), (Kind::Bosonic, 4), (Kind::Fermionic, 8)]
    {
        let n = Shape::new(kind, d, d)?.reduced_dim();
        let h0 = sampling::random_coupling(kind, d, d, 2, &mut rng);
        let local = sampling::random_local_coupling(kind, d, d, &mut rng);
        println!(
            "{} d={d}: rank {} of dim so({n}) = {}; local drift rank {}",
            kind.name(),
            lie_rank(&h0, 50, &mut rng)?,
            n * (n - 1) / 2,
            lie_rank(&local, 50, &mut rng)?
        );
    }
    Ok(())
}
