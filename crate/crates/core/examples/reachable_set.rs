//! Monte-Carlo endpoints of random piecewise-constant schedules.

use schmidt_sphere::reduced::{chamber_distance, reach_sample};
use schmidt_sphere::sampling;
use schmidt_sphere::{Kind, SchmidtPoint, Shape};

fn main() -> schmidt_sphere::Result<()> {
    let shape = Shape::distinguishable(3, 3)?;
    let h0 = sampling::random_coupling(Kind::Distinguishable, 3, 3, 2, &mut sampling::rng(10));
    let p0 = SchmidtPoint::from_slice(shape, &[1.0, 0.0, 0.0])?;
    let target = SchmidtPoint::normalized(shape, vec![1.0, 1.0, 1.0].into())?;
    for t in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let pts = reach_sample(&h0, &p0, t, 200, 11)?;
        let closest = pts
            .iter()
            .map(|p| chamber_distance(p.weyl_sorted().values(), target.values()))
            .fold(f64::INFINITY, f64::min);
        println!("T = {t}: closest endpoint to the maximally entangled point at distance {closest:.4}");
    }
    Ok(())
}
